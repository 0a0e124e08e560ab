#ifndef ONESHOT_BAYES_HPP
#define ONESHOT_BAYES_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "oneshot/model.hpp"

namespace oneshot {

enum class PriorKind { NormalData, DirichletData, Flat };

/// Data-based prior over theta, expressed through the cell probabilities.
/// Built once per dataset; hyper-parameters are derived on construction.
struct PriorSpec {
  PriorKind kind = PriorKind::Flat;
  double sigma2_p = 0.05;        // Dirichlet only
  bool level_scaled_denominator = true; // n + k*sum(q_i) + 1 vs n + sum(q_i) + 1

  // derived
  std::vector<std::vector<double>> p_tilde;  // failure cells
  double p_tilde_s = 0.0;
  std::vector<std::vector<double>> beta;     // Dirichlet hyper-parameters
  double beta_s = 0.0;
};

PriorSpec make_prior(PriorKind kind, const TestPlan& plan,
                     const CountData& counts, double sigma2_p = 0.05,
                     bool level_scaled_denominator = true);

/// Unnormalized log prior density evaluated at theta (through the cell
/// probabilities); -inf outside the support.
double log_prior_density(const PriorSpec& prior, const TestPlan& plan,
                         DistributionKind dist, const ParamVector& theta);

/// The dpd maximizer B_alpha; the minimum-dpd estimate maximizes it.
double b_alpha(const CountData& counts, const CellProbs& probs, double alpha);

/// Unnormalized log pseudo-posterior n * B_alpha(theta) + log prior(theta).
double log_posterior(const TestPlan& plan, DistributionKind dist,
                     const CountData& counts, const ParamVector& theta,
                     double alpha, const PriorSpec& prior);

Eigen::VectorXd log_posterior_gradient(const TestPlan& plan,
                                       DistributionKind dist,
                                       const CountData& counts,
                                       const ParamVector& theta, double alpha,
                                       const PriorSpec& prior);

/// A differentiable unnormalized log density over theta vectors.
struct LogDensity {
  std::function<double(const Eigen::VectorXd&)> logp;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

LogDensity make_pseudo_posterior(const TestPlan& plan, DistributionKind dist,
                                 const CountData& counts, double alpha,
                                 const PriorSpec& prior);

struct HmcConfig {
  double step_size = 0.01;       // epsilon
  int leapfrog_steps = 10;       // L
  Eigen::VectorXd mass_v;        // M = diag(1/v)
  int chains = 2;
  int iterations = 1200;         // N per chain
  int burn_in = 200;             // N'
  std::uint64_t seed = 0;
  double init_jitter = 0.01;     // sd of per-coordinate start jitter, chains > 0
};

struct PosteriorChains {
  std::vector<Eigen::MatrixXd> draws;  // per chain, (N - N') x dim
  std::vector<double> acceptance_rate;
  double alpha = 0.0;
  PriorKind prior = PriorKind::Flat;

  long total_draws() const;
  int dim() const;
};

/// One leapfrog trajectory of the Hamiltonian dynamics: `steps` position
/// updates of size `step` with half momentum steps at both ends.  Updates q
/// and p in place; returns false if the density left its support.
bool leapfrog(const LogDensity& target, Eigen::VectorXd& q, Eigen::VectorXd& p,
              const Eigen::VectorXd& v, double step, int steps);

/// Hamiltonian Monte Carlo with leapfrog integration; chain 0 starts at
/// init, the rest at jittered copies.  Deterministic given the seed.
PosteriorChains hmc_sample(const LogDensity& target, const Eigen::VectorXd& init,
                           const HmcConfig& config);

/// Across-chain post-burn-in mean (squared error loss Bayes estimate).
Eigen::VectorXd rbe(const PosteriorChains& chains);

/// Shortest interval containing ceil(level * M) sorted marginal draws.
std::pair<double, double> hpd_interval(const PosteriorChains& chains,
                                       int param_index, double level = 0.95);

/// Random-walk Metropolis sampler for a log density; used to draw from the
/// data-based priors when an analytic sampler is unavailable.
Eigen::MatrixXd sample_mh(const std::function<double(const Eigen::VectorXd&)>& logp,
                          const Eigen::VectorXd& init, int n, int burn_in,
                          double step_sd, std::uint64_t seed);

}  // namespace oneshot

#endif
