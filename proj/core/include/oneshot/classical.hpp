#ifndef ONESHOT_CLASSICAL_HPP
#define ONESHOT_CLASSICAL_HPP

#include <optional>
#include <utility>
#include <vector>

#include "oneshot/model.hpp"

namespace oneshot {

struct FitConfig {
  double learning_rate = 1e-3;  // h in the coordinate descent updates
  double threshold = 1e-6;      // stop when max |theta_new - theta_old| < c
  int max_iters = 50000;        // full sweeps
  double alpha = 0.0;           // 0 selects the likelihood objective
  ParamVector initial;
  bool compute_covariance = true;
  double ci_level = 0.95;
};

struct FitResult {
  ParamVector theta;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<Eigen::MatrixXd> covariance;
  std::vector<std::pair<double, double>> ci;  // per parameter, Wald
};

/// sum n_im log p_im + n_s log p_s, constants dropped.
double log_likelihood(const CountData& counts, const CellProbs& probs);

/// Density power divergence between empirical and model cell probabilities.
double dpd_objective(const CountData& counts, const CellProbs& probs,
                     double alpha);

/// Gradient of the fitting objective (dpd for alpha > 0, negative
/// log-likelihood otherwise) with respect to theta.
Eigen::VectorXd objective_gradient(const TestPlan& plan, DistributionKind dist,
                                   const CountData& counts,
                                   const ParamVector& theta, double alpha);

/// Cyclic coordinate descent on the likelihood (alpha = 0) or dpd objective.
FitResult fit(const TestPlan& plan, DistributionKind dist,
              const CountData& counts, const FitConfig& config);

/// J_alpha and K_alpha from the cell probability gradients.
Eigen::MatrixXd j_matrix(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha);
Eigen::MatrixXd k_matrix(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha);

/// Asymptotic covariance (1/n) J^-1 K J^-1 of the minimum-dpd estimator.
Eigen::MatrixXd sandwich_covariance(const TestPlan& plan, DistributionKind dist,
                                    const ParamVector& theta, double alpha,
                                    long n);

struct TuningResult {
  double alpha_opt = 0.0;
  std::vector<double> grid;
  std::vector<double> phi;        // NaN where the fit failed
  std::vector<FitResult> fits;
};

/// Grid search minimizing C1 * D_alpha(theta_hat) + C2 * tr(J^-1 K J^-1);
/// ties break toward the smaller alpha.
TuningResult select_tuning(const TestPlan& plan, DistributionKind dist,
                           const CountData& counts, const FitConfig& base,
                           const std::vector<double>& grid, double c1,
                           double c2);

}  // namespace oneshot

#endif
