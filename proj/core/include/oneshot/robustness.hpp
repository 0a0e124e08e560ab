#ifndef ONESHOT_ROBUSTNESS_HPP
#define ONESHOT_ROBUSTNESS_HPP

#include <cstdint>
#include <functional>

#include "oneshot/bayes.hpp"
#include "oneshot/testing.hpp"

namespace oneshot {

/// Influence of a point mass at time t on the minimum-dpd estimator.  The
/// result is a step function of t, constant within each inspection cell.
Eigen::VectorXd if_mdpde(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha, double t);

/// Same, with the contamination cell given directly (total_cells() = survival).
Eigen::VectorXd if_mdpde_cell(const TestPlan& plan, DistributionKind dist,
                              const ParamVector& theta, double alpha, int cell);

/// Influence on the posterior-mean estimate: posterior covariance between
/// theta and the contamination score, estimated across the supplied draws.
Eigen::VectorXd if_rbe(const TestPlan& plan, DistributionKind dist,
                       double alpha, double t, const PosteriorChains& chains);

Eigen::VectorXd if_rbe_cell(const TestPlan& plan, DistributionKind dist,
                            double alpha, int cell,
                            const PosteriorChains& chains);

/// Influence on the Bayes factor.  The samplers draw from the priors
/// restricted to the null ball and its complement; expectations are taken
/// under the fit-weighted restricted priors via self-normalized importance
/// sampling with weights exp(n * B_alpha(theta)) at the working model
/// theta0.  n enters because the fitted measure scales with sample size.
double if_bayes_factor(
    const TestPlan& plan, DistributionKind dist, double alpha,
    const HypothesisSpec& hyp, long n, double t,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& null_sampler,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& alt_sampler,
    std::uint64_t seed = 0);

double if_bayes_factor_cell(
    const TestPlan& plan, DistributionKind dist, double alpha,
    const HypothesisSpec& hyp, long n, int cell,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& null_sampler,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& alt_sampler,
    std::uint64_t seed = 0);

/// Largest ||IF|| over the finite cell set (gross-error sensitivity).
double gross_error_sensitivity(const TestPlan& plan, DistributionKind dist,
                               const ParamVector& theta, double alpha);

}  // namespace oneshot

#endif
