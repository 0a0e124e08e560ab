#ifndef ONESHOT_TESTING_HPP
#define ONESHOT_TESTING_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "oneshot/bayes.hpp"
#include "oneshot/classical.hpp"

namespace oneshot {

/// Point null H0: ||theta - theta0|| <= ball_radius, prior mass rho0.
struct HypothesisSpec {
  ParamVector theta0;
  double ball_radius = 0.0;
  double rho0 = 0.5;

  void validate() const;
};

enum class BfCategory {
  Negative,       // BF01 < 1
  BareMention,    // [1, 3)
  Positive,       // [3, 20)
  Strong,         // [20, 150)
  VeryStrong,     // >= 150
};

const char* bf_category_name(BfCategory c);

struct BfResult {
  double prior_odds = 0.0;
  double posterior_odds = 0.0;
  double bf01 = 0.0;
  BfCategory category = BfCategory::Negative;
  bool censored = false;   // no posterior draw fell inside the ball
  double bf01_bound = 0.0; // upper bound when censored
  long prior_in_ball = 0;
  long posterior_in_ball = 0;
};

BfCategory interpret_bf(double bf01);

/// Prior and posterior odds of the epsilon ball estimated empirically; the
/// prior sampler returns an M x dim matrix of draws from the prior.
BfResult bayes_factor_empirical(
    const PosteriorChains& chains,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& prior_sampler,
    const HypothesisSpec& hyp, std::uint64_t seed = 0);

/// Variant with the prior odds supplied directly (e.g. rho0/(1-rho0)).
BfResult bayes_factor_empirical(const PosteriorChains& chains,
                                double prior_odds,
                                const HypothesisSpec& hyp);

struct GofResult {
  double ts = 0.0;
  double p_value = 0.0;
  FitResult fit;
};

/// Relative-distance statistic between observed and fitted expected counts,
/// calibrated by parametric bootstrap refits.
GofResult gof_bootstrap(const TestPlan& plan, DistributionKind dist,
                        const CountData& counts, int b, std::uint64_t seed,
                        const FitConfig& base = FitConfig{});

}  // namespace oneshot

#endif
