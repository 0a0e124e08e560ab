#include "oneshot/testing.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "oneshot/sim.hpp"

namespace oneshot {

void HypothesisSpec::validate() const {
  if (!(ball_radius > 0.0)) {
    throw std::invalid_argument("HypothesisSpec: ball radius must be positive");
  }
  if (!(rho0 > 0.0) || !(rho0 < 1.0)) {
    throw std::invalid_argument("HypothesisSpec: rho0 must lie in (0, 1)");
  }
}

const char* bf_category_name(BfCategory c) {
  switch (c) {
    case BfCategory::Negative: return "Negative";
    case BfCategory::BareMention: return "Not worth more than a bare mention";
    case BfCategory::Positive: return "Positive";
    case BfCategory::Strong: return "Strong";
    case BfCategory::VeryStrong: return "Very Strong";
  }
  return "?";
}

BfCategory interpret_bf(double bf01) {
  if (!(bf01 > 0.0)) {
    throw std::invalid_argument("interpret_bf: BF01 must be positive");
  }
  if (bf01 < 1.0) return BfCategory::Negative;
  if (bf01 < 3.0) return BfCategory::BareMention;
  if (bf01 < 20.0) return BfCategory::Positive;
  if (bf01 < 150.0) return BfCategory::Strong;
  return BfCategory::VeryStrong;
}

namespace {

long count_in_ball(const Eigen::MatrixXd& draws, const Eigen::VectorXd& center,
                   double radius) {
  long inside = 0;
  for (int r = 0; r < draws.rows(); ++r) {
    if ((draws.row(r).transpose() - center).norm() <= radius) ++inside;
  }
  return inside;
}

BfResult assemble(const PosteriorChains& chains, double prior_odds,
                  const HypothesisSpec& hyp, long prior_in) {
  const Eigen::VectorXd center = hyp.theta0.as_vector();
  long post_in = 0;
  long total = 0;
  for (const auto& m : chains.draws) {
    post_in += count_in_ball(m, center, hyp.ball_radius);
    total += m.rows();
  }
  if (total == 0) {
    throw std::invalid_argument("bayes_factor_empirical: no posterior draws");
  }
  if (!(prior_odds > 0.0)) {
    throw NumericalError("bayes_factor_empirical: prior odds not positive");
  }

  BfResult res;
  res.prior_odds = prior_odds;
  res.prior_in_ball = prior_in;
  res.posterior_in_ball = post_in;
  if (post_in == 0) {
    res.censored = true;
    // fewer than one draw in the ball; report the resolution limit
    res.bf01_bound = 1.0 / (static_cast<double>(total) * prior_odds);
    res.posterior_odds = 0.0;
    res.bf01 = 0.0;
    res.category = BfCategory::Negative;
    return res;
  }
  if (post_in == total) {
    throw NumericalError(
        "bayes_factor_empirical: every posterior draw inside the ball");
  }
  res.posterior_odds =
      static_cast<double>(post_in) / static_cast<double>(total - post_in);
  res.bf01 = res.posterior_odds / prior_odds;
  res.category = interpret_bf(res.bf01);
  return res;
}

}  // namespace

BfResult bayes_factor_empirical(
    const PosteriorChains& chains,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& prior_sampler,
    const HypothesisSpec& hyp, std::uint64_t seed) {
  hyp.validate();
  const Eigen::MatrixXd prior_draws = prior_sampler(seed);
  if (prior_draws.rows() == 0) {
    throw std::invalid_argument("bayes_factor_empirical: empty prior sample");
  }
  const long in =
      count_in_ball(prior_draws, hyp.theta0.as_vector(), hyp.ball_radius);
  const long m = prior_draws.rows();
  if (in == 0 || in == m) {
    throw NumericalError(
        "bayes_factor_empirical: prior ball probability degenerate (" +
        std::to_string(in) + "/" + std::to_string(m) + ")");
  }
  const double prior_odds =
      static_cast<double>(in) / static_cast<double>(m - in);
  return assemble(chains, prior_odds, hyp, in);
}

BfResult bayes_factor_empirical(const PosteriorChains& chains,
                                double prior_odds,
                                const HypothesisSpec& hyp) {
  hyp.validate();
  return assemble(chains, prior_odds, hyp, -1);
}

GofResult gof_bootstrap(const TestPlan& plan, DistributionKind dist,
                        const CountData& counts, int b, std::uint64_t seed,
                        const FitConfig& base) {
  if (b < 100) {
    throw std::invalid_argument("gof_bootstrap: need at least 100 replicates");
  }
  plan.validate();
  counts.validate(plan);

  FitConfig cfg = base;
  cfg.alpha = 0.0;  // the statistic is defined at the MLE
  cfg.compute_covariance = false;
  GofResult res;
  res.fit = fit(plan, dist, counts, cfg);

  const CellProbs probs = cell_probabilities(plan, dist, res.fit.theta);
  const Eigen::VectorXd p = probs.flat();
  const double n = static_cast<double>(counts.total);
  const auto statistic = [&](const CountData& data) {
    const Eigen::VectorXd obs = data.flat_fractions() * n;
    double ts = 0.0;
    for (int r = 0; r < p.size(); ++r) {
      const double expected = n * p[r];
      if (expected <= 0.0) {
        throw NumericalError("gof_bootstrap: fitted expected count is zero");
      }
      ts += std::abs(obs[r] - expected) / expected;
    }
    return ts;
  };
  res.ts = statistic(counts);

  FitConfig boot_cfg = cfg;
  boot_cfg.initial = res.fit.theta;  // warm start
  long exceed = 0;
  for (int rep = 0; rep < b; ++rep) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (rep + 1));
    const CountData sample = generate_counts_from_probs(plan, p, counts.total, rng);
    double ts_b;
    try {
      const FitResult refit = fit(plan, dist, sample, boot_cfg);
      const Eigen::VectorXd pb =
          cell_probabilities(plan, dist, refit.theta).flat();
      const Eigen::VectorXd obs = sample.flat_fractions() * n;
      ts_b = 0.0;
      for (int r = 0; r < pb.size(); ++r) {
        const double expected = n * pb[r];
        if (expected <= 0.0) {
          throw NumericalError("gof_bootstrap: bootstrap expected count zero");
        }
        ts_b += std::abs(obs[r] - expected) / expected;
      }
    } catch (const std::invalid_argument&) {
      // a replicate with no failures cannot be refit; treat as extreme
      ts_b = std::numeric_limits<double>::infinity();
    }
    if (ts_b >= res.ts) ++exceed;
  }
  res.p_value = static_cast<double>(exceed) / b;
  return res;
}

}  // namespace oneshot
