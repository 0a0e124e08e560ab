#include "oneshot/robustness.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace oneshot {

namespace {

// (1/alpha) * sum_r (delta_r - p0_r) p_r^alpha, the contamination score
double x_score(const Eigen::VectorXd& p0, const Eigen::VectorXd& p,
               int cell, double alpha) {
  double s = 0.0;
  for (int r = 0; r < p.size(); ++r) {
    const double delta = r == cell ? 1.0 : 0.0;
    s += (delta - p0[r]) * std::pow(p[r], alpha);
  }
  return s / alpha;
}

int check_cell(const TestPlan& plan, int cell) {
  if (cell < 0 || cell > plan.total_cells()) {
    throw std::invalid_argument("influence: cell index out of range");
  }
  return cell;
}

}  // namespace

Eigen::VectorXd if_mdpde_cell(const TestPlan& plan, DistributionKind dist,
                              const ParamVector& theta, double alpha,
                              int cell) {
  check_cell(plan, cell);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("if_mdpde: alpha must be positive");
  }
  const Eigen::VectorXd p = cell_probabilities(plan, dist, theta).flat();
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(plan.param_dim());
  for (int r = 0; r < p.size(); ++r) {
    const double delta = r == cell ? 1.0 : 0.0;
    score += (delta - p[r]) * std::pow(p[r], alpha - 1.0) *
             grads.row(r).transpose();
  }
  const Eigen::MatrixXd j = j_matrix(plan, dist, theta, alpha);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw NumericalError("if_mdpde: singular J matrix");
  }
  return lu.solve(score);
}

Eigen::VectorXd if_mdpde(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha, double t) {
  return if_mdpde_cell(plan, dist, theta, alpha, plan.locate(t));
}

Eigen::VectorXd if_rbe_cell(const TestPlan& plan, DistributionKind dist,
                            double alpha, int cell,
                            const PosteriorChains& chains) {
  check_cell(plan, cell);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("if_rbe: alpha must be positive");
  }
  const long m = chains.total_draws();
  if (m < 200) {
    throw std::invalid_argument("if_rbe: need at least 200 posterior draws");
  }
  const int dim = chains.dim();
  Eigen::VectorXd theta_sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd cross_sum = Eigen::VectorXd::Zero(dim);
  double x_sum = 0.0;
  for (const auto& mat : chains.draws) {
    for (int r = 0; r < mat.rows(); ++r) {
      const Eigen::VectorXd v = mat.row(r).transpose();
      const Eigen::VectorXd p =
          cell_probabilities(plan, dist, ParamVector::from_vector(v)).flat();
      const double x = x_score(p, p, cell, alpha);
      theta_sum += v;
      cross_sum += x * v;
      x_sum += x;
    }
  }
  const double md = static_cast<double>(m);
  return cross_sum / md - (theta_sum / md) * (x_sum / md);
}

Eigen::VectorXd if_rbe(const TestPlan& plan, DistributionKind dist,
                       double alpha, double t, const PosteriorChains& chains) {
  return if_rbe_cell(plan, dist, alpha, plan.locate(t), chains);
}

double if_bayes_factor_cell(
    const TestPlan& plan, DistributionKind dist, double alpha,
    const HypothesisSpec& hyp, long n, int cell,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& null_sampler,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& alt_sampler,
    std::uint64_t seed) {
  check_cell(plan, cell);
  hyp.validate();
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("if_bayes_factor: alpha must be positive");
  }
  if (n < 1) throw std::invalid_argument("if_bayes_factor: n must be positive");

  const Eigen::VectorXd p0 =
      cell_probabilities(plan, dist, hyp.theta0).flat();

  // b_alpha at the working model: empirical fractions replaced by p(theta0)
  const auto fit_exponent = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd p =
        cell_probabilities(plan, dist, ParamVector::from_vector(v)).flat();
    double cross = 0.0, model = 0.0;
    for (int r = 0; r < p.size(); ++r) {
      cross += p0[r] * std::pow(p[r], alpha);
      model += std::pow(p[r], alpha + 1.0);
    }
    return n * (cross / alpha - model / (alpha + 1.0));
  };

  struct Side {
    double mean_weight = 0.0;  // estimates the integral of exp * prior
    double expectation = 0.0;  // weighted mean of the score
    double ess = 0.0;
  };
  const auto one_side = [&](const Eigen::MatrixXd& draws) {
    if (draws.rows() == 0) {
      throw std::invalid_argument("if_bayes_factor: empty prior sample");
    }
    std::vector<double> logw(draws.rows());
    std::vector<double> x(draws.rows());
    double max_logw = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < draws.rows(); ++r) {
      const Eigen::VectorXd v = draws.row(r).transpose();
      logw[r] = fit_exponent(v);
      const Eigen::VectorXd p =
          cell_probabilities(plan, dist, ParamVector::from_vector(v)).flat();
      x[r] = x_score(p0, p, cell, alpha);
      max_logw = std::max(max_logw, logw[r]);
    }
    Side side;
    double wsum = 0.0, w2sum = 0.0, xsum = 0.0;
    for (size_t r = 0; r < logw.size(); ++r) {
      const double w = std::exp(logw[r] - max_logw);
      wsum += w;
      w2sum += w * w;
      xsum += w * x[r];
    }
    side.ess = wsum * wsum / w2sum;
    if (side.ess < 50.0) {
      throw NumericalError(
          "if_bayes_factor: effective sample size below 50 (" +
          std::to_string(side.ess) + ")");
    }
    side.expectation = xsum / wsum;
    // mean weight on the original scale, up to the shared max_logw factor
    side.mean_weight = std::log(wsum / draws.rows()) + max_logw;
    return side;
  };

  const Side s0 = one_side(null_sampler(seed));
  const Side s1 = one_side(alt_sampler(seed + 1));
  const double y = std::exp(s0.mean_weight - s1.mean_weight);
  return y * (s0.expectation - s1.expectation);
}

double if_bayes_factor(
    const TestPlan& plan, DistributionKind dist, double alpha,
    const HypothesisSpec& hyp, long n, double t,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& null_sampler,
    const std::function<Eigen::MatrixXd(std::uint64_t)>& alt_sampler,
    std::uint64_t seed) {
  return if_bayes_factor_cell(plan, dist, alpha, hyp, n, plan.locate(t),
                              null_sampler, alt_sampler, seed);
}

double gross_error_sensitivity(const TestPlan& plan, DistributionKind dist,
                               const ParamVector& theta, double alpha) {
  double worst = 0.0;
  for (int cell = 0; cell <= plan.total_cells(); ++cell) {
    worst = std::max(worst,
                     if_mdpde_cell(plan, dist, theta, alpha, cell).norm());
  }
  return worst;
}

}  // namespace oneshot
