#include "oneshot/classical.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace oneshot {

namespace {

double objective_value(const TestPlan& plan, DistributionKind dist,
                       const CountData& counts, const ParamVector& theta,
                       double alpha) {
  const CellProbs probs = cell_probabilities(plan, dist, theta);
  if (alpha > 0.0) return dpd_objective(counts, probs, alpha);
  return -log_likelihood(counts, probs);
}

}  // namespace

double log_likelihood(const CountData& counts, const CellProbs& probs) {
  double ll = 0.0;
  for (size_t i = 0; i < counts.counts.size(); ++i) {
    for (size_t m = 0; m < counts.counts[i].size(); ++m) {
      const long c = counts.counts[i][m];
      if (c > 0) ll += c * std::log(probs.p[i][m]);
    }
  }
  if (counts.survivors > 0) ll += counts.survivors * std::log(probs.p_s);
  return ll;
}

double dpd_objective(const CountData& counts, const CellProbs& probs,
                     double alpha) {
  if (alpha <= 0.0) {
    throw std::invalid_argument("dpd_objective: alpha must be positive");
  }
  const Eigen::VectorXd p = probs.flat();
  const Eigen::VectorXd e = counts.flat_fractions();
  double model_term = 0.0, cross_term = 0.0, empirical_term = 0.0;
  for (int r = 0; r < p.size(); ++r) {
    model_term += std::pow(p[r], alpha + 1.0);
    cross_term += e[r] * std::pow(p[r], alpha);
    if (e[r] > 0.0) empirical_term += std::pow(e[r], alpha + 1.0);
  }
  return model_term - (1.0 + 1.0 / alpha) * cross_term +
         empirical_term / alpha;
}

Eigen::VectorXd objective_gradient(const TestPlan& plan, DistributionKind dist,
                                   const CountData& counts,
                                   const ParamVector& theta, double alpha) {
  const CellProbs probs = cell_probabilities(plan, dist, theta);
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  const Eigen::VectorXd p = probs.flat();
  const Eigen::VectorXd e = counts.flat_fractions();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(plan.param_dim());
  if (alpha > 0.0) {
    for (int r = 0; r < p.size(); ++r) {
      g += (alpha + 1.0) * (p[r] - e[r]) * std::pow(p[r], alpha - 1.0) *
           grads.row(r).transpose();
    }
  } else {
    // negative log-likelihood
    const double n = static_cast<double>(counts.total);
    for (int r = 0; r < p.size(); ++r) {
      if (e[r] > 0.0) g -= n * e[r] / p[r] * grads.row(r).transpose();
    }
  }
  return g;
}

FitResult fit(const TestPlan& plan, DistributionKind dist,
              const CountData& counts, const FitConfig& config) {
  plan.validate();
  counts.validate(plan);
  if (counts.total_failures() <= 0) {
    throw std::invalid_argument("fit: at least one observed failure required");
  }
  if (!config.initial.valid() ||
      config.initial.dim() != plan.param_dim()) {
    throw std::invalid_argument("fit: invalid initial point");
  }

  ParamVector theta = config.initial;
  double obj = objective_value(plan, dist, counts, theta, config.alpha);
  if (!std::isfinite(obj)) throw std::invalid_argument("fit: bad initial point");

  const int dim = plan.param_dim();
  int increase_streak = 0;
  FitResult result;
  for (int sweep = 0; sweep < config.max_iters; ++sweep) {
    const Eigen::VectorXd before = theta.as_vector();
    const double sweep_start_obj = obj;
    for (int j = 0; j < dim; ++j) {
      const Eigen::VectorXd grad =
          objective_gradient(plan, dist, counts, theta, config.alpha);
      double h = config.learning_rate;
      const double old = theta.as_vector()[j];
      for (int halving = 0; halving <= 20; ++halving) {
        double candidate = old - h * grad[j];
        if (j >= 2 && candidate <= 0.0) candidate = old / 2.0;  // keep gamma > 0
        ParamVector trial = theta;
        if (j == 0) trial.c0 = candidate;
        else if (j == 1) trial.c1 = candidate;
        else trial.gammas[j - 2] = candidate;
        const double trial_obj =
            objective_value(plan, dist, counts, trial, config.alpha);
        if (std::isfinite(trial_obj) && trial_obj <= obj) {
          theta = trial;
          obj = trial_obj;
          break;
        }
        if (halving == 20) break;  // keep the old coordinate
        h /= 2.0;
      }
    }
    result.iterations = sweep + 1;
    if (obj > sweep_start_obj) {
      if (++increase_streak >= 50) {
        throw NumericalError("fit: objective increased for 50 consecutive sweeps");
      }
    } else {
      increase_streak = 0;
    }
    const double max_delta =
        (theta.as_vector() - before).cwiseAbs().maxCoeff();
    if (max_delta < config.threshold) {
      result.converged = true;
      break;
    }
  }

  result.theta = theta;
  result.objective = obj;
  if (config.compute_covariance) {
    const double a = config.alpha > 0.0 ? config.alpha : 0.0;
    try {
      const Eigen::MatrixXd cov =
          sandwich_covariance(plan, dist, theta, a, counts.total);
      result.covariance = cov;
      // two-sided normal quantile
      const double z = [&] {
        const double p = 0.5 + config.ci_level / 2.0;
        // Acklam-style rational approximation is overkill; use erfc inverse
        // via Newton on the standard normal cdf.
        double x = 1.0;
        for (int it = 0; it < 60; ++it) {
          const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
          const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
          x -= (cdf - p) / pdf;
        }
        return x;
      }();
      const Eigen::VectorXd est = theta.as_vector();
      for (int j = 0; j < dim; ++j) {
        const double se = std::sqrt(std::max(cov(j, j), 0.0));
        result.ci.emplace_back(est[j] - z * se, est[j] + z * se);
      }
    } catch (const NumericalError&) {
      result.covariance.reset();
    }
  }
  return result;
}

Eigen::MatrixXd j_matrix(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha) {
  const Eigen::VectorXd p = cell_probabilities(plan, dist, theta).flat();
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  const int dim = plan.param_dim();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
  for (int r = 0; r < p.size(); ++r) {
    j += std::pow(p[r], alpha - 1.0) * grads.row(r).transpose() * grads.row(r);
  }
  return j;
}

Eigen::MatrixXd k_matrix(const TestPlan& plan, DistributionKind dist,
                         const ParamVector& theta, double alpha) {
  const Eigen::VectorXd p = cell_probabilities(plan, dist, theta).flat();
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  const int dim = plan.param_dim();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(dim);
  for (int r = 0; r < p.size(); ++r) {
    k += std::pow(p[r], 2.0 * alpha - 1.0) * grads.row(r).transpose() * grads.row(r);
    xi += std::pow(p[r], alpha) * grads.row(r).transpose();
  }
  k -= xi * xi.transpose();
  return k;
}

Eigen::MatrixXd sandwich_covariance(const TestPlan& plan, DistributionKind dist,
                                    const ParamVector& theta, double alpha,
                                    long n) {
  if (!theta.valid()) {
    throw std::invalid_argument("sandwich_covariance: invalid theta");
  }
  const Eigen::MatrixXd j = j_matrix(plan, dist, theta, alpha);
  const Eigen::MatrixXd k = k_matrix(plan, dist, theta, alpha);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    const Eigen::VectorXd sv = j.jacobiSvd().singularValues();
    throw NumericalError("sandwich_covariance: singular J, condition number " +
                         std::to_string(sv(0) / sv(sv.size() - 1)));
  }
  const Eigen::MatrixXd jinv = lu.inverse();
  Eigen::MatrixXd cov = jinv * k * jinv / static_cast<double>(n);
  // symmetrize away round-off
  return 0.5 * (cov + cov.transpose());
}

TuningResult select_tuning(const TestPlan& plan, DistributionKind dist,
                           const CountData& counts, const FitConfig& base,
                           const std::vector<double>& grid, double c1,
                           double c2) {
  if (grid.empty()) throw std::invalid_argument("select_tuning: empty grid");
  if (!(c1 > 0.0) || !(c2 > 0.0) || std::abs(c1 + c2 - 1.0) > 1e-12) {
    throw std::invalid_argument("select_tuning: weights must be positive, sum 1");
  }
  TuningResult result;
  result.grid = grid;
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double a : grid) {
    FitConfig cfg = base;
    cfg.alpha = a;
    cfg.compute_covariance = false;
    double phi = std::numeric_limits<double>::quiet_NaN();
    FitResult fr;
    try {
      fr = fit(plan, dist, counts, cfg);
      const CellProbs probs = cell_probabilities(plan, dist, fr.theta);
      const Eigen::MatrixXd j = j_matrix(plan, dist, fr.theta, a);
      const Eigen::MatrixXd k = k_matrix(plan, dist, fr.theta, a);
      const Eigen::MatrixXd avar = j.fullPivLu().solve(
          k * j.fullPivLu().solve(Eigen::MatrixXd::Identity(j.rows(), j.cols())));
      phi = c1 * dpd_objective(counts, probs, a) + c2 * avar.trace();
    } catch (const std::exception&) {
      result.phi.push_back(phi);
      result.fits.push_back(fr);
      continue;  // skipped with NaN marker
    }
    result.phi.push_back(phi);
    result.fits.push_back(fr);
    if (std::isfinite(phi) && phi < best) {
      best = phi;
      result.alpha_opt = a;
      any = true;
    }
  }
  if (!any) throw NumericalError("select_tuning: every grid point failed");
  return result;
}

}  // namespace oneshot
