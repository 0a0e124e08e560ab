#include "oneshot/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oneshot/classical.hpp"

namespace oneshot {

namespace {

double log_prior(const PriorSpec& prior, const CellProbs& probs) {
  switch (prior.kind) {
    case PriorKind::Flat:
      return 0.0;
    case PriorKind::NormalData: {
      double ss = 0.0;
      double cells = 0.0;
      for (size_t i = 0; i < probs.p.size(); ++i) {
        for (size_t m = 0; m < probs.p[i].size(); ++m) {
          const double d = probs.p[i][m] - prior.p_tilde[i][m];
          ss += d * d;
          cells += 1.0;
        }
      }
      if (ss <= 0.0) return std::numeric_limits<double>::infinity();
      return -(cells / 2.0) * std::log(ss);
    }
    case PriorKind::DirichletData: {
      double lp = 0.0;
      for (size_t i = 0; i < probs.p.size(); ++i) {
        for (size_t m = 0; m < probs.p[i].size(); ++m) {
          lp += (prior.beta[i][m] - 1.0) * std::log(probs.p[i][m]);
        }
      }
      lp += (prior.beta_s - 1.0) * std::log(probs.p_s);
      return lp;
    }
  }
  return 0.0;
}

Eigen::VectorXd log_prior_gradient(const PriorSpec& prior,
                                   const TestPlan& plan,
                                   const CellProbs& probs,
                                   const Eigen::MatrixXd& grads) {
  const int dim = plan.param_dim();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  switch (prior.kind) {
    case PriorKind::Flat:
      break;
    case PriorKind::NormalData: {
      double ss = 0.0;
      double cells = 0.0;
      Eigen::VectorXd dss = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < plan.levels(); ++i) {
        for (int m = 0; m < plan.num_inspections(i); ++m) {
          const double d = probs.p[i][m] - prior.p_tilde[i][m];
          ss += d * d;
          dss += 2.0 * d * grads.row(plan.flat_index(i, m)).transpose();
          cells += 1.0;
        }
      }
      if (ss > 0.0) g = -(cells / 2.0) / ss * dss;
      break;
    }
    case PriorKind::DirichletData: {
      for (int i = 0; i < plan.levels(); ++i) {
        for (int m = 0; m < plan.num_inspections(i); ++m) {
          g += (prior.beta[i][m] - 1.0) / probs.p[i][m] *
               grads.row(plan.flat_index(i, m)).transpose();
        }
      }
      g += (prior.beta_s - 1.0) / probs.p_s *
           grads.row(plan.total_cells()).transpose();
      break;
    }
  }
  return g;
}

}  // namespace

PriorSpec make_prior(PriorKind kind, const TestPlan& plan,
                     const CountData& counts, double sigma2_p,
                     bool level_scaled_denominator) {
  plan.validate();
  counts.validate(plan);
  PriorSpec spec;
  spec.kind = kind;
  spec.sigma2_p = sigma2_p;
  spec.level_scaled_denominator = level_scaled_denominator;
  if (kind == PriorKind::Flat) return spec;

  const double n = static_cast<double>(counts.total);
  const double cells = static_cast<double>(plan.total_cells());
  const double denom = level_scaled_denominator
                           ? n + plan.levels() * cells + 1.0
                           : n + cells + 1.0;
  spec.p_tilde.resize(plan.levels());
  for (int i = 0; i < plan.levels(); ++i) {
    spec.p_tilde[i].resize(plan.num_inspections(i));
    for (int m = 0; m < plan.num_inspections(i); ++m) {
      spec.p_tilde[i][m] = (counts.counts[i][m] + 1.0) / denom;
    }
  }
  spec.p_tilde_s = (counts.survivors + 1.0) / denom;

  if (kind == PriorKind::DirichletData) {
    if (!(sigma2_p > 0.0)) {
      throw std::invalid_argument("make_prior: sigma2_p must be positive");
    }
    const double t = spec.p_tilde_s * (1.0 - spec.p_tilde_s) / sigma2_p - 1.0;
    if (!(t > 0.0)) {
      throw std::invalid_argument(
          "make_prior: sigma2_p too large for a proper Dirichlet prior");
    }
    spec.beta.resize(plan.levels());
    double beta_sum = 0.0;
    for (int i = 0; i < plan.levels(); ++i) {
      spec.beta[i].resize(plan.num_inspections(i));
      for (int m = 0; m < plan.num_inspections(i); ++m) {
        spec.beta[i][m] = spec.p_tilde[i][m] * t;
        beta_sum += spec.beta[i][m];
      }
    }
    spec.beta_s = t - beta_sum;
    if (!(spec.beta_s > 0.0)) {
      throw std::invalid_argument(
          "make_prior: derived survival concentration is not positive");
    }
  }
  return spec;
}

double log_prior_density(const PriorSpec& prior, const TestPlan& plan,
                         DistributionKind dist, const ParamVector& theta) {
  if (!theta.valid() || theta.dim() != plan.param_dim()) {
    return -std::numeric_limits<double>::infinity();
  }
  try {
    return log_prior(prior, cell_probabilities(plan, dist, theta));
  } catch (const std::exception&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double b_alpha(const CountData& counts, const CellProbs& probs, double alpha) {
  if (alpha <= 0.0) {
    throw std::invalid_argument("b_alpha: alpha must be positive");
  }
  const Eigen::VectorXd p = probs.flat();
  const Eigen::VectorXd e = counts.flat_fractions();
  double cross = 0.0, model = 0.0;
  for (int r = 0; r < p.size(); ++r) {
    cross += e[r] * std::pow(p[r], alpha);
    model += std::pow(p[r], alpha + 1.0);
  }
  return cross / alpha - model / (alpha + 1.0);
}

double log_posterior(const TestPlan& plan, DistributionKind dist,
                     const CountData& counts, const ParamVector& theta,
                     double alpha, const PriorSpec& prior) {
  if (!theta.valid() || theta.dim() != plan.param_dim()) {
    return -std::numeric_limits<double>::infinity();
  }
  CellProbs probs;
  try {
    probs = cell_probabilities(plan, dist, theta);
  } catch (const std::exception&) {
    return -std::numeric_limits<double>::infinity();
  }
  const double n = static_cast<double>(counts.total);
  const double fit_part = alpha > 0.0 ? n * b_alpha(counts, probs, alpha)
                                      : log_likelihood(counts, probs);
  return fit_part + log_prior(prior, probs);
}

Eigen::VectorXd log_posterior_gradient(const TestPlan& plan,
                                       DistributionKind dist,
                                       const CountData& counts,
                                       const ParamVector& theta, double alpha,
                                       const PriorSpec& prior) {
  const CellProbs probs = cell_probabilities(plan, dist, theta);
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  const Eigen::VectorXd p = probs.flat();
  const Eigen::VectorXd e = counts.flat_fractions();
  const double n = static_cast<double>(counts.total);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(plan.param_dim());
  if (alpha > 0.0) {
    for (int r = 0; r < p.size(); ++r) {
      g += n * (e[r] - p[r]) * std::pow(p[r], alpha - 1.0) *
           grads.row(r).transpose();
    }
  } else {
    for (int r = 0; r < p.size(); ++r) {
      if (e[r] > 0.0) g += n * e[r] / p[r] * grads.row(r).transpose();
    }
  }
  g += log_prior_gradient(prior, plan, probs, grads);
  return g;
}

LogDensity make_pseudo_posterior(const TestPlan& plan, DistributionKind dist,
                                 const CountData& counts, double alpha,
                                 const PriorSpec& prior) {
  LogDensity density;
  density.logp = [=](const Eigen::VectorXd& v) {
    return log_posterior(plan, dist, counts, ParamVector::from_vector(v),
                         alpha, prior);
  };
  density.grad = [=](const Eigen::VectorXd& v) {
    return log_posterior_gradient(plan, dist, counts,
                                  ParamVector::from_vector(v), alpha, prior);
  };
  return density;
}

long PosteriorChains::total_draws() const {
  long n = 0;
  for (const auto& m : draws) n += m.rows();
  return n;
}

int PosteriorChains::dim() const {
  return draws.empty() ? 0 : static_cast<int>(draws.front().cols());
}

bool leapfrog(const LogDensity& target, Eigen::VectorXd& q, Eigen::VectorXd& p,
              const Eigen::VectorXd& v, double step, int steps) {
  p += 0.5 * step * target.grad(q);
  for (int l = 0; l < steps; ++l) {
    q += step * (v.array() * p.array()).matrix();
    if (!std::isfinite(target.logp(q))) return false;
    const double half = l + 1 == steps ? 0.5 : 1.0;
    p += half * step * target.grad(q);
  }
  return true;
}

PosteriorChains hmc_sample(const LogDensity& target, const Eigen::VectorXd& init,
                           const HmcConfig& config) {
  const int dim = static_cast<int>(init.size());
  if (config.chains < 1 || config.iterations <= config.burn_in ||
      config.burn_in < 0 || config.leapfrog_steps < 1 ||
      !(config.step_size > 0.0)) {
    throw std::invalid_argument("hmc_sample: invalid sampler configuration");
  }
  Eigen::VectorXd v = config.mass_v;
  if (v.size() == 0) v = Eigen::VectorXd::Ones(dim);
  if (v.size() != dim || (v.array() <= 0.0).any()) {
    throw std::invalid_argument("hmc_sample: mass vector mismatch");
  }
  if (!std::isfinite(target.logp(init))) {
    throw std::invalid_argument("hmc_sample: log density not finite at init");
  }

  PosteriorChains out;
  const int kept = config.iterations - config.burn_in;
  for (int c = 0; c < config.chains; ++c) {
    std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ULL * (c + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd theta = init;
    if (c > 0) {
      for (int j = 0; j < dim; ++j) theta[j] += config.init_jitter * gauss(rng);
    }
    double logp = target.logp(theta);
    // a jittered start can fall outside the support; pull it back
    if (!std::isfinite(logp)) {
      theta = init;
      logp = target.logp(theta);
    }

    Eigen::MatrixXd chain(kept, dim);
    long accepted = 0;
    for (int it = 0; it < config.iterations; ++it) {
      Eigen::VectorXd phi(dim);
      for (int j = 0; j < dim; ++j) phi[j] = gauss(rng) / std::sqrt(v[j]);
      const double kin0 = 0.5 * (v.array() * phi.array().square()).sum();

      Eigen::VectorXd q = theta;
      Eigen::VectorXd p = phi;
      const bool ok =
          leapfrog(target, q, p, v, config.step_size, config.leapfrog_steps);

      if (ok) {
        const double logp_new = target.logp(q);
        const double kin1 = 0.5 * (v.array() * p.array().square()).sum();
        const double log_ratio = logp_new - logp + kin0 - kin1;
        if (std::isfinite(log_ratio) &&
            std::log(unif(rng)) < std::min(0.0, log_ratio)) {
          theta = q;
          logp = logp_new;
          ++accepted;
        }
      } else {
        unif(rng);  // keep the draw stream aligned on rejected trajectories
      }
      if (it >= config.burn_in) chain.row(it - config.burn_in) = theta;
    }
    out.draws.push_back(std::move(chain));
    out.acceptance_rate.push_back(static_cast<double>(accepted) /
                                  config.iterations);
  }
  return out;
}

Eigen::VectorXd rbe(const PosteriorChains& chains) {
  if (chains.total_draws() == 0) {
    throw std::invalid_argument("rbe: no posterior draws");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(chains.dim());
  for (const auto& m : chains.draws) sum += m.colwise().sum().transpose();
  return sum / static_cast<double>(chains.total_draws());
}

std::pair<double, double> hpd_interval(const PosteriorChains& chains,
                                       int param_index, double level) {
  if (param_index < 0 || param_index >= chains.dim()) {
    throw std::invalid_argument("hpd_interval: parameter index out of range");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw std::invalid_argument("hpd_interval: level must be in (0, 1)");
  }
  std::vector<double> x;
  x.reserve(chains.total_draws());
  for (const auto& m : chains.draws) {
    for (int r = 0; r < m.rows(); ++r) x.push_back(m(r, param_index));
  }
  if (x.empty()) throw std::invalid_argument("hpd_interval: no draws");
  std::sort(x.begin(), x.end());
  const long total = static_cast<long>(x.size());
  const long window = std::min<long>(
      total, static_cast<long>(std::ceil(level * total)));
  double best_width = std::numeric_limits<double>::infinity();
  long best = 0;
  for (long s = 0; s + window <= total; ++s) {
    const double width = x[s + window - 1] - x[s];
    if (width < best_width) {
      best_width = width;
      best = s;
    }
  }
  return {x[best], x[best + window - 1]};
}

Eigen::MatrixXd sample_mh(const std::function<double(const Eigen::VectorXd&)>& logp,
                          const Eigen::VectorXd& init, int n, int burn_in,
                          double step_sd, std::uint64_t seed) {
  if (n <= 0 || burn_in < 0 || !(step_sd > 0.0)) {
    throw std::invalid_argument("sample_mh: invalid configuration");
  }
  const int dim = static_cast<int>(init.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd x = init;
  double lp = logp(x);
  if (!std::isfinite(lp)) {
    throw std::invalid_argument("sample_mh: log density not finite at init");
  }
  Eigen::MatrixXd out(n, dim);
  for (int it = 0; it < burn_in + n; ++it) {
    Eigen::VectorXd y = x;
    for (int j = 0; j < dim; ++j) y[j] += step_sd * gauss(rng);
    const double lp_new = logp(y);
    if (std::isfinite(lp_new) && std::log(unif(rng)) < lp_new - lp) {
      x = y;
      lp = lp_new;
    } else {
      if (!std::isfinite(lp_new)) unif(rng);
    }
    if (it >= burn_in) out.row(it - burn_in) = x;
  }
  return out;
}

}  // namespace oneshot
