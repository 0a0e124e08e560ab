#include "oneshot/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oneshot {

namespace {

constexpr double kProbFloor = 1e-300;

struct LambdaPair {
  double value;
  double dc0;  // = value
  double dc1;  // = x * value
};

LambdaPair lambda_at(const ParamVector& theta, double x) {
  const double v = std::exp(theta.c0 + theta.c1 * x);
  if (!std::isfinite(v)) {
    throw std::domain_error("lambda overflow: parameters out of numeric range");
  }
  return {v, v, x * v};
}

}  // namespace

double q_fn(DistributionKind kind, double t, double g) {
  return kind == DistributionKind::Weibull ? std::pow(t, g)
                                           : std::expm1(g * t);
}

double q_dt(DistributionKind kind, double t, double g) {
  return kind == DistributionKind::Weibull ? g * std::pow(t, g - 1.0)
                                           : g * std::exp(g * t);
}

double q_dg(DistributionKind kind, double t, double g) {
  return kind == DistributionKind::Weibull ? std::pow(t, g) * std::log(t)
                                           : t * std::exp(g * t);
}

double q_dt_dg(DistributionKind kind, double t, double g) {
  if (kind == DistributionKind::Weibull) {
    return std::pow(t, g - 1.0) * (1.0 + g * std::log(t));
  }
  return std::exp(g * t) * (1.0 + g * t);
}

int TestPlan::total_cells() const {
  int n = 0;
  for (const auto& level : inspections) n += static_cast<int>(level.size());
  return n;
}

double TestPlan::left_edge(int level, int m) const {
  if (m > 0) return inspections[level][m - 1];
  return level > 0 ? change_points[level - 1] : 0.0;
}

int TestPlan::flat_index(int level, int m) const {
  int idx = 0;
  for (int i = 0; i < level; ++i) idx += num_inspections(i);
  return idx + m;
}

int TestPlan::locate(double t) const {
  if (t <= 0.0) throw std::domain_error("locate: t must be positive");
  if (t > termination()) return total_cells();
  for (int i = 0; i < levels(); ++i) {
    for (int m = 0; m < num_inspections(i); ++m) {
      if (t > left_edge(i, m) && t <= inspections[i][m]) {
        return flat_index(i, m);
      }
    }
  }
  // t falls exactly on a change point already covered above; unreachable
  // unless the grid is malformed.
  throw std::invalid_argument("locate: t not covered by inspection grid");
}

void TestPlan::validate() const {
  const int k = levels();
  if (k < 1) throw std::invalid_argument("plan: need at least one stress level");
  if (change_points.size() != static_cast<size_t>(k) ||
      inspections.size() != static_cast<size_t>(k)) {
    throw std::invalid_argument("plan: mismatched level counts");
  }
  double prev = 0.0;
  for (int i = 0; i < k; ++i) {
    if (change_points[i] <= prev) {
      throw std::invalid_argument("plan: change points must be increasing");
    }
    prev = change_points[i];
  }
  if (k > 1 && lag <= 0.0) throw std::invalid_argument("plan: lag must be > 0");
  double last = 0.0;
  for (int i = 0; i < k; ++i) {
    if (inspections[i].empty()) {
      throw std::invalid_argument("plan: every level needs an inspection");
    }
    for (double t : inspections[i]) {
      if (t <= last) {
        throw std::invalid_argument("plan: inspection times must be increasing");
      }
      if (t <= 0.0) throw std::invalid_argument("plan: inspection time at 0");
      last = t;
    }
    if (inspections[i].back() != change_points[i]) {
      throw std::invalid_argument(
          "plan: last inspection of a level must equal its change point");
    }
    if (i > 0 && change_points[i - 1] + lag >= inspections[i][0]) {
      throw std::invalid_argument(
          "plan: lag segment must end before the level's first inspection");
    }
  }
}

Eigen::VectorXd ParamVector::as_vector() const {
  Eigen::VectorXd v(dim());
  v[0] = c0;
  v[1] = c1;
  for (size_t i = 0; i < gammas.size(); ++i) v[2 + i] = gammas[i];
  return v;
}

ParamVector ParamVector::from_vector(const Eigen::VectorXd& v) {
  ParamVector p;
  p.c0 = v[0];
  p.c1 = v[1];
  p.gammas.assign(v.data() + 2, v.data() + v.size());
  return p;
}

bool ParamVector::valid() const {
  if (!std::isfinite(c0) || !std::isfinite(c1)) return false;
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) return false;
  }
  return true;
}

Eigen::VectorXd CellProbs::flat() const {
  int n = 0;
  for (const auto& level : p) n += static_cast<int>(level.size());
  Eigen::VectorXd v(n + 1);
  int idx = 0;
  for (const auto& level : p) {
    for (double x : level) v[idx++] = x;
  }
  v[idx] = p_s;
  return v;
}

double CellProbs::total() const {
  double s = p_s;
  for (const auto& level : p) {
    for (double x : level) s += x;
  }
  return s;
}

long CountData::total_failures() const {
  long s = 0;
  for (const auto& level : counts) {
    for (long c : level) s += c;
  }
  return s;
}

Eigen::VectorXd CountData::flat_fractions() const {
  int n = 0;
  for (const auto& level : counts) n += static_cast<int>(level.size());
  Eigen::VectorXd v(n + 1);
  int idx = 0;
  const double denom = static_cast<double>(total);
  for (const auto& level : counts) {
    for (long c : level) v[idx++] = c / denom;
  }
  v[idx] = survivors / denom;
  return v;
}

void CountData::validate(const TestPlan& plan) const {
  if (counts.size() != static_cast<size_t>(plan.levels())) {
    throw std::invalid_argument("counts: level count mismatch with plan");
  }
  long sum = survivors;
  for (int i = 0; i < plan.levels(); ++i) {
    if (counts[i].size() != static_cast<size_t>(plan.num_inspections(i))) {
      throw std::invalid_argument("counts: inspection grid mismatch with plan");
    }
    for (long c : counts[i]) {
      if (c < 0) throw std::invalid_argument("counts: negative cell count");
      sum += c;
    }
  }
  if (survivors < 0 || total <= 0 || sum != total) {
    throw std::invalid_argument("counts: cells plus survivors must equal n");
  }
}

double lambda_of_stress(double c0, double c1, double x) {
  if (!std::isfinite(c0) || !std::isfinite(c1) || !std::isfinite(x)) {
    throw std::domain_error("lambda_of_stress: non-finite input");
  }
  return lambda_at(ParamVector{c0, c1, {}}, x).value;
}

namespace {

// E^(delta)(tau_l): the extra integrated hazard a lag segment contributes
// relative to running level l+1 from the origin.  Accumulates the gradient
// when grad != nullptr.
double lag_bridge_term(const TestPlan& plan, DistributionKind dist,
                       const ParamVector& theta, int l,
                       Eigen::VectorXd* grad) {
  const double tau = plan.change_points[l];
  const double te = tau + plan.lag;
  const double half = 0.5 * plan.lag;
  const LambdaPair lo = lambda_at(theta, plan.stress[l]);
  const LambdaPair hi = lambda_at(theta, plan.stress[l + 1]);
  const double gl = theta.gammas[l];
  const double gh = theta.gammas[l + 1];

  const double q_lo = q_fn(dist, tau, gl);
  const double q_hi = q_fn(dist, te, gh);
  const double qp_lo = q_dt(dist, tau, gl);
  const double qp_hi = q_dt(dist, te, gh);

  const double value =
      lo.value * q_lo - hi.value * q_hi + half * (lo.value * qp_lo + hi.value * qp_hi);
  if (grad) {
    const double lo_factor = q_lo + half * qp_lo;
    const double hi_factor = -q_hi + half * qp_hi;
    (*grad)[0] += lo.dc0 * lo_factor + hi.dc0 * hi_factor;
    (*grad)[1] += lo.dc1 * lo_factor + hi.dc1 * hi_factor;
    (*grad)[2 + l] += lo.value * (q_dg(dist, tau, gl) + half * q_dt_dg(dist, tau, gl));
    (*grad)[2 + l + 1] +=
        hi.value * (-q_dg(dist, te, gh) + half * q_dt_dg(dist, te, gh));
  }
  return value;
}

// lambda_i * Q(t; gamma_i) with gradient accumulation.
double level_hazard_integral(const TestPlan& plan, DistributionKind dist,
                             const ParamVector& theta, int i, double t,
                             Eigen::VectorXd* grad) {
  const LambdaPair lam = lambda_at(theta, plan.stress[i]);
  const double g = theta.gammas[i];
  const double q = q_fn(dist, t, g);
  if (grad) {
    (*grad)[0] += lam.dc0 * q;
    (*grad)[1] += lam.dc1 * q;
    (*grad)[2 + i] += lam.value * q_dg(dist, t, g);
  }
  return lam.value * q;
}

// Hazard endpoints of the lag segment following tau_{i-1}.
void lag_endpoints(const TestPlan& plan, DistributionKind dist,
                   const ParamVector& theta, int i, double& h0, double& h1) {
  const double tau = plan.change_points[i - 1];
  h0 = lambda_at(theta, plan.stress[i - 1]).value *
       q_dt(dist, tau, theta.gammas[i - 1]);
  h1 = lambda_at(theta, plan.stress[i]).value *
       q_dt(dist, tau + plan.lag, theta.gammas[i]);
}

// Integral of the linear lag hazard from tau_{i-1} to t, t inside the lag.
double lag_partial_integral(const TestPlan& plan, DistributionKind dist,
                            const ParamVector& theta, int i, double t,
                            Eigen::VectorXd* grad) {
  const double tau = plan.change_points[i - 1];
  const double u = t - tau;
  const double w1 = u - u * u / (2.0 * plan.lag);  // d/dh0
  const double w2 = u * u / (2.0 * plan.lag);      // d/dh1
  const double te = tau + plan.lag;
  const LambdaPair lo = lambda_at(theta, plan.stress[i - 1]);
  const LambdaPair hi = lambda_at(theta, plan.stress[i]);
  const double gl = theta.gammas[i - 1];
  const double gh = theta.gammas[i];
  const double qp_lo = q_dt(dist, tau, gl);
  const double qp_hi = q_dt(dist, te, gh);
  const double h0 = lo.value * qp_lo;
  const double h1 = hi.value * qp_hi;
  if (grad) {
    (*grad)[0] += w1 * lo.dc0 * qp_lo + w2 * hi.dc0 * qp_hi;
    (*grad)[1] += w1 * lo.dc1 * qp_lo + w2 * hi.dc1 * qp_hi;
    (*grad)[2 + i - 1] += w1 * lo.value * q_dt_dg(dist, tau, gl);
    (*grad)[2 + i] += w2 * hi.value * q_dt_dg(dist, te, gh);
  }
  return w1 * h0 + w2 * h1;
}

// Integrated hazard up to change point tau_j (j is a 0-based level index).
double cumhaz_at_change_point(const TestPlan& plan, DistributionKind dist,
                              const ParamVector& theta, int j,
                              Eigen::VectorXd* grad) {
  double value = level_hazard_integral(plan, dist, theta, j,
                                       plan.change_points[j], grad);
  for (int l = 0; l < j; ++l) value += lag_bridge_term(plan, dist, theta, l, grad);
  return value;
}

}  // namespace

double crm_hazard(const TestPlan& plan, DistributionKind dist,
                  const ParamVector& theta, double t) {
  if (t <= 0.0) throw std::domain_error("crm_hazard: t must be positive");
  const int k = plan.levels();
  int i = 0;
  while (i < k - 1 && t > plan.change_points[i]) ++i;
  if (i > 0 && t <= plan.change_points[i - 1] + plan.lag) {
    // lag segment: linear interpolation between the bracketing hazards
    double h0, h1;
    lag_endpoints(plan, dist, theta, i, h0, h1);
    const double u = (t - plan.change_points[i - 1]) / plan.lag;
    return h0 + (h1 - h0) * u;
  }
  return lambda_at(theta, plan.stress[i]).value * q_dt(dist, t, theta.gammas[i]);
}

double crm_cumulative_hazard(const TestPlan& plan, DistributionKind dist,
                             const ParamVector& theta, double t,
                             Eigen::VectorXd* grad) {
  if (t <= 0.0) throw std::domain_error("crm_cumulative_hazard: t must be positive");
  if (grad) grad->setZero(plan.param_dim());
  const int k = plan.levels();
  int i = 0;
  while (i < k - 1 && t > plan.change_points[i]) ++i;
  if (i == 0) return level_hazard_integral(plan, dist, theta, 0, t, grad);
  if (t <= plan.change_points[i - 1] + plan.lag) {
    double value = cumhaz_at_change_point(plan, dist, theta, i - 1, grad);
    value += lag_partial_integral(plan, dist, theta, i, t, grad);
    return value;
  }
  double value = level_hazard_integral(plan, dist, theta, i, t, grad);
  for (int l = 0; l < i; ++l) value += lag_bridge_term(plan, dist, theta, l, grad);
  return value;
}

double crm_survival(const TestPlan& plan, DistributionKind dist,
                    const ParamVector& theta, double t) {
  return std::exp(-crm_cumulative_hazard(plan, dist, theta, t));
}

CellProbs cell_probabilities(const TestPlan& plan, DistributionKind dist,
                             const ParamVector& theta) {
  const int k = plan.levels();
  CellProbs probs;
  probs.p.resize(k);

  auto clamp = [&probs](double p) {
    if (p < kProbFloor) {
      probs.clamped = true;
      return kProbFloor;
    }
    return std::min(p, 1.0);
  };

  // Assembled from the closed-form pieces: the lag-segment mass G^(delta),
  // the post-lag first-interval mass G^(1) and the interior masses G^(m),
  // each discounted by the accumulated bridge terms exp(-sum E^(delta)).
  // The bridge sum is kept inside the exponent: the combined exponent equals
  // the integrated hazard at that inspection, which is nonnegative, so the
  // expression cannot hit inf * 0 when a bridge term is large.
  double sum_bridges = 0.0;
  for (int i = 0; i < k; ++i) {
    const int qi = plan.num_inspections(i);
    probs.p[i].resize(qi);
    const LambdaPair lam = lambda_at(theta, plan.stress[i]);
    const double g = theta.gammas[i];
    for (int m = 0; m < qi; ++m) {
      double p;
      if (m == 0 && i == 0) {
        p = -std::expm1(-lam.value * q_fn(dist, plan.inspections[0][0], g));
      } else if (m == 0) {
        const double prefix =
            cumhaz_at_change_point(plan, dist, theta, i - 1, nullptr);
        double h0, h1;
        lag_endpoints(plan, dist, theta, i, h0, h1);
        const double d_delta = 0.5 * plan.lag * (h0 + h1);
        const double g_delta = std::exp(-prefix) * -std::expm1(-d_delta);
        const double te = plan.change_points[i - 1] + plan.lag;
        p = g_delta +
            std::exp(-(sum_bridges + lam.value * q_fn(dist, te, g))) -
            std::exp(-(sum_bridges +
                       lam.value * q_fn(dist, plan.inspections[i][0], g)));
      } else {
        p = std::exp(-(sum_bridges +
                       lam.value * q_fn(dist, plan.inspections[i][m - 1], g))) -
            std::exp(-(sum_bridges +
                       lam.value * q_fn(dist, plan.inspections[i][m], g)));
      }
      probs.p[i][m] = clamp(p);
    }
    if (i + 1 < k) {
      sum_bridges += lag_bridge_term(plan, dist, theta, i, nullptr);
    }
  }
  probs.p_s = clamp(std::exp(-(sum_bridges +
                               lambda_at(theta, plan.stress[k - 1]).value *
                                   q_fn(dist, plan.termination(),
                                        theta.gammas[k - 1]))));
  return probs;
}

Eigen::MatrixXd cell_prob_gradient(const TestPlan& plan, DistributionKind dist,
                                   const ParamVector& theta) {
  if (!theta.valid()) throw std::invalid_argument("cell_prob_gradient: invalid theta");
  const int dim = plan.param_dim();
  const int cells = plan.total_cells();
  Eigen::MatrixXd grads(cells + 1, dim);

  Eigen::VectorXd g_left(dim), g_right(dim);
  int row = 0;
  for (int i = 0; i < plan.levels(); ++i) {
    for (int m = 0; m < plan.num_inspections(i); ++m) {
      const double a = plan.left_edge(i, m);
      double s_left = 1.0;
      g_left.setZero();
      if (a > 0.0) {
        const double ch = crm_cumulative_hazard(plan, dist, theta, a, &g_left);
        s_left = std::exp(-ch);
      }
      const double ch_r =
          crm_cumulative_hazard(plan, dist, theta, plan.inspections[i][m], &g_right);
      const double s_right = std::exp(-ch_r);
      // p = S(a) - S(b), dS = -S dLambda
      grads.row(row++) = (s_right * g_right - s_left * g_left).transpose();
    }
  }
  Eigen::VectorXd g_term(dim);
  const double ch_t =
      crm_cumulative_hazard(plan, dist, theta, plan.termination(), &g_term);
  grads.row(cells) = (-std::exp(-ch_t) * g_term).transpose();
  return grads;
}

double gradient_self_check(const TestPlan& plan, DistributionKind dist,
                           const ParamVector& theta, double step) {
  const Eigen::MatrixXd analytic = cell_prob_gradient(plan, dist, theta);
  const Eigen::VectorXd base = theta.as_vector();
  double worst = 0.0;
  for (int h = 0; h < base.size(); ++h) {
    Eigen::VectorXd up = base, dn = base;
    up[h] += step;
    dn[h] -= step;
    const Eigen::VectorXd p_up =
        cell_probabilities(plan, dist, ParamVector::from_vector(up)).flat();
    const Eigen::VectorXd p_dn =
        cell_probabilities(plan, dist, ParamVector::from_vector(dn)).flat();
    const Eigen::VectorXd fd = (p_up - p_dn) / (2.0 * step);
    for (int r = 0; r < fd.size(); ++r) {
      const double scale = std::max({std::abs(fd[r]), std::abs(analytic(r, h)), 1e-8});
      worst = std::max(worst, std::abs(fd[r] - analytic(r, h)) / scale);
    }
  }
  return worst;
}

}  // namespace oneshot
