#ifndef ONESHOT_TEST_HELPERS_HPP
#define ONESHOT_TEST_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "oneshot/model.hpp"

namespace oneshot::test {

// three-level plan used throughout the simulation studies
inline TestPlan three_level_plan() {
  TestPlan plan;
  plan.stress = {1.5, 2.5, 3.5};
  plan.change_points = {3.0, 6.0, 9.0};
  plan.inspections = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}, {7.0, 8.0, 9.0}};
  plan.lag = 0.001;
  return plan;
}

inline ParamVector weibull_truth() {
  ParamVector t;
  t.c0 = 0.03;
  t.c1 = -0.08;
  t.gammas = {0.1, 0.2, 0.3};
  return t;
}

inline ParamVector gompertz_truth() {
  ParamVector t;
  t.c0 = 0.8;
  t.c1 = -0.1;
  t.gammas = {0.1, 0.2, 0.2};
  return t;
}

// two-level plan matching the bundled light bulb experiment, scale applied
inline TestPlan bulb_plan(double scale) {
  TestPlan plan;
  plan.stress = {2.25, 2.44};
  plan.change_points = {96.0 * scale, 140.0 * scale};
  plan.inspections = {{32.0 * scale, 64.0 * scale, 96.0 * scale},
                      {111.0 * scale, 126.0 * scale, 140.0 * scale}};
  plan.lag = 0.001;
  return plan;
}

inline CountData bulb_counts() {
  CountData d;
  d.counts = {{13, 12, 9}, {6, 8, 5}};
  d.survivors = 11;
  d.total = 64;
  return d;
}

// adaptive Simpson on [a, b]
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double fa, double b, double fb, double fm,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson_rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, fm, whole, tol, 40);
}

// P(a < T <= b) via quadrature of S(t) h(t), split at every kink
inline double cell_prob_quadrature(const TestPlan& plan, DistributionKind dist,
                                   const ParamVector& theta, double a,
                                   double b) {
  std::vector<double> cuts = {a};
  for (size_t i = 0; i + 1 < plan.change_points.size(); ++i) {
    for (double edge :
         {plan.change_points[i], plan.change_points[i] + plan.lag}) {
      if (edge > a && edge < b) cuts.push_back(edge);
    }
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const auto density = [&](double t) {
    return crm_survival(plan, dist, theta, t) * crm_hazard(plan, dist, theta, t);
  };
  double total = 0.0;
  for (size_t j = 0; j + 1 < cuts.size(); ++j) {
    if (cuts[j] == 0.0) {
      // substitute t = s^k so the integrand stays finite when the hazard
      // blows up (or vanishes steeply) at the origin
      const double g1 = theta.gammas[0];
      const double k = dist == DistributionKind::Weibull
                           ? std::max(2.0, 2.5 / g1)
                           : 2.0;
      const auto sub = [&](double s) {
        const double t = std::pow(s, k);
        if (t <= 1e-250) return 0.0;
        return density(t) * k * std::pow(s, k - 1.0);
      };
      total += integrate(sub, 0.0, std::pow(cuts[j + 1], 1.0 / k));
    } else {
      total += integrate(density, cuts[j], cuts[j + 1]);
    }
  }
  return total;
}

inline TestPlan random_plan(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> levels_d(2, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TestPlan plan;
  const int k = levels_d(rng);
  double t = 0.0;
  for (int i = 0; i < k; ++i) {
    plan.stress.push_back(0.5 + 2.5 * u(rng));
    const int q = 1 + static_cast<int>(u(rng) * 3);
    std::vector<double> insp;
    for (int m = 0; m < q; ++m) {
      t += 0.3 + 2.0 * u(rng);
      insp.push_back(t);
    }
    plan.inspections.push_back(insp);
    plan.change_points.push_back(t);
  }
  plan.lag = 1e-4 + 0.05 * u(rng);
  return plan;
}

// Gompertz shapes stay small so exp(gamma t) curvature does not swamp
// finite difference oracles over multi-unit time grids
inline ParamVector random_theta(std::mt19937_64& rng, int levels,
                                DistributionKind dist = DistributionKind::Weibull) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParamVector theta;
  theta.c0 = -1.0 + 2.0 * u(rng);
  theta.c1 = -0.5 + 1.0 * u(rng);
  const double lo = dist == DistributionKind::Weibull ? 0.1 : 0.05;
  const double hi = dist == DistributionKind::Weibull ? 1.3 : 0.3;
  for (int i = 0; i < levels; ++i)
    theta.gammas.push_back(lo + (hi - lo) * u(rng));
  return theta;
}

}  // namespace oneshot::test

#endif
