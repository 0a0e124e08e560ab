#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oneshot/robustness.hpp"

using namespace oneshot;
using namespace oneshot::test;

namespace {

// dpd gradient with an arbitrary reference vector e in place of the data
Eigen::VectorXd dpd_grad_at(const TestPlan& plan, DistributionKind dist,
                            const Eigen::VectorXd& theta_v,
                            const Eigen::VectorXd& e, double alpha) {
  const ParamVector theta = ParamVector::from_vector(theta_v);
  const Eigen::VectorXd p = cell_probabilities(plan, dist, theta).flat();
  const Eigen::MatrixXd grads = cell_prob_gradient(plan, dist, theta);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta_v.size());
  for (int r = 0; r < p.size(); ++r) {
    g += (alpha + 1.0) * (p[r] - e[r]) * std::pow(p[r], alpha - 1.0) *
         grads.row(r).transpose();
  }
  return g;
}

// Newton solve of the stationarity condition for the contaminated target
Eigen::VectorXd dpd_minimizer(const TestPlan& plan, DistributionKind dist,
                              const Eigen::VectorXd& start,
                              const Eigen::VectorXd& e, double alpha) {
  Eigen::VectorXd x = start;
  const int dim = static_cast<int>(x.size());
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXd g = dpd_grad_at(plan, dist, x, e, alpha);
    if (g.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::MatrixXd jac(dim, dim);
    const double h = 1e-6;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      jac.col(j) = (dpd_grad_at(plan, dist, xp, e, alpha) -
                    dpd_grad_at(plan, dist, xm, e, alpha)) /
                   (2.0 * h);
    }
    x -= jac.fullPivLu().solve(g);
  }
  return x;
}

}  // namespace

TEST_CASE("influence is a step function of contamination time") {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = weibull_truth();
  const Eigen::VectorXd a =
      if_mdpde(plan, DistributionKind::Weibull, theta, 0.5, 1.2);
  const Eigen::VectorXd b =
      if_mdpde(plan, DistributionKind::Weibull, theta, 0.5, 1.9);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // same cell (1, 2]
  const Eigen::VectorXd c =
      if_mdpde(plan, DistributionKind::Weibull, theta, 0.5, 2.1);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  const Eigen::VectorXd surv =
      if_mdpde(plan, DistributionKind::Weibull, theta, 0.5, 100.0);
  CHECK((surv -
         if_mdpde_cell(plan, DistributionKind::Weibull, theta, 0.5,
                       plan.total_cells()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("influence averages to zero under the model") {
  // fixed plans with a real stress spread; an arbitrary random plan can
  // make J numerically singular, which is a conditioning issue rather
  // than a property of the influence function
  std::mt19937_64 rng(55);
  TestPlan two_level;
  two_level.stress = {1.0, 3.0};
  two_level.change_points = {2.0, 4.0};
  two_level.inspections = {{0.5, 1.0, 1.5, 2.0}, {2.5, 3.0, 3.5, 4.0}};
  two_level.lag = 0.001;
  for (int rep = 0; rep < 5; ++rep) {
    const TestPlan plan = rep % 2 == 0 ? three_level_plan() : two_level;
    const ParamVector theta = random_theta(rng, plan.levels());
    for (double alpha : {0.3, 0.8}) {
      const Eigen::VectorXd p =
          cell_probabilities(plan, DistributionKind::Weibull, theta).flat();
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(plan.param_dim());
      for (int cell = 0; cell <= plan.total_cells(); ++cell) {
        mean += p[cell] *
                if_mdpde_cell(plan, DistributionKind::Weibull, theta, alpha, cell);
      }
      CHECK(mean.cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("influence matches the finite contamination limit") {
  // two-level plan keeps the Newton oracle cheap
  TestPlan plan;
  plan.stress = {1.0, 2.0};
  plan.change_points = {2.0, 4.0};
  plan.inspections = {{1.0, 2.0}, {3.0, 4.0}};
  plan.lag = 0.01;
  ParamVector theta;
  theta.c0 = -0.4;
  theta.c1 = 0.2;
  theta.gammas = {0.8, 1.1};
  const double alpha = 0.5;
  const Eigen::VectorXd p =
      cell_probabilities(plan, DistributionKind::Weibull, theta).flat();
  const double eps = 1e-4;
  for (int cell : {0, 2, plan.total_cells()}) {
    Eigen::VectorXd contaminated = (1.0 - eps) * p;
    contaminated[cell] += eps;
    const Eigen::VectorXd shifted = dpd_minimizer(
        plan, DistributionKind::Weibull, theta.as_vector(), contaminated, alpha);
    const Eigen::VectorXd numeric = (shifted - theta.as_vector()) / eps;
    const Eigen::VectorXd analytic =
        if_mdpde_cell(plan, DistributionKind::Weibull, theta, alpha, cell);
    CHECK((numeric - analytic).norm() / analytic.norm() < 0.01);
  }
}

TEST_CASE("influence input validation") {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = weibull_truth();
  CHECK_THROWS_AS(
      if_mdpde_cell(plan, DistributionKind::Weibull, theta, 0.0, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      if_mdpde_cell(plan, DistributionKind::Weibull, theta, 0.5, -1),
      std::invalid_argument);
  CHECK_THROWS_AS(
      if_mdpde_cell(plan, DistributionKind::Weibull, theta, 0.5,
                    plan.total_cells() + 1),
      std::invalid_argument);
}

TEST_CASE("gross error sensitivity dominates every cell") {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = weibull_truth();
  const double worst =
      gross_error_sensitivity(plan, DistributionKind::Weibull, theta, 0.4);
  CHECK(worst > 0.0);
  for (int cell = 0; cell <= plan.total_cells(); ++cell) {
    CHECK(if_mdpde_cell(plan, DistributionKind::Weibull, theta, 0.4, cell)
              .norm() <= worst + 1e-12);
  }
}

TEST_CASE("posterior mean influence from a two point posterior") {
  const TestPlan plan = three_level_plan();
  ParamVector ta = weibull_truth();
  ParamVector tb = weibull_truth();
  tb.c0 += 0.2;
  tb.gammas[1] += 0.1;
  Eigen::MatrixXd m(200, plan.param_dim());
  for (int r = 0; r < 100; ++r) m.row(r) = ta.as_vector().transpose();
  for (int r = 100; r < 200; ++r) m.row(r) = tb.as_vector().transpose();
  PosteriorChains chains;
  chains.draws.push_back(m);

  const double alpha = 0.4;
  const int cell = 3;
  const auto score = [&](const ParamVector& th) {
    const Eigen::VectorXd p =
        cell_probabilities(plan, DistributionKind::Weibull, th).flat();
    double s = 0.0;
    for (int r = 0; r < p.size(); ++r) {
      const double delta = r == cell ? 1.0 : 0.0;
      s += (delta - p[r]) * std::pow(p[r], alpha);
    }
    return s / alpha;
  };
  // covariance of an even two point mixture in closed form
  const Eigen::VectorXd expected = 0.25 * (score(ta) - score(tb)) *
                                   (ta.as_vector() - tb.as_vector());
  const Eigen::VectorXd got =
      if_rbe_cell(plan, DistributionKind::Weibull, alpha, cell, chains);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);

  // a degenerate posterior cannot be influenced
  Eigen::MatrixXd flat(200, plan.param_dim());
  for (int r = 0; r < 200; ++r) flat.row(r) = ta.as_vector().transpose();
  PosteriorChains degenerate;
  degenerate.draws.push_back(flat);
  const Eigen::VectorXd zero =
      if_rbe_cell(plan, DistributionKind::Weibull, alpha, cell, degenerate);
  CHECK(zero.cwiseAbs().maxCoeff() < 1e-12);

  PosteriorChains thin;
  thin.draws.push_back(Eigen::MatrixXd(m.topRows(50)));
  CHECK_THROWS_AS(
      if_rbe_cell(plan, DistributionKind::Weibull, alpha, cell, thin),
      std::invalid_argument);
  CHECK_THROWS_AS(
      if_rbe_cell(plan, DistributionKind::Weibull, 0.0, cell, chains),
      std::invalid_argument);
}

TEST_CASE("test influence vanishes when both hypotheses coincide") {
  const TestPlan plan = three_level_plan();
  HypothesisSpec hyp;
  hyp.theta0 = weibull_truth();
  hyp.ball_radius = 0.05;
  const Eigen::VectorXd center = weibull_truth().as_vector();
  const auto sampler = [center](std::uint64_t s) {
    std::mt19937_64 rng(1234);  // seed ignored on purpose
    (void)s;
    std::normal_distribution<double> g(0.0, 0.01);
    Eigen::MatrixXd m(300, center.size());
    for (int r = 0; r < m.rows(); ++r) {
      for (int j = 0; j < center.size(); ++j) m(r, j) = center[j] + g(rng);
    }
    return m;
  };
  const double inf = if_bayes_factor_cell(plan, DistributionKind::Weibull, 0.4,
                                          hyp, 100, 2, sampler, sampler, 5);
  CHECK(inf == 0.0);
}

TEST_CASE("test influence is finite for separated hypothesis supports") {
  const TestPlan plan = three_level_plan();
  HypothesisSpec hyp;
  hyp.theta0 = weibull_truth();
  hyp.ball_radius = 0.05;
  const Eigen::VectorXd center = weibull_truth().as_vector();
  const auto make_sampler = [center](double shift, std::uint64_t base) {
    return [center, shift, base](std::uint64_t s) {
      std::mt19937_64 rng(base + s);
      std::normal_distribution<double> g(0.0, 0.01);
      Eigen::MatrixXd m(400, center.size());
      for (int r = 0; r < m.rows(); ++r) {
        for (int j = 0; j < center.size(); ++j) {
          m(r, j) = center[j] + shift + g(rng);
        }
        // keep the growth parameters positive
        for (int j = 2; j < center.size(); ++j) {
          m(r, j) = std::max(m(r, j), 0.01);
        }
      }
      return m;
    };
  };
  const double inf = if_bayes_factor_cell(
      plan, DistributionKind::Weibull, 0.4, hyp, 100, 2,
      make_sampler(0.0, 10), make_sampler(0.25, 20), 5);
  CHECK(std::isfinite(inf));

  // a sample size far beyond the spread collapses the importance weights
  CHECK_THROWS_AS(if_bayes_factor_cell(plan, DistributionKind::Weibull, 0.4,
                                       hyp, 5000000, 2, make_sampler(0.0, 10),
                                       make_sampler(0.6, 20), 5),
                  NumericalError);
  CHECK_THROWS_AS(if_bayes_factor_cell(plan, DistributionKind::Weibull, 0.0,
                                       hyp, 100, 2, make_sampler(0.0, 10),
                                       make_sampler(0.25, 20), 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(if_bayes_factor_cell(plan, DistributionKind::Weibull, 0.4,
                                       hyp, 0, 2, make_sampler(0.0, 10),
                                       make_sampler(0.25, 20), 5),
                  std::invalid_argument);
}
