#include "oneshot/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oneshot {

namespace {

// order-independent compensated accumulator
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

CountData generate_counts_from_probs(const TestPlan& plan,
                                     const Eigen::VectorXd& probs, long n,
                                     std::mt19937_64& rng) {
  const int cells = plan.total_cells();
  if (probs.size() != cells + 1) {
    throw std::invalid_argument("generate_counts: probability size mismatch");
  }
  // cumulative bins; the last edge is forced to 1 so survival absorbs any
  // round-off in the tail
  std::vector<double> edges(cells + 1);
  double acc = 0.0;
  for (int r = 0; r < cells; ++r) {
    acc += probs[r];
    edges[r] = acc;
  }
  edges[cells] = 1.0;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<long> flat(cells + 1, 0);
  for (long u = 0; u < n; ++u) {
    const double x = unif(rng);
    const auto it = std::lower_bound(edges.begin(), edges.end(), x);
    ++flat[it - edges.begin()];
  }

  CountData data;
  data.counts.resize(plan.levels());
  for (int i = 0; i < plan.levels(); ++i) {
    data.counts[i].resize(plan.num_inspections(i));
    for (int m = 0; m < plan.num_inspections(i); ++m) {
      data.counts[i][m] = flat[plan.flat_index(i, m)];
    }
  }
  data.survivors = flat[cells];
  data.total = n;
  return data;
}

CountData generate_counts(const TestPlan& plan, DistributionKind dist,
                          const ParamVector& theta, long n,
                          std::mt19937_64& rng) {
  if (n < 0) throw std::invalid_argument("generate_counts: negative n");
  const Eigen::VectorXd p = cell_probabilities(plan, dist, theta).flat();
  return generate_counts_from_probs(plan, p, n, rng);
}

std::string MetricTable::to_csv() const {
  std::ostringstream os;
  os << "estimator,alpha,parameter,MAB,MSE,CP,AW,reps,failures\n";
  os.precision(10);
  // rows are grouped by estimator in insertion order
  int est = -1;
  std::string last;
  for (const auto& r : rows) {
    if (r.estimator != last || est < 0) {
      ++est;
      last = r.estimator;
    }
    os << r.estimator << ',' << r.alpha << ',' << r.param_index << ','
       << r.mab << ',' << r.mse << ',';
    if (std::isnan(r.cp)) os << "NA";
    else os << r.cp;
    os << ',';
    if (std::isnan(r.aw)) os << "NA";
    else os << r.aw;
    os << ',' << reps << ',' << failures[est] << '\n';
  }
  return os.str();
}

MetricTable run_study(const SimScenario& scenario,
                      const std::vector<Estimator>& estimators) {
  if (estimators.empty()) {
    throw std::invalid_argument("run_study: no estimators");
  }
  if (scenario.reps < 1 || scenario.n < 1) {
    throw std::invalid_argument("run_study: reps and n must be positive");
  }
  scenario.plan.validate();

  const ParamVector& gen_theta = scenario.theta_contam
                                     ? *scenario.theta_contam
                                     : scenario.theta_true;
  const Eigen::VectorXd truth = scenario.theta_true.as_vector();
  const int dim = scenario.plan.param_dim();
  const int ne = static_cast<int>(estimators.size());

  std::vector<std::vector<KahanSum>> abs_err(ne), sq_err(ne), width(ne);
  std::vector<std::vector<long>> covered(ne);
  std::vector<long> used(ne, 0), failed(ne, 0), ci_used(ne, 0);
  for (int e = 0; e < ne; ++e) {
    abs_err[e].resize(dim);
    sq_err[e].resize(dim);
    width[e].resize(dim);
    covered[e].assign(dim, 0);
  }

  for (int rep = 0; rep < scenario.reps; ++rep) {
    std::mt19937_64 rng(scenario.seed + 0x9e3779b97f4a7c15ULL * (rep + 1));
    const CountData data =
        generate_counts(scenario.plan, scenario.dist, gen_theta, scenario.n, rng);
    for (int e = 0; e < ne; ++e) {
      FitResult fr;
      try {
        fr = estimators[e].run(scenario.plan, scenario.dist, data);
      } catch (const std::exception&) {
        ++failed[e];
        if (failed[e] * 10 > scenario.reps) {
          throw NumericalError("run_study: estimator '" + estimators[e].name +
                               "' failed on more than 10% of replicates");
        }
        continue;
      }
      ++used[e];
      const Eigen::VectorXd est = fr.theta.as_vector();
      for (int j = 0; j < dim; ++j) {
        abs_err[e][j].add(std::abs(est[j] - truth[j]));
        sq_err[e][j].add((est[j] - truth[j]) * (est[j] - truth[j]));
      }
      if (estimators[e].classical && fr.ci.size() == static_cast<size_t>(dim)) {
        ++ci_used[e];
        for (int j = 0; j < dim; ++j) {
          if (fr.ci[j].first <= truth[j] && truth[j] <= fr.ci[j].second) {
            ++covered[e][j];
          }
          width[e][j].add(fr.ci[j].second - fr.ci[j].first);
        }
      }
    }
  }

  MetricTable table;
  table.reps = scenario.reps;
  table.failures = failed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int e = 0; e < ne; ++e) {
    if (used[e] == 0) {
      throw NumericalError("run_study: estimator '" + estimators[e].name +
                           "' never succeeded");
    }
    for (int j = 0; j < dim; ++j) {
      MetricRow row;
      row.estimator = estimators[e].name;
      row.alpha = estimators[e].alpha;
      row.param_index = j;
      row.mab = abs_err[e][j].sum / used[e];
      row.mse = sq_err[e][j].sum / used[e];
      if (estimators[e].classical && ci_used[e] > 0) {
        row.cp = 100.0 * covered[e][j] / static_cast<double>(ci_used[e]);
        row.aw = width[e][j].sum / ci_used[e];
      } else {
        row.cp = nan;
        row.aw = nan;
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

BootstrapSummary bootstrap_bias_rmse(const TestPlan& plan,
                                     DistributionKind dist,
                                     const CountData& counts,
                                     const Estimator& estimator, int b,
                                     std::uint64_t seed) {
  if (b < 100) {
    throw std::invalid_argument(
        "bootstrap_bias_rmse: need at least 100 replicates");
  }
  const FitResult base = estimator.run(plan, dist, counts);
  const Eigen::VectorXd center = base.theta.as_vector();
  const Eigen::VectorXd p = cell_probabilities(plan, dist, base.theta).flat();
  const int dim = plan.param_dim();

  std::vector<KahanSum> err(dim), sq(dim);
  long used = 0, failed = 0;
  for (int rep = 0; rep < b; ++rep) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (rep + 1));
    const CountData sample =
        generate_counts_from_probs(plan, p, counts.total, rng);
    FitResult fr;
    try {
      fr = estimator.run(plan, dist, sample);
    } catch (const std::exception&) {
      ++failed;
      if (failed * 10 > b) {
        throw NumericalError(
            "bootstrap_bias_rmse: more than 10% of refits failed");
      }
      continue;
    }
    ++used;
    const Eigen::VectorXd est = fr.theta.as_vector();
    for (int j = 0; j < dim; ++j) {
      err[j].add(est[j] - center[j]);
      sq[j].add((est[j] - center[j]) * (est[j] - center[j]));
    }
  }
  if (used == 0) throw NumericalError("bootstrap_bias_rmse: no usable refits");

  BootstrapSummary out;
  out.failures = failed;
  out.bias.resize(dim);
  out.rmse.resize(dim);
  for (int j = 0; j < dim; ++j) {
    out.bias[j] = err[j].sum / used;
    out.rmse[j] = std::sqrt(sq[j].sum / used);
  }
  return out;
}

}  // namespace oneshot
