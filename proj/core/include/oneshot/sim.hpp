#ifndef ONESHOT_SIM_HPP
#define ONESHOT_SIM_HPP

#include <cstdint>
#include <limits>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oneshot/classical.hpp"

namespace oneshot {

/// One multinomial draw of size n over the plan's cells.  Implemented with
/// uniform draws binned against the cumulative probabilities so results are
/// identical across standard library implementations.
CountData generate_counts(const TestPlan& plan, DistributionKind dist,
                          const ParamVector& theta, long n,
                          std::mt19937_64& rng);

/// Same, but from explicit flat probabilities (failure cells then survival).
CountData generate_counts_from_probs(const TestPlan& plan,
                                     const Eigen::VectorXd& probs, long n,
                                     std::mt19937_64& rng);

struct SimScenario {
  TestPlan plan;
  DistributionKind dist = DistributionKind::Weibull;
  ParamVector theta_true;
  std::optional<ParamVector> theta_contam;
  long n = 100;
  int reps = 1000;
  std::uint64_t seed = 0;
};

/// An estimator takes a dataset and returns a fit; classical entries carry
/// Wald CIs which feed the coverage metrics.
struct Estimator {
  std::string name;
  double alpha = 0.0;    // reporting only
  bool classical = true; // false suppresses CP/AW
  std::function<FitResult(const TestPlan&, DistributionKind,
                          const CountData&)> run;
};

struct MetricRow {
  std::string estimator;
  double alpha = 0.0;
  int param_index = 0;
  double mab = 0.0;
  double mse = 0.0;
  double cp = std::numeric_limits<double>::quiet_NaN();  // percent
  double aw = std::numeric_limits<double>::quiet_NaN();
};

struct MetricTable {
  std::vector<MetricRow> rows;
  int reps = 0;
  std::vector<long> failures;  // per estimator

  std::string to_csv() const;
};

MetricTable run_study(const SimScenario& scenario,
                      const std::vector<Estimator>& estimators);

struct BootstrapSummary {
  std::vector<double> bias;
  std::vector<double> rmse;
  long failures = 0;
};

BootstrapSummary bootstrap_bias_rmse(const TestPlan& plan,
                                     DistributionKind dist,
                                     const CountData& counts,
                                     const Estimator& estimator, int b,
                                     std::uint64_t seed);

}  // namespace oneshot

#endif
