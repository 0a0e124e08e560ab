#ifndef ONESHOT_CONFIG_HPP
#define ONESHOT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oneshot/bayes.hpp"
#include "oneshot/classical.hpp"
#include "oneshot/testing.hpp"

namespace oneshot {

/// Thrown on malformed configuration or dataset input; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  TestPlan plan;                 // already time-scaled
  double time_scale = 1.0;
  DistributionKind dist = DistributionKind::Weibull;

  std::optional<std::string> data_file;
  std::optional<CountData> inline_data;

  std::vector<double> alphas;    // classical fits / tuning grid
  FitConfig fit_config;

  // bayes section
  PriorKind prior = PriorKind::Flat;
  double sigma2_p = 0.05;
  bool prior_level_scaled_denominator = true;
  double bayes_alpha = 0.2;
  HmcConfig hmc;

  // test section
  std::optional<HypothesisSpec> hypothesis;
  int bootstrap_b = 1000;

  // sim section
  std::optional<ParamVector> sim_theta_true;
  std::optional<ParamVector> sim_theta_contam;
  long sim_n = 100;
  int sim_reps = 1000;
  std::uint64_t sim_seed = 0;
  bool sim_include_rbe = false;

  std::string base_dir;          // directory of the config file
};

/// Parses and validates a JSON config document.  Unknown keys anywhere in
/// the document are rejected.
RunConfig parse_config(const std::string& json_text,
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Loads a dataset file against the (scaled) plan grid.  Raw format: one
/// failure time per line (raw units, scaled on load) plus a final
/// "survivors N" line; JSON format: {"counts": [[...]...], "survivors": N}.
CountData load_dataset(const std::string& path, const TestPlan& plan,
                       double time_scale);

/// Resolves the config's dataset (inline counts or file).
CountData resolve_data(const RunConfig& config);

/// Runs one CLI command; writes artifacts under out_dir and a summary to
/// stdout.  Returns 0 on success, 2 on config errors, 3 on numerical
/// failure.
int dispatch(const std::string& command, const std::string& config_path,
             std::optional<std::uint64_t> seed_override,
             const std::string& out_dir, bool verbose);

}  // namespace oneshot

#endif
