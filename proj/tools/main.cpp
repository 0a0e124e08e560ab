// command line front end for step-stress one-shot device analysis

#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oneshot/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robust inference for one-shot device step-stress tests"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;

  const bool verbose = std::getenv("ONESHOT_VERBOSE") != nullptr;

  const char* commands[] = {"simulate", "fit",       "tune", "bayes",
                            "gof",      "bf",        "influence"};
  const char* blurbs[] = {
      "Monte Carlo study of the configured estimators",
      "Maximum likelihood and minimum density power divergence fits",
      "Tuning parameter selection over the configured grid",
      "Pseudo-posterior sampling: point estimates and HPD intervals",
      "Bootstrap goodness-of-fit test",
      "Empirical Bayes factor for the configured hypothesis",
      "Influence function diagnostics by inspection cell"};
  for (size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], blurbs[i]);
    sub->add_option("--config", config_path, "JSON configuration file")
        ->required();
    sub->add_option("--seed", seed, "Override the configured RNG seed");
    sub->add_option("--out", out_dir, "Output directory for artifacts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  return oneshot::dispatch(app.get_subcommands().front()->get_name(),
                           config_path, seed, out_dir, verbose);
}
