#include "oneshot/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "oneshot/robustness.hpp"
#include "oneshot/sim.hpp"

namespace oneshot {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError("config: '" + where + "' must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError(std::string("config: '") + key + "' must be a number");
  }
  return obj[key].get<double>();
}

std::vector<double> get_vec(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_array()) {
    throw ConfigError(std::string("config: '") + key +
                      "' must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) {
      throw ConfigError(std::string("config: '") + key +
                        "' must contain only numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

ParamVector theta_from_array(const std::vector<double>& v,
                             const std::string& where) {
  if (v.size() < 3) {
    throw ConfigError("config: '" + where +
                      "' needs at least (c0, c1, gamma_1)");
  }
  ParamVector theta;
  theta.c0 = v[0];
  theta.c1 = v[1];
  theta.gammas.assign(v.begin() + 2, v.end());
  return theta;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_estimator(double alpha) {
  if (alpha <= 0.0) return "MLE";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "MDPDE(%.2f)", alpha);
  return buf;
}

Estimator make_classical(double alpha, const FitConfig& base) {
  Estimator e;
  e.name = format_estimator(alpha);
  e.alpha = alpha;
  e.classical = true;
  FitConfig cfg = base;
  cfg.alpha = alpha;
  e.run = [cfg](const TestPlan& plan, DistributionKind dist,
                const CountData& data) { return fit(plan, dist, data, cfg); };
  return e;
}

PosteriorChains run_hmc(const RunConfig& config, const CountData& data,
                        const PriorSpec& prior) {
  FitConfig init_cfg = config.fit_config;
  init_cfg.alpha = config.bayes_alpha;
  init_cfg.compute_covariance = false;
  const FitResult start = fit(config.plan, config.dist, data, init_cfg);
  const LogDensity target = make_pseudo_posterior(
      config.plan, config.dist, data, config.bayes_alpha, prior);
  PosteriorChains chains =
      hmc_sample(target, start.theta.as_vector(), config.hmc);
  chains.alpha = config.bayes_alpha;
  chains.prior = prior.kind;
  return chains;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write: " + path.string());
  out << text;
}

int cmd_fit(const RunConfig& config, const CountData& data,
            const fs::path& out_dir) {
  std::vector<double> alphas = config.alphas;
  alphas.insert(alphas.begin(), 0.0);  // MLE row first

  std::ostringstream csv;
  csv << "estimator,alpha,parameter,estimate,stderr,ci_low,ci_high\n";
  csv.precision(6);
  csv << std::fixed;
  json report = json::array();
  for (double a : alphas) {
    FitConfig cfg = config.fit_config;
    cfg.alpha = a;
    const FitResult fr = fit(config.plan, config.dist, data, cfg);
    const Eigen::VectorXd est = fr.theta.as_vector();
    json entry;
    entry["estimator"] = format_estimator(a);
    entry["alpha"] = a;
    entry["estimate"] = std::vector<double>(est.data(), est.data() + est.size());
    entry["objective"] = fr.objective;
    entry["iterations"] = fr.iterations;
    entry["converged"] = fr.converged;
    for (int j = 0; j < est.size(); ++j) {
      csv << format_estimator(a) << ',' << a << ',' << j << ',' << est[j] << ',';
      if (fr.covariance) {
        csv << std::sqrt(std::max(0.0, (*fr.covariance)(j, j))) << ','
            << fr.ci[j].first << ',' << fr.ci[j].second;
      } else {
        csv << "NA,NA,NA";
      }
      csv << '\n';
    }
    report.push_back(entry);
    std::cout << entry["estimator"].get<std::string>() << ":";
    for (int j = 0; j < est.size(); ++j) std::cout << ' ' << est[j];
    std::cout << '\n';
  }
  write_text(out_dir / "fits.csv", csv.str());
  write_text(out_dir / "fits.json", report.dump(2) + "\n");
  return 0;
}

int cmd_tune(const RunConfig& config, const CountData& data,
             const fs::path& out_dir) {
  if (config.alphas.empty()) {
    throw ConfigError("tune: 'classical.alpha' grid is required");
  }
  const TuningResult res = select_tuning(config.plan, config.dist, data,
                                         config.fit_config, config.alphas,
                                         0.5, 0.5);
  std::ostringstream csv;
  csv << "alpha,phi\n";
  csv.precision(6);
  csv << std::fixed;
  for (size_t i = 0; i < res.grid.size(); ++i) {
    csv << res.grid[i] << ',';
    if (std::isnan(res.phi[i])) csv << "NA";
    else csv << res.phi[i];
    csv << '\n';
  }
  write_text(out_dir / "tuning.csv", csv.str());
  std::cout << "alpha_opt=" << res.alpha_opt << '\n';
  return 0;
}

int cmd_bayes(const RunConfig& config, const CountData& data,
              const fs::path& out_dir) {
  const PriorSpec prior = make_prior(config.prior, config.plan, data,
                                     config.sigma2_p,
                                     config.prior_level_scaled_denominator);
  const PosteriorChains chains = run_hmc(config, data, prior);
  const Eigen::VectorXd est = rbe(chains);

  std::ostringstream csv;
  csv << "parameter,rbe,hpd_low,hpd_high\n";
  csv.precision(6);
  csv << std::fixed;
  for (int j = 0; j < est.size(); ++j) {
    const auto [lo, hi] = hpd_interval(chains, j, 0.95);
    csv << j << ',' << est[j] << ',' << lo << ',' << hi << '\n';
  }
  write_text(out_dir / "posterior.csv", csv.str());

  std::cout << "RBE:";
  for (int j = 0; j < est.size(); ++j) std::cout << ' ' << est[j];
  std::cout << "\nacceptance:";
  for (double a : chains.acceptance_rate) std::cout << ' ' << a;
  std::cout << '\n';
  return 0;
}

int cmd_gof(const RunConfig& config, const CountData& data,
            const fs::path& out_dir, std::uint64_t seed) {
  const GofResult res = gof_bootstrap(config.plan, config.dist, data,
                                      config.bootstrap_b, seed,
                                      config.fit_config);
  std::ostringstream line;
  line.precision(6);
  line << std::fixed << "TS=" << res.ts << " p=" << res.p_value << '\n';
  std::cout << line.str();
  write_text(out_dir / "gof.txt", line.str());
  return 0;
}

int cmd_bf(const RunConfig& config, const CountData& data,
           const fs::path& out_dir, std::uint64_t seed) {
  if (!config.hypothesis) {
    throw ConfigError("bf: 'test' section with theta0 is required");
  }
  const HypothesisSpec& hyp = *config.hypothesis;
  const PriorSpec prior = make_prior(config.prior, config.plan, data,
                                     config.sigma2_p,
                                     config.prior_level_scaled_denominator);
  const PosteriorChains chains = run_hmc(config, data, prior);

  BfResult res;
  if (config.prior == PriorKind::Flat) {
    res = bayes_factor_empirical(chains, hyp.rho0 / (1.0 - hyp.rho0), hyp);
  } else {
    const auto sampler = [&](std::uint64_t s) {
      const auto logp = [&](const Eigen::VectorXd& v) {
        return log_prior_density(prior, config.plan, config.dist,
                                 ParamVector::from_vector(v));
      };
      return sample_mh(logp, hyp.theta0.as_vector(), 20000, 2000, 0.02, s);
    };
    res = bayes_factor_empirical(chains, sampler, hyp, seed);
  }

  std::ostringstream line;
  line.precision(6);
  line << std::fixed;
  if (res.censored) {
    line << "prior_odds=" << res.prior_odds << " posterior_odds=0 BF01<"
         << res.bf01_bound << " category=" << bf_category_name(res.category)
         << '\n';
  } else {
    line << "prior_odds=" << res.prior_odds
         << " posterior_odds=" << res.posterior_odds << " BF01=" << res.bf01
         << " category=" << bf_category_name(res.category) << '\n';
  }
  std::cout << line.str();
  write_text(out_dir / "bf.txt", line.str());
  return 0;
}

int cmd_influence(const RunConfig& config, const CountData& data,
                  const fs::path& out_dir) {
  const double alpha =
      !config.alphas.empty() ? config.alphas.front() : config.bayes_alpha;
  if (!(alpha > 0.0)) {
    throw ConfigError("influence: a positive alpha is required");
  }
  FitConfig cfg = config.fit_config;
  cfg.alpha = alpha;
  cfg.compute_covariance = false;
  const FitResult fr = fit(config.plan, config.dist, data, cfg);

  std::ostringstream csv;
  csv << "cell,level,inspection";
  for (int j = 0; j < config.plan.param_dim(); ++j) csv << ",if_" << j;
  csv << ",norm\n";
  csv.precision(6);
  csv << std::fixed;
  for (int i = 0; i < config.plan.levels(); ++i) {
    for (int m = 0; m < config.plan.num_inspections(i); ++m) {
      const int cell = config.plan.flat_index(i, m);
      const Eigen::VectorXd v =
          if_mdpde_cell(config.plan, config.dist, fr.theta, alpha, cell);
      csv << cell << ',' << i << ',' << m;
      for (int j = 0; j < v.size(); ++j) csv << ',' << v[j];
      csv << ',' << v.norm() << '\n';
    }
  }
  const Eigen::VectorXd vs = if_mdpde_cell(config.plan, config.dist, fr.theta,
                                           alpha, config.plan.total_cells());
  csv << config.plan.total_cells() << ",survival,-";
  for (int j = 0; j < vs.size(); ++j) csv << ',' << vs[j];
  csv << ',' << vs.norm() << '\n';
  write_text(out_dir / "influence.csv", csv.str());
  std::cout << "gross_error_sensitivity="
            << gross_error_sensitivity(config.plan, config.dist, fr.theta,
                                       alpha)
            << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& config, const fs::path& out_dir,
                 std::uint64_t seed) {
  if (!config.sim_theta_true) {
    throw ConfigError("simulate: 'sim.theta_true' is required");
  }
  SimScenario scenario;
  scenario.plan = config.plan;
  scenario.dist = config.dist;
  scenario.theta_true = *config.sim_theta_true;
  scenario.theta_contam = config.sim_theta_contam;
  scenario.n = config.sim_n;
  scenario.reps = config.sim_reps;
  scenario.seed = seed;

  std::vector<Estimator> estimators;
  estimators.push_back(make_classical(0.0, config.fit_config));
  for (double a : config.alphas) {
    estimators.push_back(make_classical(a, config.fit_config));
  }
  if (config.sim_include_rbe) {
    Estimator e;
    e.name = "RBE";
    e.alpha = config.bayes_alpha;
    e.classical = false;
    const RunConfig* cfg = &config;
    e.run = [cfg](const TestPlan& plan, DistributionKind dist,
                  const CountData& data) {
      const PriorSpec prior = make_prior(cfg->prior, plan, data, cfg->sigma2_p,
                                         cfg->prior_level_scaled_denominator);
      RunConfig local = *cfg;
      local.plan = plan;
      local.dist = dist;
      const PosteriorChains chains = run_hmc(local, data, prior);
      FitResult fr;
      fr.theta = ParamVector::from_vector(rbe(chains));
      fr.converged = true;
      return fr;
    };
    estimators.push_back(e);
  }

  const MetricTable table = run_study(scenario, estimators);
  write_text(out_dir / "metrics.csv", table.to_csv());
  std::cout << table.to_csv();
  return 0;
}

}  // namespace

RunConfig parse_config(const std::string& json_text,
                       const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(doc, "",
             {"plan", "model", "data", "classical", "bayes", "test", "sim"});
  if (!doc.contains("plan") || !doc.contains("model")) {
    throw ConfigError("config: 'plan' and 'model' sections are required");
  }

  RunConfig config;
  config.base_dir = base_dir;

  const json& plan = doc["plan"];
  check_keys(plan, "plan",
             {"stress", "change_points", "inspections", "lag", "time_scale"});
  config.time_scale = get_num(plan, "time_scale", 1.0);
  if (!(config.time_scale > 0.0)) {
    throw ConfigError("config: 'plan.time_scale' must be positive");
  }
  config.plan.stress = get_vec(plan, "stress");
  config.plan.change_points = get_vec(plan, "change_points");
  for (double& t : config.plan.change_points) t *= config.time_scale;
  if (!plan.contains("inspections") || !plan["inspections"].is_array()) {
    throw ConfigError("config: 'plan.inspections' must be an array of arrays");
  }
  for (const auto& row : plan["inspections"]) {
    std::vector<double> times;
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw ConfigError("config: inspection times must be numbers");
      }
      times.push_back(v.get<double>() * config.time_scale);
    }
    config.plan.inspections.push_back(times);
  }
  config.plan.lag = get_num(plan, "lag", 0.0);
  try {
    config.plan.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: invalid plan: ") + e.what());
  }

  const json& model = doc["model"];
  check_keys(model, "model", {"distribution"});
  const std::string dist = model.value("distribution", "");
  if (dist == "weibull") config.dist = DistributionKind::Weibull;
  else if (dist == "gompertz") config.dist = DistributionKind::Gompertz;
  else throw ConfigError("config: 'model.distribution' must be weibull or gompertz");

  if (doc.contains("data")) {
    const json& data = doc["data"];
    check_keys(data, "data", {"file", "counts", "survivors"});
    if (data.contains("file")) {
      config.data_file = data["file"].get<std::string>();
    } else {
      if (!data.contains("counts") || !data.contains("survivors")) {
        throw ConfigError("config: inline data needs 'counts' and 'survivors'");
      }
      CountData counts;
      for (const auto& row : data["counts"]) {
        std::vector<long> r;
        for (const auto& v : row) r.push_back(v.get<long>());
        counts.counts.push_back(r);
      }
      counts.survivors = data["survivors"].get<long>();
      counts.total = counts.survivors + counts.total_failures();
      try {
        counts.validate(config.plan);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: invalid inline data: ") + e.what());
      }
      config.inline_data = counts;
    }
  }

  if (doc.contains("classical")) {
    const json& cls = doc["classical"];
    check_keys(cls, "classical",
               {"alpha", "learning_rate", "threshold", "max_iters", "initial"});
    if (cls.contains("alpha")) config.alphas = get_vec(cls, "alpha");
    for (double a : config.alphas) {
      if (!(a > 0.0)) {
        throw ConfigError("config: 'classical.alpha' entries must be positive");
      }
    }
    config.fit_config.learning_rate =
        get_num(cls, "learning_rate", config.fit_config.learning_rate);
    config.fit_config.threshold =
        get_num(cls, "threshold", config.fit_config.threshold);
    config.fit_config.max_iters = static_cast<int>(
        get_num(cls, "max_iters", config.fit_config.max_iters));
    if (cls.contains("initial")) {
      config.fit_config.initial =
          theta_from_array(get_vec(cls, "initial"), "classical.initial");
    }
  }
  if (config.fit_config.initial.dim() != config.plan.param_dim()) {
    // neutral default start when none was given
    ParamVector init;
    init.c0 = 0.0;
    init.c1 = 0.0;
    init.gammas.assign(config.plan.levels(), 1.0);
    config.fit_config.initial = init;
  }

  if (doc.contains("bayes")) {
    const json& bay = doc["bayes"];
    check_keys(bay, "bayes",
               {"prior", "sigma2_p", "alpha", "step_size", "leapfrog_steps",
                "mass", "chains", "iterations", "burn_in", "seed",
                "prior_variant"});
    const std::string prior = bay.value("prior", "flat");
    if (prior == "normal") config.prior = PriorKind::NormalData;
    else if (prior == "dirichlet") config.prior = PriorKind::DirichletData;
    else if (prior == "flat") config.prior = PriorKind::Flat;
    else throw ConfigError("config: 'bayes.prior' must be normal, dirichlet or flat");
    config.sigma2_p = get_num(bay, "sigma2_p", config.sigma2_p);
    config.bayes_alpha = get_num(bay, "alpha", config.bayes_alpha);
    config.hmc.step_size = get_num(bay, "step_size", config.hmc.step_size);
    config.hmc.leapfrog_steps = static_cast<int>(
        get_num(bay, "leapfrog_steps", config.hmc.leapfrog_steps));
    if (bay.contains("mass")) {
      const std::vector<double> m = get_vec(bay, "mass");
      config.hmc.mass_v =
          Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    }
    config.hmc.chains =
        static_cast<int>(get_num(bay, "chains", config.hmc.chains));
    config.hmc.iterations =
        static_cast<int>(get_num(bay, "iterations", config.hmc.iterations));
    config.hmc.burn_in =
        static_cast<int>(get_num(bay, "burn_in", config.hmc.burn_in));
    config.hmc.seed = static_cast<std::uint64_t>(get_num(bay, "seed", 0.0));
    if (bay.contains("prior_variant")) {
      const std::string variant = bay["prior_variant"].get<std::string>();
      if (variant == "level_scaled") config.prior_level_scaled_denominator = true;
      else if (variant == "simplex") config.prior_level_scaled_denominator = false;
      else throw ConfigError("config: 'bayes.prior_variant' must be level_scaled or simplex");
    }
  }

  if (doc.contains("test")) {
    const json& test = doc["test"];
    check_keys(test, "test", {"theta0", "ball_radius", "rho0", "bootstrap"});
    config.bootstrap_b =
        static_cast<int>(get_num(test, "bootstrap", config.bootstrap_b));
    if (test.contains("theta0")) {
      HypothesisSpec hyp;
      hyp.theta0 = theta_from_array(get_vec(test, "theta0"), "test.theta0");
      hyp.ball_radius = get_num(test, "ball_radius", 0.0);
      hyp.rho0 = get_num(test, "rho0", 0.5);
      try {
        hyp.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: invalid test section: ") + e.what());
      }
      config.hypothesis = hyp;
    }
  }

  if (doc.contains("sim")) {
    const json& sim = doc["sim"];
    check_keys(sim, "sim",
               {"theta_true", "theta_contam", "n", "reps", "seed",
                "include_rbe"});
    if (sim.contains("theta_true")) {
      config.sim_theta_true =
          theta_from_array(get_vec(sim, "theta_true"), "sim.theta_true");
    }
    if (sim.contains("theta_contam")) {
      config.sim_theta_contam =
          theta_from_array(get_vec(sim, "theta_contam"), "sim.theta_contam");
    }
    config.sim_n = static_cast<long>(get_num(sim, "n", config.sim_n));
    config.sim_reps = static_cast<int>(get_num(sim, "reps", config.sim_reps));
    config.sim_seed = static_cast<std::uint64_t>(get_num(sim, "seed", 0.0));
    if (sim.contains("include_rbe")) {
      config.sim_include_rbe = sim["include_rbe"].get<bool>();
    }
  }

  return config;
}

RunConfig load_config(const std::string& path) {
  const fs::path p(path);
  return parse_config(read_file(path), p.parent_path().string());
}

CountData load_dataset(const std::string& path, const TestPlan& plan,
                       double time_scale) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  std::string first_line;
  std::getline(in, first_line);
  in.seekg(0);

  CountData counts;
  counts.counts.resize(plan.levels());
  for (int i = 0; i < plan.levels(); ++i) {
    counts.counts[i].assign(plan.num_inspections(i), 0);
  }

  if (first_line.find('{') != std::string::npos) {
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("dataset: invalid JSON: ") + e.what());
    }
    check_keys(doc, "dataset", {"counts", "survivors", "n"});
    int i = 0;
    for (const auto& row : doc["counts"]) {
      if (i >= plan.levels()) {
        throw ConfigError("dataset: more count rows than stress levels");
      }
      int m = 0;
      for (const auto& v : row) {
        if (m >= plan.num_inspections(i)) {
          throw ConfigError("dataset: more counts than inspections at a level");
        }
        counts.counts[i][m++] = v.get<long>();
      }
      ++i;
    }
    counts.survivors = doc["survivors"].get<long>();
    counts.total = counts.survivors + counts.total_failures();
    if (doc.contains("n") && doc["n"].get<long>() != counts.total) {
      throw ConfigError("dataset: declared n does not match counts");
    }
    counts.validate(plan);
    return counts;
  }

  // raw format: failure times one per line, then "survivors N"
  std::string line;
  long declared_n = -1;
  bool have_survivors = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    if (token == "survivors") {
      if (!(ls >> counts.survivors) || counts.survivors < 0) {
        throw ConfigError("dataset: malformed survivors line");
      }
      have_survivors = true;
      continue;
    }
    if (token == "n") {
      if (!(ls >> declared_n)) throw ConfigError("dataset: malformed n line");
      continue;
    }
    double t;
    try {
      t = std::stod(token);
    } catch (const std::exception&) {
      throw ConfigError("dataset: unparsable line " + std::to_string(line_no));
    }
    if (!(t > 0.0)) {
      throw ConfigError("dataset: nonpositive failure time at line " +
                        std::to_string(line_no));
    }
    const int cell = plan.locate(t * time_scale);
    if (cell == plan.total_cells()) {
      throw ConfigError("dataset: failure time " + token +
                        " lies beyond the termination point");
    }
    for (int i = 0; i < plan.levels(); ++i) {
      for (int m = 0; m < plan.num_inspections(i); ++m) {
        if (plan.flat_index(i, m) == cell) ++counts.counts[i][m];
      }
    }
  }
  if (!have_survivors) {
    throw ConfigError("dataset: missing survivors line");
  }
  counts.total = counts.survivors + counts.total_failures();
  if (declared_n >= 0 && declared_n != counts.total) {
    throw ConfigError("dataset: declared n (" + std::to_string(declared_n) +
                      ") does not match times + survivors (" +
                      std::to_string(counts.total) + ")");
  }
  counts.validate(plan);
  return counts;
}

CountData resolve_data(const RunConfig& config) {
  if (config.inline_data) return *config.inline_data;
  if (!config.data_file) {
    throw ConfigError("config: a 'data' section is required for this command");
  }
  fs::path p(*config.data_file);
  if (p.is_relative()) p = fs::path(config.base_dir) / p;
  return load_dataset(p.string(), config.plan, config.time_scale);
}

int dispatch(const std::string& command, const std::string& config_path,
             std::optional<std::uint64_t> seed_override,
             const std::string& out_dir, bool verbose) {
  try {
    RunConfig config = load_config(config_path);
    if (seed_override) {
      config.hmc.seed = *seed_override;
      config.sim_seed = *seed_override;
    }
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out_dir);
    if (verbose) {
      std::cerr << "command=" << command << " config=" << config_path
                << " out=" << out_dir << '\n';
    }

    if (command == "simulate") return cmd_simulate(config, out, config.sim_seed);
    const CountData data = resolve_data(config);
    if (command == "fit") return cmd_fit(config, data, out);
    if (command == "tune") return cmd_tune(config, data, out);
    if (command == "bayes") return cmd_bayes(config, data, out);
    if (command == "gof") return cmd_gof(config, data, out, config.hmc.seed);
    if (command == "bf") return cmd_bf(config, data, out, config.hmc.seed);
    if (command == "influence") return cmd_influence(config, data, out);
    std::cerr << "unknown command: " << command << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace oneshot
