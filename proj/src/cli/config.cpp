#include "cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "crm/constructions.hpp"
#include "crm/errors.hpp"

namespace crm::cli {

SizeMeasure ExperimentConfig::size_measure() const {
  if (process == "ggp") return SizeMeasure::ggp(alpha, sigma, tau);
  if (process == "stable") return SizeMeasure::stable(alpha, sigma);
  if (process == "gamma") return SizeMeasure::gamma_process(alpha, tau);
  if (process == "sbp") return SizeMeasure::sbp(alpha, sigma, c);
  if (process == "beta") return SizeMeasure::beta_process(alpha);
  if (process == "transformed-beta") return SizeMeasure::transformed_bp(alpha);
  throw ConfigError("unknown process '" + process + "' (expected ggp, stable, gamma, sbp, beta or transformed-beta)");
}

ArrivalKernel ExperimentConfig::arrival_kernel() const { return ArrivalKernel::parse(kernel); }

std::vector<double> ExperimentConfig::sigma_values() const {
  std::stringstream ss(sigma_grid);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  double lo, hi;
  long count;
  try {
    if (parts.size() != 3) throw std::invalid_argument("parts");
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    count = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--sigma-grid must look like lo:hi:count, e.g. 0.05:0.95:19 (got '" + sigma_grid + "')");
  }
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi) || count < 1 || (count == 1 && lo != hi))
    throw ConfigError("--sigma-grid needs 0 < lo <= hi < 1 and count >= 1 (got '" + sigma_grid + "')");
  std::vector<double> v;
  for (long i = 0; i < count; ++i) {
    const double s = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.push_back(std::round(s * 1e12) / 1e12);  // 0.275, not 0.27499999999999997
  }
  return v;
}

void ExperimentConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ConfigError("unknown command '" + command + "'");
  auto need_process = [&] {
    try {
      (void)size_measure();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid process parameters: ") + e.what());
    }
  };
  auto need_kernel = [&](const std::string& spec) {
    try {
      (void)ArrivalKernel::parse(spec);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("invalid kernel '" + spec + "': " + e.what());
    }
  };
  if (format != "csv" && format != "json" && format != "svg")
    throw ConfigError("--format must be csv, json or svg (got '" + format + "')");
  if (threads < 1) throw ConfigError("--threads must be >= 1");

  if (command == "sample") {
    need_process();
    need_kernel(kernel);
    (void)parse_construction_kind(kind);
    if (n < 1) throw ConfigError("--n must be >= 1");
  } else if (command == "error-decay" || command == "compare-kernels") {
    need_process();
    if (command == "error-decay") need_kernel(kernel);
    for (const auto& k : kernels) need_kernel(k);
    if (n_grid.empty() || n_grid.front() < 1) throw ConfigError("--n-grid needs positive entries");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      if (n_grid[i] <= n_grid[i - 1]) throw ConfigError("--n-grid must be strictly increasing");
    if (n_hat != 0 && n_hat <= n_grid.back()) throw ConfigError("--n-hat must exceed the largest --n-grid value");
    if (arrival_reps < 1 || jump_reps < 1) throw ConfigError("--reps AxB needs A, B >= 1");
    if (command == "compare-kernels")
      for (double s : sigmas)
        if (!(s > 0.0 && s < 1.0)) throw ConfigError("--sigmas entries must lie in (0,1)");
  } else if (command == "c1-table") {
    for (const auto& k : kernels) need_kernel(k);
    (void)sigma_values();
  } else if (command == "mgf-check") {
    need_process();
    need_kernel(kernel);
    if (lambdas.empty()) throw ConfigError("--lambdas must not be empty");
    for (double l : lambdas)
      if (!(l > 0.0)) throw ConfigError("--lambdas entries must be positive");
    if (draws < 2) throw ConfigError("--draws must be >= 2");
    if (n < 1) throw ConfigError("--n must be >= 1");
    if (n_hat != 0 && n_hat <= n) throw ConfigError("--n-hat must exceed --n");
  } else if (command == "bound-check") {
    need_process();
    need_kernel(kernel);
    if (m_grid.empty() || n_grid.empty()) throw ConfigError("--m-grid and --n-grid must not be empty");
    if (!(poisson_rate > 0.0)) throw ConfigError("--poisson-rate must be positive");
  } else if (command == "mixture-demo") {
    if (!(alpha > 0.0)) throw ConfigError("--alpha must be positive");
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("--sigma must lie in (0,1) for the mixture demo");
    if (!(tau >= 0.0)) throw ConfigError("--tau must be nonnegative");
    if (!(kappa > 1.0)) throw ConfigError("--kappa must exceed 1 for the mixture demo");
    if (n < 1 || m < 1) throw ConfigError("--n and --m must be >= 1");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"command", c.command},       {"process", c.process},
          {"alpha", c.alpha},           {"sigma", c.sigma},
          {"tau", c.tau},               {"c", c.c},
          {"kernel", c.kernel},         {"kernels", c.kernels},
          {"kind", c.kind},             {"asymptotic", c.asymptotic},
          {"n", c.n},                   {"n_grid", c.n_grid},
          {"n_hat", c.n_hat},           {"arrival_reps", c.arrival_reps},
          {"jump_reps", c.jump_reps},   {"draws", c.draws},
          {"sigma_grid", c.sigma_grid}, {"sigmas", c.sigmas},
          {"lambdas", c.lambdas},       {"m_grid", c.m_grid},
          {"poisson_rate", c.poisson_rate}, {"kappa", c.kappa},
          {"m", c.m},                   {"seed", c.seed},
          {"threads", c.threads},       {"format", c.format}};
}

void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must contain a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") c.command = v.get<std::string>();
      else if (key == "process") c.process = v.get<std::string>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "sigma") c.sigma = v.get<double>();
      else if (key == "tau") c.tau = v.get<double>();
      else if (key == "c") c.c = v.get<double>();
      else if (key == "kernel") c.kernel = v.get<std::string>();
      else if (key == "kernels") c.kernels = v.get<std::vector<std::string>>();
      else if (key == "kind") c.kind = v.get<std::string>();
      else if (key == "asymptotic") c.asymptotic = v.get<bool>();
      else if (key == "n") c.n = v.get<std::size_t>();
      else if (key == "n_grid") c.n_grid = v.get<std::vector<std::size_t>>();
      else if (key == "n_hat") c.n_hat = v.get<std::size_t>();
      else if (key == "arrival_reps") c.arrival_reps = v.get<std::size_t>();
      else if (key == "jump_reps") c.jump_reps = v.get<std::size_t>();
      else if (key == "draws") c.draws = v.get<std::size_t>();
      else if (key == "sigma_grid") c.sigma_grid = v.get<std::string>();
      else if (key == "sigmas") c.sigmas = v.get<std::vector<double>>();
      else if (key == "lambdas") c.lambdas = v.get<std::vector<double>>();
      else if (key == "m_grid") c.m_grid = v.get<std::vector<std::size_t>>();
      else if (key == "poisson_rate") c.poisson_rate = v.get<double>();
      else if (key == "kappa") c.kappa = v.get<double>();
      else if (key == "m") c.m = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file has a value of the wrong type: ") + e.what());
  }
}

namespace {

std::uint64_t parse_seed(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + " must be a nonnegative integer (got '" + s + "')");
  }
}

void parse_reps(ExperimentConfig& c, const std::string& s) {
  const auto x = s.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    c.arrival_reps = std::stoul(s.substr(0, x));
    c.jump_reps = std::stoul(s.substr(x + 1));
  } catch (const std::exception&) {
    throw ConfigError("--reps must look like AxB, e.g. 10x100 (got '" + s + "')");
  }
}

void add_process(CLI::App* app, ExperimentConfig& c) {
  app->add_option("--process", c.process, "ggp | stable | gamma | sbp | beta | transformed-beta");
  app->add_option("--alpha", c.alpha, "mass parameter");
  app->add_option("--sigma", c.sigma, "discount / stable index");
  app->add_option("--tau", c.tau, "exponential tilt");
  app->add_option("--c", c.c, "SBP concentration");
}

}  // namespace

std::optional<ExperimentConfig> parse_args(int argc, const char* const* argv) {
  ExperimentConfig c;
  if (const char* env = std::getenv("CRM_SEED"); env && *env) c.seed = parse_seed(env, "CRM_SEED");

  // The config file is applied before the flags so that flags win.
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i], path;
    if (a == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
    if (path.empty()) continue;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    apply_json(c, j);
  }

  CLI::App app{"Simulation of completely random measures by arrival-time augmentation", "crm"};
  app.require_subcommand(1);
  std::string config_path, reps, seed;

  for (const auto& name : kCommands) {
    static const std::map<std::string, std::string> help = {
        {"sample", "draw one truncated CRM"},
        {"error-decay", "Monte Carlo truncation error R_{n,nhat} over an n grid"},
        {"c1-table", "asymptotic constant C1(sigma) per kernel"},
        {"compare-kernels", "error curves for several kernels at several sigma"},
        {"mgf-check", "quadrature vs Monte Carlo moment generating function of R_n"},
        {"bound-check", "marginal-likelihood L1 bound over (m, n) grids"},
        {"mixture-demo", "prior draw and joint density of a finite normalized GGP mixture"}};
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_option("--seed", seed, "random seed (fallback: CRM_SEED)");
    sub->add_option("--threads", c.threads, "worker threads");
    sub->add_option("--format", c.format, "csv | json | svg");
    sub->add_option("--out,-o", c.out, "output path, - for stdout");

    if (name != "c1-table") add_process(sub, c);
    if (name == "sample" || name == "error-decay" || name == "mgf-check" || name == "bound-check")
      sub->add_option("--kernel", c.kernel, "deterministic | exponential | gamma:K | invgamma:K | pareto:C");
    if (name == "c1-table" || name == "compare-kernels")
      sub->add_option("--kernels", c.kernels, "comma-separated kernel list")->delimiter(',');
    if (name == "sample") {
      sub->add_option("--kind", c.kind, "sequential | exchangeable | iid");
      sub->add_flag("--asymptotic", c.asymptotic, "iid: use the asymptotic inverse for t*");
    }
    if (name == "sample" || name == "mgf-check" || name == "mixture-demo") sub->add_option("--n", c.n, "truncation level");
    if (name == "error-decay" || name == "compare-kernels" || name == "bound-check")
      sub->add_option("--n-grid", c.n_grid, "comma-separated truncation levels")->delimiter(',');
    if (name == "error-decay" || name == "compare-kernels" || name == "mgf-check")
      sub->add_option("--n-hat", c.n_hat, "series horizon");
    if (name == "error-decay" || name == "compare-kernels")
      sub->add_option("--reps", reps, "AxB: A arrival sequences x B jump resamples");
    if (name == "c1-table") sub->add_option("--sigma-grid", c.sigma_grid, "lo:hi:count");
    if (name == "compare-kernels") sub->add_option("--sigmas", c.sigmas, "comma-separated sigma values")->delimiter(',');
    if (name == "mgf-check") {
      sub->add_option("--lambdas", c.lambdas, "comma-separated lambda values")->delimiter(',');
      sub->add_option("--draws", c.draws, "Monte Carlo draws");
    }
    if (name == "bound-check") {
      sub->add_option("--m-grid", c.m_grid, "comma-separated observation counts")->delimiter(',');
      sub->add_option("--poisson-rate", c.poisson_rate, "pi(w) = exp(-rate w)");
    }
    if (name == "mixture-demo") {
      sub->add_option("--kappa", c.kappa, "gamma arrival shape (> 1)");
      sub->add_option("--m", c.m, "number of observations");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return std::nullopt;
    }
    throw ConfigError(e.what());
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (!reps.empty()) parse_reps(c, reps);
  if (!seed.empty()) c.seed = parse_seed(seed, "--seed");
  if (c.command == "c1-table" && c.kernels.empty()) c.kernels = {"deterministic", "gamma:1", "gamma:2", "gamma:8"};
  if (c.command == "compare-kernels" && c.kernels.empty()) c.kernels = {"gamma:2", "invgamma:2"};
  c.validate();
  return c;
}

}  // namespace crm::cli
