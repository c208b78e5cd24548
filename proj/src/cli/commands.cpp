#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli/svg.hpp"
#include "crm/constructions.hpp"
#include "crm/error_analysis.hpp"
#include "crm/errors.hpp"
#include "crm/log.hpp"
#include "crm/serialization.hpp"

namespace crm::cli {
namespace {

using nlohmann::json;

// Tabular result of a command, rendered as CSV, JSON or SVG.
struct Artifact {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  json payload = json::object();
  std::string title, xlabel, ylabel;
  bool logx = true, logy = true;
  std::vector<Series> series;
  std::vector<std::string> errors;  // items that could not be computed
  std::size_t attempted = 0;
};

std::string provenance(const ExperimentConfig& cfg) { return to_json(cfg).dump(); }

int status(const Artifact& a) {
  if (a.errors.empty()) return kOk;
  return a.errors.size() < a.attempted ? kPartial : kFailure;
}

void record_error(Artifact& a, const std::string& item, const std::exception& e) {
  a.errors.push_back(item + ": " + e.what());
  std::cerr << "error: " << a.errors.back() << '\n';
}

// Writes via `body` to cfg.out or stdout.
void emit(const ExperimentConfig& cfg, const std::function<void(std::ostream&)>& body) {
  if (cfg.out == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + cfg.out + "'");
  body(f);
  if (!f) throw std::runtime_error("failed writing '" + cfg.out + "'");
}

void write_artifact(const ExperimentConfig& cfg, const Artifact& a) {
  emit(cfg, [&](std::ostream& os) {
    if (cfg.format == "csv") {
      os << "# config: " << provenance(cfg) << '\n';
      for (std::size_t i = 0; i < a.header.size(); ++i) os << (i ? "," : "") << a.header[i];
      os << '\n';
      for (const auto& r : a.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
      }
    } else if (cfg.format == "json") {
      json j = a.payload;
      j["command"] = cfg.command;
      j["config"] = to_json(cfg);
      j["columns"] = a.header;
      j["rows"] = a.rows;
      j["errors"] = a.errors;
      os << j.dump(2) << '\n';
    } else {
      write_svg_plot(os, a.title, a.xlabel, a.ylabel, a.series, a.logx, a.logy, provenance(cfg));
    }
  });
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }

SizeMeasure with_sigma(const ExperimentConfig& cfg, double sigma) {
  ExperimentConfig c = cfg;
  c.sigma = sigma;
  return c.size_measure();
}

ErrorOptions error_options(const ExperimentConfig& cfg) {
  ErrorOptions o;
  o.n_hat = cfg.n_hat;
  o.arrival_reps = cfg.arrival_reps;
  o.jump_reps = cfg.jump_reps;
  o.threads = cfg.threads;
  return o;
}

int cmd_sample(const ExperimentConfig& cfg) {
  const Construction con(cfg.size_measure(), cfg.arrival_kernel());
  RngStream rng(cfg.seed);
  const auto kind = parse_construction_kind(cfg.kind);
  const auto base = BaseMeasure::uniform();
  TruncatedCRM crm = kind == ConstructionKind::Sequential     ? con.sample_sequential(cfg.n, base, rng)
                     : kind == ConstructionKind::Exchangeable ? con.sample_exchangeable(cfg.n, base, rng)
                                                              : con.sample_iid(cfg.n, base, cfg.asymptotic, rng);
  emit(cfg, [&](std::ostream& os) {
    if (cfg.format == "csv") {
      write_csv(os, crm, provenance(cfg));
    } else if (cfg.format == "json") {
      json j = to_json(crm);
      j["command"] = cfg.command;
      j["config"] = to_json(cfg);
      os << j.dump(2) << '\n';
    } else {
      std::vector<double> w;
      for (const auto& a : crm.atoms) w.push_back(a.w);
      std::sort(w.begin(), w.end(), std::greater<>());
      Series s{"sorted weights", {}, w};
      for (std::size_t i = 0; i < w.size(); ++i) s.x.push_back(static_cast<double>(i + 1));
      write_svg_plot(os, crm.process.name() + " x " + crm.kernel.name() + " (" + cfg.kind + ")", "rank", "weight", {s},
                     true, true, provenance(cfg));
    }
  });
  return kOk;
}

void add_report(Artifact& a, const ErrorReport& r, const std::string& prefix_label, std::vector<std::string> prefix) {
  Series mc{prefix_label + "MC mean", {}, {}}, as{prefix_label + "asymptotic", {}, {}, true};
  for (std::size_t g = 0; g < r.n_grid.size(); ++g) {
    auto row = prefix;
    row.insert(row.end(), {fmt(r.n_grid[g]), fmt(r.mc_mean[g]), fmt(r.mc_std[g]), fmt(r.asym[g])});
    a.rows.push_back(std::move(row));
    mc.x.push_back(static_cast<double>(r.n_grid[g]));
    mc.y.push_back(r.mc_mean[g]);
    as.x.push_back(static_cast<double>(r.n_grid[g]));
    as.y.push_back(r.asym[g]);
  }
  a.series.push_back(std::move(mc));
  if (std::any_of(as.y.begin(), as.y.end(), [](double v) { return std::isfinite(v); })) a.series.push_back(std::move(as));
}

int cmd_error_decay(const ExperimentConfig& cfg) {
  const auto m = cfg.size_measure();
  const auto k = cfg.arrival_kernel();
  const auto r = mc_truncation_error(m, k, cfg.n_grid, error_options(cfg), RngStream(cfg.seed));
  Artifact a;
  a.header = {"n", "mc_mean", "mc_std", "asym"};
  a.title = "truncation error: " + r.process + " x " + r.kernel;
  a.xlabel = "n";
  a.ylabel = "R_{n,nhat}";
  add_report(a, r, "", {});
  std::vector<double> x(r.n_grid.begin(), r.n_grid.end());
  a.payload["report"] = to_json(r);
  a.payload["summary"] = {{"slope_fit", r.slope_fit ? json(*r.slope_fit) : json(nullptr)},
                          {"slope_fit_full", r.n_grid.size() >= 2 ? json(fit_loglog_slope(x, r.mc_mean)) : json(nullptr)},
                          {"predicted_slope", m.regular_variation() ? json(1.0 - 1.0 / m.sigma()) : json(nullptr)}};
  if (cfg.format == "csv") {
    emit(cfg, [&](std::ostream& os) { write_csv(os, r, provenance(cfg)); });
    return kOk;
  }
  write_artifact(cfg, a);
  return kOk;
}

int cmd_c1_table(const ExperimentConfig& cfg) {
  Artifact a;
  a.header = {"sigma"};
  a.title = "C1(sigma)";
  a.xlabel = "sigma";
  a.ylabel = "C1";
  a.logx = false;
  const auto sig = cfg.sigma_values();
  std::vector<ArrivalKernel> ks;
  for (const auto& s : cfg.kernels) {
    ks.push_back(ArrivalKernel::parse(s));
    a.header.push_back(ks.back().name());
    a.series.push_back({ks.back().name(), {}, {}});
  }
  json cols = json::object();
  for (double s : sig) {
    std::vector<std::string> row{fmt(s)};
    for (std::size_t j = 0; j < ks.size(); ++j) {
      double v;
      try {
        v = ks[j].c1_constant(s);
      } catch (const DomainError& e) {
        v = std::nan("");
        warn(ks[j].name() + " at sigma=" + fmt(s) + ": " + e.what());
      }
      row.push_back(fmt(v));
      cols[ks[j].name()].push_back(std::isfinite(v) ? json(v) : json(nullptr));
      a.series[j].x.push_back(s);
      a.series[j].y.push_back(v);
    }
    a.rows.push_back(std::move(row));
  }
  a.payload["sigma"] = sig;
  a.payload["c1"] = cols;
  write_artifact(cfg, a);
  return kOk;
}

int cmd_compare_kernels(const ExperimentConfig& cfg) {
  Artifact a;
  a.header = {"sigma", "kernel", "n", "mc_mean", "mc_std", "asym"};
  a.title = "kernel comparison: " + cfg.process;
  a.xlabel = "n";
  a.ylabel = "R_{n,nhat}";
  json reports = json::array();
  std::uint64_t stream = 0;
  for (double s : cfg.sigmas) {
    for (const auto& ks : cfg.kernels) {
      ++a.attempted;
      const std::string item = "sigma=" + fmt(s) + " kernel=" + ks;
      try {
        const auto k = ArrivalKernel::parse(ks);
        const auto r = mc_truncation_error(with_sigma(cfg, s), k, cfg.n_grid, error_options(cfg),
                                           RngStream(cfg.seed, ++stream));
        add_report(a, r, "sigma=" + fmt(s) + " " + k.name() + " ", {fmt(s), k.name()});
        reports.push_back(to_json(r));
      } catch (const std::exception& e) {
        record_error(a, item, e);
      }
    }
  }
  a.payload["reports"] = reports;
  if (a.rows.empty() && !a.errors.empty()) return kFailure;
  write_artifact(cfg, a);
  return status(a);
}

int cmd_mgf_check(const ExperimentConfig& cfg) {
  const auto m = cfg.size_measure();
  const auto k = cfg.arrival_kernel();
  Artifact a;
  a.header = {"lambda", "quadrature", "mc_mean", "mc_se", "z"};
  a.title = "E exp(-lambda R_n): " + m.name() + " x " + k.name();
  a.xlabel = "lambda";
  a.ylabel = "MGF";
  a.logy = false;
  const std::size_t n_hat = cfg.n_hat ? cfg.n_hat : 100 * cfg.n;
  const auto mc = mc_error_mgf(m, k, cfg.lambdas, cfg.n, cfg.draws, n_hat, RngStream(cfg.seed), cfg.threads);
  Series q{"quadrature", {}, {}}, s{"Monte Carlo", {}, {}, true};
  for (const auto& e : mc) {
    ++a.attempted;
    try {
      const double v = error_mgf(m, k, e.lambda, cfg.n);
      a.rows.push_back({fmt(e.lambda), fmt(v), fmt(e.mean), fmt(e.se), fmt((e.mean - v) / e.se)});
      q.x.push_back(e.lambda);
      q.y.push_back(v);
      s.x.push_back(e.lambda);
      s.y.push_back(e.mean);
    } catch (const std::exception& ex) {
      record_error(a, "lambda=" + fmt(e.lambda), ex);
    }
  }
  a.series = {q, s};
  a.payload["n_hat"] = n_hat;
  if (a.rows.empty() && !a.errors.empty()) return kFailure;
  write_artifact(cfg, a);
  return status(a);
}

int cmd_bound_check(const ExperimentConfig& cfg) {
  const auto m = cfg.size_measure();
  const auto k = cfg.arrival_kernel();
  Artifact a;
  a.header = {"m", "n", "bound_proof", "bound_statement"};
  a.title = "likelihood bound: " + m.name() + " x " + k.name();
  a.xlabel = "n";
  a.ylabel = "1 - exp(-B)";
  const double rate = cfg.poisson_rate;
  const WeightFunction log_pi = [rate](double w) { return -rate * w; };
  for (std::size_t mo : cfg.m_grid) {
    Series s{"m=" + fmt(mo), {}, {}};
    for (std::size_t n : cfg.n_grid) {
      ++a.attempted;
      try {
        const double p = likelihood_bound(m, k, mo, n, log_pi, BoundForm::Proof);
        const double st = likelihood_bound(m, k, mo, n, log_pi, BoundForm::Statement);
        a.rows.push_back({fmt(mo), fmt(n), fmt(p), fmt(st)});
        s.x.push_back(static_cast<double>(n));
        s.y.push_back(p);
      } catch (const std::exception& e) {
        record_error(a, "m=" + fmt(mo) + " n=" + fmt(n), e);
      }
    }
    a.series.push_back(std::move(s));
  }
  if (a.rows.empty() && !a.errors.empty()) return kFailure;
  write_artifact(cfg, a);
  return status(a);
}

int cmd_mixture_demo(const ExperimentConfig& cfg) {
  MixtureOptions o;
  o.alpha = cfg.alpha;
  o.sigma = cfg.sigma;
  o.tau = cfg.tau;
  o.kappa = cfg.kappa;
  o.n = cfg.n;
  o.m = cfg.m;
  RngStream rng(cfg.seed);
  const auto d = mixture_prior_demo(o, rng);
  std::vector<std::size_t> counts(o.n, 0);
  for (auto z : d.assignments) ++counts[z];
  Artifact a;
  a.header = {"component", "w", "theta", "count"};
  a.title = "finite normalized GGP mixture prior draw";
  a.xlabel = "rank";
  a.ylabel = "weight";
  std::vector<double> sorted = d.weights;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  Series s{"sorted weights", {}, sorted};
  for (std::size_t i = 0; i < o.n; ++i) {
    a.rows.push_back({fmt(i + 1), fmt(d.weights[i]), fmt(d.locations[i]), fmt(counts[i])});
    s.x.push_back(static_cast<double>(i + 1));
  }
  a.series = {s};
  a.payload["t"] = d.t;
  a.payload["assignments"] = d.assignments;
  a.payload["observations"] = d.observations;
  a.payload["log_density"] = {{"prior_weights", d.log_prior_weights},
                              {"prior_locations", d.log_prior_locations},
                              {"assignments", d.log_assignments},
                              {"likelihood", d.log_likelihood},
                              {"joint", d.joint_log_density}};
  write_artifact(cfg, a);
  return kOk;
}

}  // namespace

int run(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.command == "sample") return cmd_sample(cfg);
  if (cfg.command == "error-decay") return cmd_error_decay(cfg);
  if (cfg.command == "c1-table") return cmd_c1_table(cfg);
  if (cfg.command == "compare-kernels") return cmd_compare_kernels(cfg);
  if (cfg.command == "mgf-check") return cmd_mgf_check(cfg);
  if (cfg.command == "bound-check") return cmd_bound_check(cfg);
  if (cfg.command == "mixture-demo") return cmd_mixture_demo(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

int main(int argc, const char* const* argv) {
  std::optional<ExperimentConfig> cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\nrun 'crm --help' for usage\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (!cfg) return kOk;
  try {
    return run(*cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace crm::cli
