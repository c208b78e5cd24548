#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crm/arrival_kernels.hpp"
#include "crm/size_measures.hpp"

namespace crm::cli {

inline const std::vector<std::string> kCommands = {"sample",   "error-decay", "c1-table",    "compare-kernels",
                                                   "mgf-check", "bound-check", "mixture-demo"};

struct ExperimentConfig {
  std::string command;

  // process
  std::string process = "ggp";  // ggp | stable | gamma | sbp | beta | transformed-beta
  double alpha = 2.0;
  double sigma = 0.5;
  double tau = 1.0;
  double c = 1.0;

  std::string kernel = "exponential";
  std::vector<std::string> kernels;  // c1-table, compare-kernels
  std::string kind = "sequential";
  bool asymptotic = false;

  std::size_t n = 100;
  std::vector<std::size_t> n_grid = {64, 128, 256, 512, 1024};
  std::size_t n_hat = 0;  // 0: 10 * max(n_grid)
  std::size_t arrival_reps = 10;
  std::size_t jump_reps = 100;
  std::size_t draws = 10000;

  std::string sigma_grid = "0.05:0.95:19";  // lo:hi:count
  std::vector<double> sigmas = {0.4, 0.7};
  std::vector<double> lambdas = {0.1, 1.0, 10.0};
  std::vector<std::size_t> m_grid = {1, 10, 100};
  double poisson_rate = 1.0;  // pi(w) = exp(-rate w)
  double kappa = 2.0;         // mixture-demo
  std::size_t m = 50;         // mixture-demo observations

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string format = "csv";  // csv | json | svg
  std::string out = "-";       // "-" = stdout

  SizeMeasure size_measure() const;
  ArrivalKernel arrival_kernel() const;
  std::vector<double> sigma_values() const;
  // Throws ConfigError with an actionable message.
  void validate() const;
};

// Data-affecting fields; `out` is excluded so an embedded config reproduces
// the payload wherever it is written.
nlohmann::json to_json(const ExperimentConfig& cfg);
// Overlays the keys present in j onto cfg; unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

// Parses argv: `crm <command> [--config file.json] [flags]`. Flags override the
// file, the file overrides CRM_SEED, which overrides the built-in default.
// Returns nullopt when help was printed.
std::optional<ExperimentConfig> parse_args(int argc, const char* const* argv);

}  // namespace crm::cli
