#include "crm/serialization.hpp"

#include <charconv>
#include <cmath>

namespace crm {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

void write_provenance(std::ostream& os, const std::string& provenance) {
  if (!provenance.empty()) os << "# config: " << provenance << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const TruncatedCRM& crm, const std::string& provenance) {
  write_provenance(os, provenance);
  os << "index,w,theta,t\n";
  for (std::size_t i = 0; i < crm.atoms.size(); ++i) {
    const auto& a = crm.atoms[i];
    os << i + 1 << ',' << format_double(a.w) << ',' << format_double(a.theta) << ','
       << (std::isnan(a.t) ? std::string() : format_double(a.t)) << '\n';
  }
}

void write_csv(std::ostream& os, const ErrorReport& r, const std::string& provenance) {
  write_provenance(os, provenance);
  os << "n,mc_mean,mc_std,asym\n";
  for (std::size_t g = 0; g < r.n_grid.size(); ++g)
    os << r.n_grid[g] << ',' << format_double(r.mc_mean[g]) << ',' << format_double(r.mc_std[g]) << ','
       << format_double(r.asym[g]) << '\n';
}

nlohmann::json to_json(const TruncatedCRM& crm) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : crm.atoms) {
    nlohmann::json j{{"w", a.w}, {"theta", a.theta}};
    j["t"] = number_or_null(a.t);
    atoms.push_back(std::move(j));
  }
  nlohmann::json out{{"kind", to_string(crm.kind)},
                     {"n", crm.n},
                     {"process", crm.process.name()},
                     {"kernel", crm.kernel.name()},
                     {"seed", crm.seed},
                     {"stream_id", crm.stream_id},
                     {"base_measure", crm.base_measure},
                     {"total_mass", crm.total_mass()},
                     {"atoms", std::move(atoms)}};
  out["t_next"] = crm.t_next ? nlohmann::json(*crm.t_next) : nlohmann::json(nullptr);
  out["t_star"] = crm.t_star ? nlohmann::json(*crm.t_star) : nlohmann::json(nullptr);
  out["asymptotic_time"] = crm.asymptotic_time;
  return out;
}

nlohmann::json to_json(const ErrorReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t g = 0; g < r.n_grid.size(); ++g)
    rows.push_back({{"n", r.n_grid[g]},
                    {"mc_mean", r.mc_mean[g]},
                    {"mc_std", r.mc_std[g]},
                    {"asym", number_or_null(r.asym[g])}});
  nlohmann::json out{{"process", r.process},
                     {"kernel", r.kernel},
                     {"n_hat", r.n_hat},
                     {"arrival_reps", r.arrival_reps},
                     {"jump_reps", r.jump_reps},
                     {"seed", r.seed},
                     {"stream_id", r.stream_id},
                     {"variance_finite", r.variance_finite},
                     {"warnings", r.warnings},
                     {"rows", std::move(rows)}};
  out["slope_fit"] = r.slope_fit ? nlohmann::json(*r.slope_fit) : nlohmann::json(nullptr);
  out["truncation_bias"] = number_or_null(r.truncation_bias);
  return out;
}

nlohmann::json to_json(const PairCatalogEntry& e) {
  return {{"process", e.process},
          {"kernel", e.kernel},
          {"psi_closed", e.psi_closed},
          {"psi_inverse_closed", e.psi_inverse_closed},
          {"psi_density_closed", e.psi_density_closed},
          {"phi_sampler", e.phi_sampler},
          {"phibar_sampler", e.phibar_sampler},
          {"notes", e.notes}};
}

}  // namespace crm
