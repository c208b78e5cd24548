#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "crm/constructions.hpp"
#include "crm/error_analysis.hpp"

namespace crm {

// Shortest representation that round-trips a double; "nan"/"inf" for non-finite values.
std::string format_double(double x);

// CSV with header "index,w,theta,t" (t empty for the iid kind). A non-empty
// provenance string is written first as a "# config: ..." comment line.
void write_csv(std::ostream& os, const TruncatedCRM& crm, const std::string& provenance = "");
// CSV with header "n,mc_mean,mc_std,asym".
void write_csv(std::ostream& os, const ErrorReport& report, const std::string& provenance = "");

nlohmann::json to_json(const TruncatedCRM& crm);
nlohmann::json to_json(const ErrorReport& report);
nlohmann::json to_json(const PairCatalogEntry& entry);

}  // namespace crm
