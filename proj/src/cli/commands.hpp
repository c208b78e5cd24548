#pragma once

#include "cli/config.hpp"

namespace crm::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kUsage = 2;     // invalid configuration
constexpr int kPartial = 3;   // some artifacts could not be produced
constexpr int kFailure = 1;   // nothing was produced

int run(const ExperimentConfig& cfg);
// Full entry point: parsing, running, error reporting.
int main(int argc, const char* const* argv);

}  // namespace crm::cli
