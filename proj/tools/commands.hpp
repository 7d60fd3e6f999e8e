#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mmts/retrieval.hpp"

namespace mmts::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUnexpected = 1,
  kArgumentError = 2,
  kIoError = 3,
  kNumericError = 4,
};

// Entry point shared by the binary and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Exact text `mmts eval` writes for a report.
std::string metrics_json_text(const MetricsReport& report);

// --threads fallback: MMTS_THREADS, else 1.
unsigned default_threads();

}  // namespace mmts::cli
