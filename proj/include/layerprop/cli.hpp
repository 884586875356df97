#pragma once

// The command line front end, callable in-process.

#include <string>
#include <vector>

namespace layerprop::cli {

/// Exit statuses: success, malformed input, failed check, exhausted budget.
enum Exit : int { kOk = 0, kMalformed = 1, kFailed = 2, kUnknown = 3 };

struct Outcome {
  int code = kOk;
  /// Everything meant for standard output, written only once complete.
  std::string out;
  std::string err;
};

/// `args` excludes the program name.
Outcome run(const std::vector<std::string>& args);

}  // namespace layerprop::cli
