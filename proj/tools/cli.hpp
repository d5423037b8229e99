#pragma once

#include <json.hpp>

#include <string>

namespace edeg::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kConfigError = 2,
    kIoError = 3,
    kNumericalError = 4,
    kNonFiniteLoss = 5,
    kTrainingFailed = 6,
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv);

/// FNV-1a 64 of the canonical dump with `created_at` and `canonical_hash`
/// removed, as 16 hex digits.
std::string canonical_hash(const nlohmann::json& artifact);

} // namespace edeg::cli
