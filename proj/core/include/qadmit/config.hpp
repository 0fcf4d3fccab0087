#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "qadmit/harness.hpp"

namespace qadmit {

/// Parses the JSON run-config document. Unknown keys are rejected; every
/// constraint of the owning modules is re-validated; defaulted fields
/// (warmup, exploration decay horizon, window, seeds) are resolved. `origin`
/// is used in error messages. Throws ConfigError.
RunConfig parse_run_config(std::string_view text, std::string_view origin);

RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical form: every field explicit, fixed key order, 2-space indent.
/// Loading then re-serializing is idempotent.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace qadmit
