#pragma once

#include "sinhp/config.hpp"

#include <string>

namespace sinhp {

inline constexpr const char* version_string = "0.1.0";

/// Runs one subcommand against a parsed configuration, writing artifacts
/// under cfg.out_dir. Returns a process exit code (0 ok, 2 config error,
/// 3 numerical failure).
int run_subcommand(const std::string& subcommand, const RunConfig& cfg);

} // namespace sinhp
