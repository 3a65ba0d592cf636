#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pgig/config.hpp"

namespace pgig::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,         ///< bad flags, unparsable config, unknown method
  kPrecondition = 3,  ///< configuration cannot support the request
  kNumeric = 4,
};

/// Every key a command accepts, with its default. Empty string means unset.
Config command_defaults(std::string_view command);

/// Runs one resolved command. Writes outputs and manifest.txt into `out_dir`.
/// Throws pgig::Error subclasses on failure.
void execute(std::string_view command, const Config& resolved, const std::filesystem::path& out_dir,
             std::ostream& log);

/// Full command-line entry point; argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace pgig::cli
