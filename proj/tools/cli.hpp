#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dehaze::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kIo = 3,
  kNumeric = 4,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a flat key=value config file into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::string& path);

}  // namespace dehaze::cli
