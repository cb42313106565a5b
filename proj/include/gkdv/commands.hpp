#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace gkdv {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
};

struct CommandArgs {
  std::string command;  ///< profile | spectrum | coercivity | evolve | construct | verify
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> threads;
};

/// Thread count: the explicit flag, else GKDV_THREADS, else the configured value.
std::size_t resolve_threads(std::optional<std::size_t> flag, std::size_t configured);

/// Runs a command and maps failures to exit codes; numerical failures also
/// write diagnostic.json into the output directory.
int dispatch(const CommandArgs& args, std::ostream& out, std::ostream& err);

}  // namespace gkdv
