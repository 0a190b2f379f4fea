#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

namespace epsb::app {

/// Exit codes of a run.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        ///< unexpected error
  kConfigError = 2,    ///< config did not parse or validate
  kNumericalError = 3  ///< numerical error or failed invariant
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::filesystem::path out = "out";
};

/**
 * Runs one command from a config document, or from a manifest written by a
 * previous run (a document with a "config" member). Writes the command's CSV
 * outputs, summary.json and manifest.json into options.out.
 */
int run(const nlohmann::json& document, const RunOptions& options, std::ostream& log);

/// Same, reading the document from a file.
int run_file(const std::filesystem::path& path, const RunOptions& options, std::ostream& log);

}  // namespace epsb::app
