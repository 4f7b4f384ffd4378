#pragma once

// The wavefit command line: validate, fit and compare.

#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wavefit/analysis.hpp"
#include "wavefit/core_types.hpp"

namespace wavefit::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitFit = 3,  // a fit failed or a cell lacked data; other outputs were written
  kExitIo = 4,
};

enum class Format { Csv, Json, Markdown };

/// Accepts "csv", "json" and "md" (or "markdown"); throws RangeError otherwise.
Format parse_format(std::string_view text);

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::vector<analysis::WaveWindow> windows = analysis::default_wave_windows();
  lm::LmConfig lm;
  std::filesystem::path out_dir;
  std::set<Format> formats{Format::Csv, Format::Json, Format::Markdown};
  unsigned threads = 0;
};

/// Reads every input, sniffing its layout. Throws IoError for unreadable files,
/// ParseError for the first schema issue and DataError for conflicting inputs
/// (two files for the same nation, measure and granularity).
analysis::Dataset load_dataset(std::span<const std::filesystem::path> inputs);

/// Schema checks per file; prints every issue with its row and column.
int cmd_validate(std::span<const std::filesystem::path> inputs, std::ostream& out, std::ostream& err);

/// Writes series.csv, fits, peaks and beta_signs in the chosen formats,
/// curves/<nation>_<place>_<wave>_<model>.csv, and quarantine/ entries for
/// cells that did not fit.
int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err);

/// National peak comparison against the first nation; printed as Markdown and,
/// with an output directory, written as compare.* files.
int cmd_compare(const RunConfig& config, std::span<const Nation> nations, std::ostream& out, std::ostream& err);

/// Parses arguments and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavefit::cli
