#pragma once

// Tabular exports of the analysis: CSV, JSON and Markdown renderings of the
// fit, peak, beta-sign and comparison tables, plus per-curve plot data.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wavefit/analysis.hpp"

namespace wavefit::report {

/// Empty, text, integer, real (NaN renders empty) or flag.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(const Table& table, std::ostream& out);
void write_markdown(const Table& table, std::ostream& out);
/// Array of objects keyed by column; empty cells and NaN become null.
nlohmann::ordered_json to_json(const Table& table);

inline constexpr std::string_view kParameterNames[] = {"gamma", "alpha",   "beta",    "lambda",
                                                       "nu_g",  "nu_d",    "kappa_g", "kappa_d"};

/// One row per cell: identity, status, initial guess and estimate per
/// parameter, R^2, objective, iterations, final damping, stop reason.
Table fits_table(std::span<const analysis::CellResult> cells);

/// Fitted-curve and raw-data peaks of every fitted cell.
Table peaks_table(std::span<const analysis::CellResult> cells);

Table beta_sign_long_table(std::span<const analysis::BetaSignEntry> entries);

/// Rows as in the published layout ("UK", "Homes (England)", ...), one column per wave.
Table beta_sign_grid(std::span<const analysis::BetaSignEntry> entries, std::span<const analysis::WaveWindow> windows);

Table comparison_table(std::span<const analysis::PeakComparison> rows);

/// week (ordinal, 0.1 steps over the window), observed (blank off the data), fitted.
Table curve_table(const analysis::WaveFit& fit);

}  // namespace wavefit::report
