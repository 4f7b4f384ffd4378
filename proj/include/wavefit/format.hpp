#pragma once

#include <string>

namespace wavefit {

/// Shortest round-trip decimal form, dot separator regardless of locale.
/// NaN formats as an empty string.
std::string format_number(double value);

/// Fixed-point with `digits` decimals, for human-facing tables.
std::string format_fixed(double value, int digits);

}  // namespace wavefit
