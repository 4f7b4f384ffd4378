#pragma once

// Weekly death tables generated from known curves, for fixtures and
// generate-then-fit checks.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wavefit/analysis.hpp"
#include "wavefit/core_types.hpp"
#include "wavefit/models.hpp"

namespace wavefit::synthetic {

/// One place's deaths-due-to-COVID-19 curve inside one wave window. mu is taken
/// from the window start.
struct CurveSpec {
  Nation nation{};
  Place place{};
  int wave{};  // index into the window list
  double gamma{};
  double alpha{};
  double beta{};
};

/// A place's share of the week's COVID-19 deaths, in percent, as a double
/// logistic over the whole span.
struct ShareSpec {
  Nation nation{};
  Place place{};
  models::DoubleLogisticParams params;
};

struct SyntheticTables {
  std::map<Nation, DeathTable> covid;
  std::map<Nation, DeathTable> total;
};

/// Weeks run from the first window start to the last window end. The curve of
/// the window containing a week (the first, when windows share it) gives each
/// place's deaths due to COVID-19, W; places without a curve there have none.
///
/// Without shares for a nation, every place-week has `scale` total deaths and
/// round(W / 100 * scale) COVID-19 deaths. With shares, a week has `scale`
/// COVID-19 deaths split by the share curves (places without a share divide
/// the remainder equally), and totals are set to round(100 * covid / W). Cells
/// with W below 1e-6 percent get no COVID-19 deaths.
///
/// Throws RangeError when a curve exceeds 100 or shares leave a negative remainder.
SyntheticTables generate(std::span<const CurveSpec> curves, std::span<const analysis::WaveWindow> windows,
                         std::span<const ShareSpec> shares = {}, std::int64_t scale = 1'000'000);

}  // namespace wavefit::synthetic
