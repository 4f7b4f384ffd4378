#include "wavefit/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>

#include "wavefit/errors.hpp"

namespace wavefit::synthetic {

namespace {

constexpr double kNegligible = 1e-6;

// Share of each place, as fractions summing to one.
std::array<double, kPlaceCount> shares_at(Nation nation, std::span<const ShareSpec> shares, double t) {
  std::array<double, kPlaceCount> out{};
  std::array<bool, kPlaceCount> given{};
  double used = 0.0;
  for (const auto& s : shares) {
    if (s.nation != nation) continue;
    const double v = models::double_logistic_eval(s.params, t) / 100.0;
    out[index_of(s.place)] = v;
    given[index_of(s.place)] = true;
    used += v;
  }
  std::size_t open = 0;
  for (bool g : given) open += !g;
  if (used > 1.0 + 1e-12 || (open == 0 && std::abs(used - 1.0) > 1e-9)) {
    throw RangeError("COVID-19 death shares do not sum to 100 percent");
  }
  for (std::size_t p = 0; p < kPlaceCount; ++p) {
    if (!given[p]) out[p] = (1.0 - used) / static_cast<double>(open);
  }
  return out;
}

}  // namespace

SyntheticTables generate(std::span<const CurveSpec> curves, std::span<const analysis::WaveWindow> windows,
                         std::span<const ShareSpec> shares, std::int64_t scale) {
  if (windows.empty()) throw RangeError("no wave windows");
  if (scale <= 0) throw RangeError("scale must be positive");
  const analysis::WaveWindow span = analysis::covering_window(windows);
  const auto n = static_cast<std::size_t>(span.length());
  std::vector<WeekIndex> weeks;
  for (std::size_t c = 0; c < n; ++c) weeks.push_back(span.start + static_cast<int>(c));

  std::set<Nation> nations;
  for (const auto& curve : curves) {
    if (curve.wave < 0 || static_cast<std::size_t>(curve.wave) >= windows.size()) {
      throw RangeError("curve refers to a missing wave window");
    }
    nations.insert(curve.nation);
  }

  SyntheticTables out;
  for (Nation nation : nations) {
    const bool shared = std::any_of(shares.begin(), shares.end(), [&](const ShareSpec& s) { return s.nation == nation; });
    std::vector<std::int64_t> covid(kPlaceCount * n, 0);
    std::vector<std::int64_t> total(kPlaceCount * n, scale);
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t wave = 0;
      while (!windows[wave].contains(weeks[c])) ++wave;
      const double t = weeks[c].ordinal();
      std::array<double, kPlaceCount> w{};
      for (const auto& curve : curves) {
        if (curve.nation != nation || static_cast<std::size_t>(curve.wave) != wave) continue;
        w[index_of(curve.place)] = models::weibull_eval(
            {curve.gamma, curve.alpha, curve.beta, static_cast<double>(windows[wave].start.ordinal())}, t);
        if (w[index_of(curve.place)] > 100.0) throw RangeError("synthetic curve exceeds 100 percent");
      }
      const std::optional<std::array<double, kPlaceCount>> q =
          shared ? std::optional(shares_at(nation, shares, t)) : std::nullopt;
      for (std::size_t p = 0; p < kPlaceCount; ++p) {
        const std::size_t cell = p * n + c;
        if (!q) {
          covid[cell] = std::llround(w[p] / 100.0 * static_cast<double>(scale));
        } else {
          const std::int64_t count = std::llround((*q)[p] * static_cast<double>(scale));
          if (w[p] < kNegligible || count == 0) {
            total[cell] = std::max<std::int64_t>(count, 1);
          } else {
            covid[cell] = count;
            total[cell] = std::llround(100.0 * static_cast<double>(count) / w[p]);
          }
        }
      }
    }
    out.covid.emplace(nation, DeathTable(nation, Measure::CovidDeaths, weeks, std::move(covid)));
    out.total.emplace(nation, DeathTable(nation, Measure::TotalDeaths, weeks, std::move(total)));
  }
  return out;
}

}  // namespace wavefit::synthetic
