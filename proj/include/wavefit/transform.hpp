#pragma once

// Dynamic normalisations of death tables into percentage series, and the
// placement of monthly Northern Ireland values onto ISO weeks.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wavefit/core_types.hpp"

namespace wavefit::transform {

enum class SeriesKind : std::uint8_t {
  DeathsDueToCovid,         // 100 * covid / total, per place or over all places
  ProportionOfCovidDeaths,  // 100 * covid at place / covid at all places
  SumOfPlaceRatios,         // diagnostic: sum over places of the per-place ratios
};

std::string_view to_string(SeriesKind k);

/// Percentage series over contiguous weeks. Undefined (zero-denominator) weeks
/// are std::nullopt and never imputed.
struct ProportionSeries {
  Nation nation{};
  std::optional<Place> place;  // nullopt: all places
  SeriesKind kind{};
  std::vector<WeekIndex> weeks;
  std::vector<std::optional<double>> values;

  std::size_t defined_count() const;
  /// Indices of defined values above 100 (covid > total registration artefacts).
  std::vector<std::size_t> above_hundred() const;
  std::string_view place_label() const;  // "All" for national series
};

using PlaceSeries = std::array<ProportionSeries, kPlaceCount>;

/// Per-place share of all deaths that mention COVID-19.
PlaceSeries deaths_due_to_covid(const DeathTable& covid, const DeathTable& total);

/// National share: ratio of the place sums (not a sum of ratios).
ProportionSeries national_deaths_due_to_covid(const DeathTable& covid, const DeathTable& total);

/// Literal sum over places of the per-place ratios; can exceed 100.
ProportionSeries national_sum_of_ratios(const DeathTable& covid, const DeathTable& total);

/// Each place's share of the week's COVID-19 deaths; defined weeks sum to 100.
PlaceSeries proportion_of_covid_deaths(const DeathTable& covid);

// --- monthly data ---------------------------------------------------------------

struct MonthlySeries {
  Nation nation{};
  std::optional<Place> place;
  SeriesKind kind{SeriesKind::DeathsDueToCovid};
  std::vector<YearMonth> months;
  std::vector<std::optional<double>> values;
};

/// Monthly 100 * covid / total for one place, or the ratio of sums when place is nullopt.
MonthlySeries monthly_deaths_due_to_covid(const MonthlyTable& covid, const MonthlyTable& total,
                                          std::optional<Place> place);

struct AlignedPoint {
  YearMonth month;
  WeekIndex week;
  double monthly_value;   // all-place monthly COVID-19 deaths
  double per_week_value;  // monthly_value / number of ISO weeks in the month
};

/// Assigns each month one of its own ISO weeks: the week whose all-place weekly
/// count is closest to the per-week share of the monthly count (earliest on ties).
/// Throws DataError when a month has no weeks in the weekly table.
std::vector<AlignedPoint> align_monthly_to_weekly(const MonthlyTable& monthly, const DeathTable& weekly);

/// Places monthly values on their aligned weeks; weeks in between are undefined.
ProportionSeries place_on_aligned_weeks(const MonthlySeries& monthly, std::span<const AlignedPoint> alignment);

// --- export -------------------------------------------------------------------

inline constexpr std::string_view kSeriesCsvHeader = "nation,place,kind,iso_year,iso_week,value";

void write_series_csv(std::span<const ProportionSeries> series, std::ostream& out);

}  // namespace wavefit::transform
