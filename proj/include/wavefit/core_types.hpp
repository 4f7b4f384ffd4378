#pragma once

// Domain vocabulary: nations, places of occurrence, ISO-8601 week indexing and
// the place-by-week count matrices every other module consumes.

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavefit {

enum class Nation : std::uint8_t { England, Wales, Scotland, NorthernIreland, EnglandAndWales, UK };

inline constexpr std::array<Nation, 6> kAllNations{Nation::England,         Nation::Wales,
                                                   Nation::Scotland,        Nation::NorthernIreland,
                                                   Nation::EnglandAndWales, Nation::UK};

/// UK and EnglandAndWales are aggregates; a canonical input row never carries UK.
constexpr bool is_aggregate(Nation n) { return n == Nation::UK || n == Nation::EnglandAndWales; }

enum class Place : std::uint8_t { Home, Hospital, Hospice, CareHome, OCE, Elsewhere };

inline constexpr std::size_t kPlaceCount = 6;
inline constexpr std::array<Place, kPlaceCount> kAllPlaces{Place::Home,     Place::Hospital, Place::Hospice,
                                                           Place::CareHome, Place::OCE,      Place::Elsewhere};

constexpr std::size_t index_of(Place p) { return static_cast<std::size_t>(p); }

enum class Measure : std::uint8_t { CovidDeaths, TotalDeaths };

std::string_view to_string(Nation n);
std::string_view to_string(Place p);
std::string_view to_string(Measure m);

// Parse the canonical spellings above. Unknown text throws RangeError.
Nation parse_nation(std::string_view text);
Place parse_place(std::string_view text);
Measure parse_measure(std::string_view text);

/// Number of ISO weeks (52 or 53) in an ISO year.
int iso_weeks_in_year(int iso_year);

/// Weeks since 2020-W01. Throws RangeError for a week the ISO year does not have.
int week_ordinal(int iso_year, int iso_week);

struct YearMonth {
  int year{};
  int month{};  // 1..12

  /// Throws RangeError unless month is 1..12.
  static YearMonth make(int year, int month);

  int ordinal() const { return year * 12 + (month - 1); }
  YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }
  std::string to_string() const;  // "2020-04"

  friend bool operator==(const YearMonth&, const YearMonth&) = default;
  friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

/// An ISO-8601 week with a contiguous ordinal (2020-W01 = 0).
class WeekIndex {
 public:
  static WeekIndex from_iso(int iso_year, int iso_week);
  static WeekIndex from_ordinal(int ordinal);
  /// Accepts "2020w10" or "2020-W10".
  static WeekIndex parse(std::string_view text);
  static WeekIndex containing(std::chrono::sys_days day);

  int iso_year() const noexcept { return year_; }
  int iso_week() const noexcept { return week_; }
  int ordinal() const noexcept { return ordinal_; }

  std::chrono::sys_days monday() const;
  /// The Thursday decides which month (and ISO year) a week belongs to.
  std::chrono::sys_days thursday() const;
  YearMonth month() const;

  WeekIndex operator+(int weeks) const { return from_ordinal(ordinal_ + weeks); }
  WeekIndex operator-(int weeks) const { return from_ordinal(ordinal_ - weeks); }
  int operator-(const WeekIndex& other) const noexcept { return ordinal_ - other.ordinal_; }

  std::string to_string() const;  // "2020w10"

  friend bool operator==(const WeekIndex& a, const WeekIndex& b) noexcept { return a.ordinal_ == b.ordinal_; }
  friend std::strong_ordering operator<=>(const WeekIndex& a, const WeekIndex& b) noexcept {
    return a.ordinal_ <=> b.ordinal_;
  }

 private:
  WeekIndex(int year, int week, int ordinal) : year_(year), week_(week), ordinal_(ordinal) {}

  int year_;
  int week_;
  int ordinal_;
};

/// ISO weeks whose Thursday falls inside the month, in order (4 or 5 weeks).
std::vector<WeekIndex> weeks_in_month(int year, int month);
inline std::vector<WeekIndex> weeks_in_month(YearMonth ym) { return weeks_in_month(ym.year, ym.month); }

/// p x n matrix of weekly death counts for one nation and measure.
///
/// Weeks are contiguous and strictly increasing; counts are stored place-major
/// (row = place, column = week) and are never negative.
class DeathTable {
 public:
  DeathTable(Nation nation, Measure measure, std::vector<WeekIndex> weeks, std::vector<std::int64_t> counts);

  static DeathTable zeros(Nation nation, Measure measure, WeekIndex first, std::size_t n);

  Nation nation() const noexcept { return nation_; }
  Measure measure() const noexcept { return measure_; }
  std::span<const WeekIndex> weeks() const noexcept { return weeks_; }
  std::size_t week_count() const noexcept { return weeks_.size(); }
  WeekIndex first_week() const { return weeks_.front(); }
  WeekIndex last_week() const { return weeks_.back(); }

  std::int64_t count(Place place, std::size_t column) const { return counts_[index_of(place) * week_count() + column]; }
  std::span<const std::int64_t> row(Place place) const {
    return std::span<const std::int64_t>(counts_).subspan(index_of(place) * week_count(), week_count());
  }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }

  std::int64_t week_total(std::size_t column) const;
  std::int64_t total() const;
  std::optional<std::size_t> column_of(WeekIndex week) const;

  friend bool operator==(const DeathTable&, const DeathTable&) = default;

 private:
  Nation nation_;
  Measure measure_;
  std::vector<WeekIndex> weeks_;
  std::vector<std::int64_t> counts_;
};

/// p x m matrix of monthly death counts; months contiguous and increasing.
class MonthlyTable {
 public:
  MonthlyTable(Nation nation, Measure measure, std::vector<YearMonth> months, std::vector<std::int64_t> counts);

  Nation nation() const noexcept { return nation_; }
  Measure measure() const noexcept { return measure_; }
  std::span<const YearMonth> months() const noexcept { return months_; }
  std::size_t month_count() const noexcept { return months_.size(); }

  std::int64_t count(Place place, std::size_t column) const {
    return counts_[index_of(place) * month_count() + column];
  }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }
  std::int64_t month_total(std::size_t column) const;
  std::int64_t total() const;

  friend bool operator==(const MonthlyTable&, const MonthlyTable&) = default;

 private:
  Nation nation_;
  Measure measure_;
  std::vector<YearMonth> months_;
  std::vector<std::int64_t> counts_;
};

}  // namespace wavefit
