#include "wavefit/core_types.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "wavefit/errors.hpp"

namespace wavefit {

namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::year_month_day;

constexpr std::array<std::string_view, 6> kNationNames{"England",         "Wales",           "Scotland",
                                                       "NorthernIreland", "EnglandAndWales", "UK"};
constexpr std::array<std::string_view, kPlaceCount> kPlaceNames{"Home",     "Hospital", "Hospice",
                                                                "CareHome", "OCE",      "Elsewhere"};
constexpr std::array<std::string_view, 2> kMeasureNames{"CovidDeaths", "TotalDeaths"};

constexpr int kMinYear = 1583;
constexpr int kMaxYear = 9999;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::string_view, N>& names, std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<Enum>(i);
  }
  std::string valid;
  for (auto name : names) {
    if (!valid.empty()) valid += ", ";
    valid += name;
  }
  throw RangeError("unknown " + std::string(what) + " '" + std::string(text) + "' (expected one of: " + valid + ")");
}

sys_days monday_of_week_one(int iso_year) {
  const sys_days jan4{std::chrono::year{iso_year} / std::chrono::January / 4};
  const auto iso_weekday = std::chrono::weekday{jan4}.iso_encoding();
  return jan4 - days{iso_weekday - 1};
}

const sys_days kEpochMonday = monday_of_week_one(2020);

void check_year(int year) {
  if (year < kMinYear || year > kMaxYear) {
    throw RangeError("year " + std::to_string(year) + " outside supported range");
  }
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw RangeError("malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

void check_matrix(std::size_t columns, std::size_t cells, const char* what) {
  if (columns == 0) throw DataError(std::string(what) + " needs at least one column");
  if (cells != kPlaceCount * columns) {
    throw DataError(std::string(what) + " count matrix must be " + std::to_string(kPlaceCount) + " x " +
                    std::to_string(columns));
  }
}

void check_non_negative(std::span<const std::int64_t> counts, const char* what) {
  if (std::any_of(counts.begin(), counts.end(), [](std::int64_t c) { return c < 0; })) {
    throw DataError(std::string(what) + " contains a negative count");
  }
}

std::int64_t column_sum(std::span<const std::int64_t> counts, std::size_t columns, std::size_t column) {
  std::int64_t sum = 0;
  for (std::size_t p = 0; p < kPlaceCount; ++p) sum += counts[p * columns + column];
  return sum;
}

}  // namespace

std::string_view to_string(Nation n) { return kNationNames[static_cast<std::size_t>(n)]; }
std::string_view to_string(Place p) { return kPlaceNames[index_of(p)]; }
std::string_view to_string(Measure m) { return kMeasureNames[static_cast<std::size_t>(m)]; }

Nation parse_nation(std::string_view text) { return parse_enum<Nation>(text, kNationNames, "nation"); }
Place parse_place(std::string_view text) { return parse_enum<Place>(text, kPlaceNames, "place"); }
Measure parse_measure(std::string_view text) { return parse_enum<Measure>(text, kMeasureNames, "measure"); }

int iso_weeks_in_year(int iso_year) {
  check_year(iso_year);
  return static_cast<int>((monday_of_week_one(iso_year + 1) - monday_of_week_one(iso_year)).count() / 7);
}

int week_ordinal(int iso_year, int iso_week) {
  const int weeks = iso_weeks_in_year(iso_year);
  if (iso_week < 1 || iso_week > weeks) {
    throw RangeError("ISO year " + std::to_string(iso_year) + " has no week " + std::to_string(iso_week) +
                     " (valid: 1.." + std::to_string(weeks) + ")");
  }
  const sys_days monday = monday_of_week_one(iso_year) + days{7 * (iso_week - 1)};
  return static_cast<int>((monday - kEpochMonday).count() / 7);
}

YearMonth YearMonth::make(int year, int month) {
  check_year(year);
  if (month < 1 || month > 12) throw RangeError("month " + std::to_string(month) + " outside 1..12");
  return YearMonth{year, month};
}

std::string YearMonth::to_string() const {
  std::string out = std::to_string(year) + "-";
  if (month < 10) out += '0';
  return out + std::to_string(month);
}

WeekIndex WeekIndex::from_iso(int iso_year, int iso_week) {
  return WeekIndex(iso_year, iso_week, week_ordinal(iso_year, iso_week));
}

WeekIndex WeekIndex::from_ordinal(int ordinal) { return containing(kEpochMonday + days{7 * ordinal}); }

WeekIndex WeekIndex::containing(sys_days day) {
  const auto iso_weekday = static_cast<int>(std::chrono::weekday{day}.iso_encoding());
  const sys_days thursday = day - days{iso_weekday - 1} + days{3};
  const int iso_year = static_cast<int>(year_month_day{thursday}.year());
  check_year(iso_year);
  const int week = static_cast<int>((thursday - monday_of_week_one(iso_year)).count() / 7) + 1;
  const sys_days monday = thursday - days{3};
  return WeekIndex(iso_year, week, static_cast<int>((monday - kEpochMonday).count() / 7));
}

WeekIndex WeekIndex::parse(std::string_view text) {
  auto sep = text.find_first_of("wW");
  if (sep == std::string_view::npos) throw RangeError("malformed week '" + std::string(text) + "' (expected 2020w10)");
  std::string_view year_part = text.substr(0, sep);
  if (!year_part.empty() && year_part.back() == '-') year_part.remove_suffix(1);
  const int year = parse_int(year_part, "ISO year");
  const int week = parse_int(text.substr(sep + 1), "ISO week");
  check_year(year);
  return from_iso(year, week);
}

sys_days WeekIndex::monday() const { return kEpochMonday + days{7 * ordinal_}; }

sys_days WeekIndex::thursday() const { return monday() + days{3}; }

YearMonth WeekIndex::month() const {
  const year_month_day ymd{thursday()};
  return YearMonth{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
}

std::string WeekIndex::to_string() const {
  std::string out = std::to_string(year_) + "w";
  if (week_ < 10) out += '0';
  return out + std::to_string(week_);
}

std::vector<WeekIndex> weeks_in_month(int year, int month) {
  const YearMonth ym = YearMonth::make(year, month);
  const sys_days first{std::chrono::year{ym.year} / std::chrono::month{static_cast<unsigned>(ym.month)} / 1};
  const auto first_weekday = static_cast<int>(std::chrono::weekday{first}.iso_encoding());
  // Thursday has ISO encoding 4.
  sys_days thursday = first + days{(4 - first_weekday + 7) % 7};

  std::vector<WeekIndex> weeks;
  while (WeekIndex::containing(thursday).month() == ym) {
    weeks.push_back(WeekIndex::containing(thursday));
    thursday += days{7};
  }
  return weeks;
}

DeathTable::DeathTable(Nation nation, Measure measure, std::vector<WeekIndex> weeks, std::vector<std::int64_t> counts)
    : nation_(nation), measure_(measure), weeks_(std::move(weeks)), counts_(std::move(counts)) {
  check_matrix(weeks_.size(), counts_.size(), "death table");
  for (std::size_t i = 1; i < weeks_.size(); ++i) {
    if (weeks_[i].ordinal() != weeks_[i - 1].ordinal() + 1) {
      throw DataError("death table weeks must be contiguous; " + weeks_[i - 1].to_string() + " is followed by " +
                      weeks_[i].to_string());
    }
  }
  check_non_negative(counts_, "death table");
}

DeathTable DeathTable::zeros(Nation nation, Measure measure, WeekIndex first, std::size_t n) {
  std::vector<WeekIndex> weeks;
  weeks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) weeks.push_back(first + static_cast<int>(i));
  return DeathTable(nation, measure, std::move(weeks), std::vector<std::int64_t>(kPlaceCount * n, 0));
}

std::int64_t DeathTable::week_total(std::size_t column) const { return column_sum(counts_, week_count(), column); }

std::int64_t DeathTable::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

std::optional<std::size_t> DeathTable::column_of(WeekIndex week) const {
  const int offset = week - first_week();
  if (offset < 0 || static_cast<std::size_t>(offset) >= week_count()) return std::nullopt;
  return static_cast<std::size_t>(offset);
}

MonthlyTable::MonthlyTable(Nation nation, Measure measure, std::vector<YearMonth> months,
                           std::vector<std::int64_t> counts)
    : nation_(nation), measure_(measure), months_(std::move(months)), counts_(std::move(counts)) {
  check_matrix(months_.size(), counts_.size(), "monthly table");
  for (std::size_t i = 1; i < months_.size(); ++i) {
    if (months_[i] != months_[i - 1].next()) {
      throw DataError("monthly table months must be contiguous; " + months_[i - 1].to_string() +
                      " is followed by " + months_[i].to_string());
    }
  }
  check_non_negative(counts_, "monthly table");
}

std::int64_t MonthlyTable::month_total(std::size_t column) const {
  return column_sum(counts_, month_count(), column);
}

std::int64_t MonthlyTable::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

}  // namespace wavefit
