#include "wavefit/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "wavefit/errors.hpp"
#include "wavefit/format.hpp"

namespace wavefit::transform {

namespace {

constexpr std::array<std::string_view, 3> kKindNames{"DeathsDueToCovid", "ProportionOfCovidDeaths",
                                                     "SumOfPlaceRatios"};

std::optional<double> percent(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) return std::nullopt;
  return 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

void require_pair(const DeathTable& covid, const DeathTable& total) {
  if (covid.measure() != Measure::CovidDeaths) throw DataError("first table must hold COVID-19 deaths");
  if (total.measure() != Measure::TotalDeaths) throw DataError("second table must hold total deaths");
  if (covid.nation() != total.nation()) {
    throw DataError("nation mismatch: " + std::string(to_string(covid.nation())) + " vs " +
                    std::string(to_string(total.nation())));
  }
  if (covid.first_week() != total.first_week() || covid.week_count() != total.week_count()) {
    throw DataError("week range mismatch: " + covid.first_week().to_string() + ".." + covid.last_week().to_string() +
                    " vs " + total.first_week().to_string() + ".." + total.last_week().to_string());
  }
}

ProportionSeries empty_like(const DeathTable& table, std::optional<Place> place, SeriesKind kind) {
  ProportionSeries s;
  s.nation = table.nation();
  s.place = place;
  s.kind = kind;
  s.weeks.assign(table.weeks().begin(), table.weeks().end());
  s.values.reserve(table.week_count());
  return s;
}

}  // namespace

std::string_view to_string(SeriesKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::size_t ProportionSeries::defined_count() const {
  std::size_t n = 0;
  for (const auto& v : values) n += v.has_value();
  return n;
}

std::vector<std::size_t> ProportionSeries::above_hundred() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] && *values[i] > 100.0) out.push_back(i);
  }
  return out;
}

std::string_view ProportionSeries::place_label() const { return place ? to_string(*place) : "All"; }

PlaceSeries deaths_due_to_covid(const DeathTable& covid, const DeathTable& total) {
  require_pair(covid, total);
  PlaceSeries out;
  for (Place place : kAllPlaces) {
    ProportionSeries s = empty_like(covid, place, SeriesKind::DeathsDueToCovid);
    for (std::size_t c = 0; c < covid.week_count(); ++c) s.values.push_back(percent(covid.count(place, c), total.count(place, c)));
    out[index_of(place)] = std::move(s);
  }
  return out;
}

ProportionSeries national_deaths_due_to_covid(const DeathTable& covid, const DeathTable& total) {
  require_pair(covid, total);
  ProportionSeries s = empty_like(covid, std::nullopt, SeriesKind::DeathsDueToCovid);
  for (std::size_t c = 0; c < covid.week_count(); ++c) s.values.push_back(percent(covid.week_total(c), total.week_total(c)));
  return s;
}

ProportionSeries national_sum_of_ratios(const DeathTable& covid, const DeathTable& total) {
  const PlaceSeries per_place = deaths_due_to_covid(covid, total);
  ProportionSeries s = empty_like(covid, std::nullopt, SeriesKind::SumOfPlaceRatios);
  for (std::size_t c = 0; c < covid.week_count(); ++c) {
    std::optional<double> sum;
    for (const ProportionSeries& p : per_place) {
      if (p.values[c]) sum = sum.value_or(0.0) + *p.values[c];
    }
    s.values.push_back(sum);
  }
  return s;
}

PlaceSeries proportion_of_covid_deaths(const DeathTable& covid) {
  if (covid.measure() != Measure::CovidDeaths) throw DataError("proportion of COVID-19 deaths needs a COVID-19 table");
  PlaceSeries out;
  for (Place place : kAllPlaces) {
    ProportionSeries s = empty_like(covid, place, SeriesKind::ProportionOfCovidDeaths);
    for (std::size_t c = 0; c < covid.week_count(); ++c) s.values.push_back(percent(covid.count(place, c), covid.week_total(c)));
    out[index_of(place)] = std::move(s);
  }
  return out;
}

MonthlySeries monthly_deaths_due_to_covid(const MonthlyTable& covid, const MonthlyTable& total,
                                          std::optional<Place> place) {
  if (covid.measure() != Measure::CovidDeaths || total.measure() != Measure::TotalDeaths) {
    throw DataError("monthly ratio needs a COVID-19 table and a total-deaths table");
  }
  if (covid.nation() != total.nation()) throw DataError("monthly tables disagree on nation");
  if (!std::equal(covid.months().begin(), covid.months().end(), total.months().begin(), total.months().end())) {
    throw DataError("monthly tables cover different months");
  }
  MonthlySeries s;
  s.nation = covid.nation();
  s.place = place;
  s.months.assign(covid.months().begin(), covid.months().end());
  for (std::size_t c = 0; c < covid.month_count(); ++c) {
    s.values.push_back(place ? percent(covid.count(*place, c), total.count(*place, c))
                             : percent(covid.month_total(c), total.month_total(c)));
  }
  return s;
}

std::vector<AlignedPoint> align_monthly_to_weekly(const MonthlyTable& monthly, const DeathTable& weekly) {
  if (monthly.measure() != Measure::CovidDeaths || weekly.measure() != Measure::CovidDeaths) {
    throw DataError("alignment uses COVID-19 deaths for both the monthly and weekly tables");
  }
  std::vector<AlignedPoint> out;
  for (std::size_t m = 0; m < monthly.month_count(); ++m) {
    const YearMonth month = monthly.months()[m];
    const std::vector<WeekIndex> weeks = weeks_in_month(month);
    const double monthly_value = static_cast<double>(monthly.month_total(m));
    const double per_week = monthly_value / static_cast<double>(weeks.size());

    std::optional<WeekIndex> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (WeekIndex week : weeks) {
      const auto column = weekly.column_of(week);
      if (!column) continue;
      const double distance = std::abs(per_week - static_cast<double>(weekly.week_total(*column)));
      if (distance < best_distance) {
        best_distance = distance;
        best = week;
      }
    }
    if (!best) throw DataError("month " + month.to_string() + " has no overlapping weekly data");
    out.push_back(AlignedPoint{month, *best, monthly_value, per_week});
  }
  return out;
}

ProportionSeries place_on_aligned_weeks(const MonthlySeries& monthly, std::span<const AlignedPoint> alignment) {
  if (alignment.empty()) throw DataError("empty alignment");
  ProportionSeries s;
  s.nation = monthly.nation;
  s.place = monthly.place;
  s.kind = monthly.kind;
  const WeekIndex first = alignment.front().week;
  const WeekIndex last = alignment.back().week;
  for (WeekIndex w = first; w <= last; w = w + 1) s.weeks.push_back(w);
  s.values.assign(s.weeks.size(), std::nullopt);
  for (const AlignedPoint& point : alignment) {
    for (std::size_t m = 0; m < monthly.months.size(); ++m) {
      if (monthly.months[m] == point.month) s.values[static_cast<std::size_t>(point.week - first)] = monthly.values[m];
    }
  }
  return s;
}

void write_series_csv(std::span<const ProportionSeries> series, std::ostream& out) {
  out << kSeriesCsvHeader << '\n';
  for (const ProportionSeries& s : series) {
    for (std::size_t i = 0; i < s.weeks.size(); ++i) {
      out << to_string(s.nation) << ',' << s.place_label() << ',' << to_string(s.kind) << ',' << s.weeks[i].iso_year()
          << ',' << s.weeks[i].iso_week() << ',';
      if (s.values[i]) out << format_number(*s.values[i]);
      out << '\n';
    }
  }
}

}  // namespace wavefit::transform
