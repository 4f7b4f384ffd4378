#include "wavefit/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "wavefit/errors.hpp"

namespace wavefit::ingest {

namespace {

constexpr std::array<std::string_view, 3> kAgencyNames{"ONS", "NRS", "NISRA"};
constexpr std::array<std::string_view, 3> kLayoutNames{"weekly", "monthly", "health_board"};
constexpr std::array<std::string_view, 9> kIssueNames{"header",    "field_count", "bad_value", "negative_count",
                                                      "duplicate", "missing",     "gap",       "mismatch",
                                                      "empty"};

// ONS and NISRA publish the same six categories.
constexpr std::array<std::string_view, 6> kOnsLabels{"Home",      "Hospital", "Hospice",
                                                     "Care Home", "Other communal establishment", "Elsewhere"};
constexpr std::array<Place, 6> kOnsPlaces{Place::Home,     Place::Hospital, Place::Hospice,
                                          Place::CareHome, Place::OCE,      Place::Elsewhere};
constexpr std::array<std::string_view, 4> kNrsLabels{"Care Home", "Home / Non-institution", "Hospital",
                                                     "Other institutions"};
constexpr std::array<Place, 4> kNrsPlaces{Place::CareHome, Place::Home, Place::Hospital, Place::OCE};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

template <typename Int>
std::optional<Int> parse_integer(std::string_view text) {
  if (text.empty() || text.front() == '+') return std::nullopt;
  Int value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value, 10);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

bool nation_matches_agency(Nation nation, Agency agency) {
  return !is_aggregate(nation) ? agency_for(nation) == agency
                               : nation == Nation::EnglandAndWales && agency == Agency::ONS;
}

// Shared validation for the weekly and monthly layouts, which differ only in how
// the two period columns are interpreted.
template <typename Period, typename Table, typename MakePeriod, typename NextPeriod>
Parsed<Table> validate_table(const SourceSpec& source, std::istream& content, std::string_view header,
                             std::array<std::string_view, 2> period_columns, MakePeriod make_period,
                             NextPeriod next_period) {
  Parsed<Table> result;
  auto issue = [&](IssueKind kind, std::size_t row, std::string column, std::string message) {
    result.issues.push_back(Issue{kind, row, std::move(column), std::move(message)});
  };

  try {
    source.validate();
  } catch (const Error& e) {
    issue(IssueKind::Mismatch, 0, "", e.what());
  }

  std::string line;
  if (!std::getline(content, line) || strip_cr(line) != header) {
    issue(IssueKind::Header, 1, "", "malformed header, expected '" + std::string(header) + "'");
    return result;
  }

  struct Cell {
    std::int64_t count;
    std::size_t row;
  };
  std::map<std::pair<Period, Place>, Cell> cells;
  std::map<Period, std::size_t> first_row_of_period;
  std::set<std::pair<Period, Place>> present;
  std::optional<Nation> nation;
  const std::array<std::string_view, 6> columns{"nation", "measure", period_columns[0], period_columns[1], "place",
                                                "count"};

  std::size_t row = 1;
  while (std::getline(content, line)) {
    ++row;
    const std::string_view text = strip_cr(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (fields.size() != columns.size()) {
      issue(IssueKind::FieldCount, row, "",
            "expected " + std::to_string(columns.size()) + " fields, found " + std::to_string(fields.size()));
      continue;
    }

    bool row_ok = true;
    try {
      const Nation row_nation = parse_nation(fields[0]);
      if (row_nation == Nation::UK) {
        issue(IssueKind::BadValue, row, "nation", "UK is a derived aggregate and cannot be ingested");
        row_ok = false;
      } else if (!nation) {
        nation = row_nation;
        if (!nation_matches_agency(row_nation, source.agency)) {
          issue(IssueKind::Mismatch, row, "nation",
                std::string(to_string(row_nation)) + " is not published by " + std::string(to_string(source.agency)));
        }
      } else if (*nation != row_nation) {
        issue(IssueKind::Mismatch, row, "nation",
              "file mixes nations " + std::string(to_string(*nation)) + " and " + std::string(to_string(row_nation)));
        row_ok = false;
      }
    } catch (const RangeError& e) {
      issue(IssueKind::BadValue, row, "nation", e.what());
      row_ok = false;
    }

    try {
      if (parse_measure(fields[1]) != source.measure) {
        issue(IssueKind::Mismatch, row, "measure",
              "expected " + std::string(to_string(source.measure)) + ", found " + std::string(fields[1]));
        row_ok = false;
      }
    } catch (const RangeError& e) {
      issue(IssueKind::BadValue, row, "measure", e.what());
      row_ok = false;
    }

    std::optional<Period> period;
    const auto year = parse_integer<int>(fields[2]);
    const auto sub = parse_integer<int>(fields[3]);
    if (!year) {
      issue(IssueKind::BadValue, row, std::string(columns[2]), "not an integer: '" + std::string(fields[2]) + "'");
    } else if (!sub) {
      issue(IssueKind::BadValue, row, std::string(columns[3]), "not an integer: '" + std::string(fields[3]) + "'");
    } else {
      try {
        period = make_period(*year, *sub);
      } catch (const RangeError& e) {
        issue(IssueKind::BadValue, row, std::string(columns[3]), e.what());
      }
    }

    std::optional<Place> place;
    try {
      place = parse_place(fields[4]);
    } catch (const RangeError& e) {
      issue(IssueKind::BadValue, row, "place", e.what());
    }

    const auto count = parse_integer<std::int64_t>(fields[5]);
    if (!count) {
      issue(IssueKind::BadValue, row, "count", "not a base-10 integer: '" + std::string(fields[5]) + "'");
    } else if (*count < 0) {
      issue(IssueKind::NegativeCount, row, "count", "negative count " + std::string(fields[5]));
    }

    if (!row_ok || !count || *count < 0) {
      // The cell has a row, just not a usable one; do not also report it missing.
      if (period && place) {
        present.emplace(*period, *place);
        first_row_of_period.emplace(*period, row);
      }
      continue;
    }
    if (!period || !place) continue;

    const auto key = std::make_pair(*period, *place);
    if (auto it = cells.find(key); it != cells.end()) {
      issue(IssueKind::Duplicate, row, "",
            "duplicate row for (" + period->to_string() + ", " + std::string(to_string(*place)) +
                "), first seen on row " + std::to_string(it->second.row));
      continue;
    }
    cells.emplace(key, Cell{*count, row});
    first_row_of_period.emplace(*period, row);
  }

  if (first_row_of_period.empty()) {
    issue(IssueKind::Empty, 0, "", "no data rows");
    return result;
  }

  std::vector<Period> periods;
  for (Period p = first_row_of_period.begin()->first; p <= first_row_of_period.rbegin()->first; p = next_period(p)) {
    periods.push_back(p);
  }

  for (const Period& p : periods) {
    auto it = first_row_of_period.find(p);
    if (it == first_row_of_period.end()) {
      const auto after = first_row_of_period.upper_bound(p);
      issue(IssueKind::Gap, after->second, std::string(period_columns[1]),
            "gap in sequence: " + p.to_string() + " has no rows");
      continue;
    }
    for (Place place : kAllPlaces) {
      if (!cells.contains({p, place}) && !present.contains({p, place})) {
        issue(IssueKind::Missing, it->second, "place",
              "missing count for (" + p.to_string() + ", " + std::string(to_string(place)) + ")");
      }
    }
  }

  if (!result.issues.empty()) return result;

  std::vector<std::int64_t> counts(kPlaceCount * periods.size());
  for (std::size_t p = 0; p < kPlaceCount; ++p) {
    for (std::size_t c = 0; c < periods.size(); ++c) {
      counts[p * periods.size() + c] = cells.at({periods[c], kAllPlaces[p]}).count;
    }
  }
  result.table.emplace(*nation, source.measure, std::move(periods), std::move(counts));
  return result;
}

template <typename Table>
Table throw_first(Parsed<Table> parsed) {
  if (!parsed.issues.empty()) {
    const Issue& first = parsed.issues.front();
    throw ParseError(first.row, first.column, first.message);
  }
  return std::move(*parsed.table);
}

}  // namespace

std::string_view to_string(Agency a) { return kAgencyNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Layout l) { return kLayoutNames[static_cast<std::size_t>(l)]; }
std::string_view to_string(IssueKind k) { return kIssueNames[static_cast<std::size_t>(k)]; }

Agency agency_for(Nation nation) {
  switch (nation) {
    case Nation::England:
    case Nation::Wales:
    case Nation::EnglandAndWales:
      return Agency::ONS;
    case Nation::Scotland:
      return Agency::NRS;
    case Nation::NorthernIreland:
      return Agency::NISRA;
    case Nation::UK:
      break;
  }
  throw RangeError("UK is composed from several agencies");
}

void SourceSpec::validate() const {
  if (agency == Agency::NISRA && measure == Measure::TotalDeaths && granularity != Granularity::Monthly) {
    throw DataError("NISRA all-cause deaths by place are only available monthly");
  }
}

Parsed<DeathTable> validate_weekly_csv(const SourceSpec& source, std::istream& content) {
  return validate_table<WeekIndex, DeathTable>(
      source, content, kWeeklyHeader, {"iso_year", "iso_week"},
      [](int year, int week) { return WeekIndex::from_iso(year, week); },
      [](WeekIndex w) { return w + 1; });
}

Parsed<MonthlyTable> validate_monthly_csv(const SourceSpec& source, std::istream& content) {
  return validate_table<YearMonth, MonthlyTable>(
      source, content, kMonthlyHeader, {"year", "month"}, [](int year, int month) { return YearMonth::make(year, month); },
      [](YearMonth m) { return m.next(); });
}

DeathTable parse_weekly_csv(const SourceSpec& source, std::istream& content) {
  return throw_first(validate_weekly_csv(source, content));
}

MonthlyTable parse_monthly_csv(const SourceSpec& source, std::istream& content) {
  return throw_first(validate_monthly_csv(source, content));
}

void write_weekly_csv(const DeathTable& table, std::ostream& out) {
  out << kWeeklyHeader << '\n';
  for (std::size_t c = 0; c < table.week_count(); ++c) {
    const WeekIndex week = table.weeks()[c];
    for (Place place : kAllPlaces) {
      out << to_string(table.nation()) << ',' << to_string(table.measure()) << ',' << week.iso_year() << ','
          << week.iso_week() << ',' << to_string(place) << ',' << table.count(place, c) << '\n';
    }
  }
}

void write_monthly_csv(const MonthlyTable& table, std::ostream& out) {
  out << kMonthlyHeader << '\n';
  for (std::size_t c = 0; c < table.month_count(); ++c) {
    const YearMonth month = table.months()[c];
    for (Place place : kAllPlaces) {
      out << to_string(table.nation()) << ',' << to_string(table.measure()) << ',' << month.year << ','
          << month.month << ',' << to_string(place) << ',' << table.count(place, c) << '\n';
    }
  }
}

SniffedSource sniff_source(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  const std::string_view h = strip_cr(header);

  Layout layout{};
  if (h == kWeeklyHeader) {
    layout = Layout::Weekly;
  } else if (h == kMonthlyHeader) {
    layout = Layout::Monthly;
  } else if (h == kHealthBoardHeader) {
    layout = Layout::HealthBoard;
  } else {
    throw ParseError(1, "", "unrecognised header in " + path.string());
  }

  std::string first;
  while (std::getline(in, first) && strip_cr(first).empty()) {
  }
  const auto fields = split_fields(strip_cr(first));
  if (fields.size() < 2) throw ParseError(2, "", "no data rows in " + path.string());

  SniffedSource sniffed{};
  try {
    sniffed.nation = parse_nation(fields[0]);
    sniffed.source.measure = parse_measure(fields[1]);
  } catch (const RangeError& e) {
    throw ParseError(2, "", e.what());
  }
  if (sniffed.nation == Nation::UK) throw ParseError(2, "nation", "UK is a derived aggregate and cannot be ingested");
  sniffed.layout = layout;
  sniffed.source.agency = agency_for(sniffed.nation);
  sniffed.source.path = path;
  sniffed.source.granularity = layout == Layout::Monthly ? Granularity::Monthly : Granularity::Weekly;
  return sniffed;
}

std::span<const std::string_view> place_labels(Agency agency) {
  if (agency == Agency::NRS) return kNrsLabels;
  return kOnsLabels;
}

Place map_place_label(Agency agency, std::string_view raw_label) {
  const auto labels = place_labels(agency);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == raw_label) return agency == Agency::NRS ? kNrsPlaces[i] : kOnsPlaces[i];
  }
  std::string valid;
  for (auto label : labels) {
    if (!valid.empty()) valid += "; ";
    valid += label;
  }
  throw RangeError("unrecognised " + std::string(to_string(agency)) + " place label '" + std::string(raw_label) +
                   "' (valid: " + valid + ")");
}

DeathTable aggregate_health_boards(Nation nation, Measure measure, std::span<const BoardRow> rows) {
  if (rows.empty()) throw DataError("no health board rows to aggregate");

  std::set<std::tuple<std::string_view, Place, int>> seen;
  int first = rows.front().week.ordinal();
  int last = first;
  for (const BoardRow& r : rows) {
    if (r.count < 0) throw DataError("negative count for board " + r.board);
    if (!seen.emplace(r.board, r.place, r.week.ordinal()).second) {
      throw DataError("duplicate row for board " + r.board + " (" + std::string(to_string(r.place)) + ", " +
                      r.week.to_string() + ")");
    }
    first = std::min(first, r.week.ordinal());
    last = std::max(last, r.week.ordinal());
  }

  const auto n = static_cast<std::size_t>(last - first + 1);
  std::vector<bool> week_seen(n, false);
  std::vector<std::int64_t> counts(kPlaceCount * n, 0);
  for (const BoardRow& r : rows) {
    const auto column = static_cast<std::size_t>(r.week.ordinal() - first);
    counts[index_of(r.place) * n + column] += r.count;
    week_seen[column] = true;
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (!week_seen[c]) {
      throw DataError("gap in health board weeks: " + WeekIndex::from_ordinal(first + static_cast<int>(c)).to_string() +
                      " has no rows");
    }
  }

  std::vector<WeekIndex> weeks;
  for (std::size_t c = 0; c < n; ++c) weeks.push_back(WeekIndex::from_ordinal(first + static_cast<int>(c)));
  return DeathTable(nation, measure, std::move(weeks), std::move(counts));
}

std::vector<BoardRow> parse_health_board_csv(const SourceSpec& source, std::istream& content, Nation* nation_out) {
  std::string line;
  if (!std::getline(content, line) || strip_cr(line) != kHealthBoardHeader) {
    throw ParseError(1, "", "malformed header, expected '" + std::string(kHealthBoardHeader) + "'");
  }
  std::vector<BoardRow> rows;
  std::optional<Nation> nation;
  std::size_t row = 1;
  while (std::getline(content, line)) {
    ++row;
    const std::string_view text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 7) throw ParseError(row, "", "expected 7 fields, found " + std::to_string(f.size()));
    try {
      const Nation n = parse_nation(f[0]);
      if (n == Nation::UK) throw ParseError(row, "nation", "UK is a derived aggregate and cannot be ingested");
      if (nation && *nation != n) throw ParseError(row, "nation", "file mixes nations");
      nation = n;
      if (parse_measure(f[1]) != source.measure) throw ParseError(row, "measure", "measure does not match source");
    } catch (const RangeError& e) {
      throw ParseError(row, "", e.what());
    }
    if (f[2].empty()) throw ParseError(row, "board", "empty board name");
    const auto year = parse_integer<int>(f[3]);
    const auto week = parse_integer<int>(f[4]);
    if (!year || !week) throw ParseError(row, "iso_week", "malformed ISO year/week");
    const auto count = parse_integer<std::int64_t>(f[6]);
    if (!count) throw ParseError(row, "count", "not a base-10 integer: '" + std::string(f[6]) + "'");
    if (*count < 0) throw ParseError(row, "count", "negative count " + std::string(f[6]));
    try {
      rows.push_back(BoardRow{std::string(f[2]), map_place_label(source.agency, f[5]), WeekIndex::from_iso(*year, *week),
                              *count});
    } catch (const RangeError& e) {
      throw ParseError(row, "", e.what());
    }
  }
  if (nation_out && nation) *nation_out = *nation;
  return rows;
}

DeathTable combine_uk(const DeathTable& england_wales, const DeathTable& scotland,
                      const std::optional<DeathTable>& northern_ireland) {
  if (england_wales.nation() != Nation::EnglandAndWales) throw DataError("first table must be EnglandAndWales");
  if (scotland.nation() != Nation::Scotland) throw DataError("second table must be Scotland");
  const Measure measure = england_wales.measure();
  if (scotland.measure() != measure) throw DataError("measure mismatch between England+Wales and Scotland");

  const bool include_ni = northern_ireland.has_value() && measure == Measure::CovidDeaths;
  if (northern_ireland) {
    if (northern_ireland->nation() != Nation::NorthernIreland) throw DataError("third table must be NorthernIreland");
    if (northern_ireland->measure() != measure) throw DataError("measure mismatch with Northern Ireland");
  }

  std::vector<const DeathTable*> parts{&england_wales, &scotland};
  if (include_ni) parts.push_back(&*northern_ireland);

  WeekIndex first = england_wales.first_week();
  WeekIndex last = england_wales.last_week();
  for (const DeathTable* t : parts) {
    first = std::max(first, t->first_week());
    last = std::min(last, t->last_week());
  }
  if (last < first) throw DataError("UK composite: input tables share no weeks");

  const auto n = static_cast<std::size_t>(last - first + 1);
  std::vector<WeekIndex> weeks;
  for (std::size_t c = 0; c < n; ++c) weeks.push_back(first + static_cast<int>(c));
  std::vector<std::int64_t> counts(kPlaceCount * n, 0);
  for (const DeathTable* t : parts) {
    const std::size_t offset = *t->column_of(first);
    for (Place place : kAllPlaces) {
      for (std::size_t c = 0; c < n; ++c) counts[index_of(place) * n + c] += t->count(place, offset + c);
    }
  }
  return DeathTable(Nation::UK, measure, std::move(weeks), std::move(counts));
}

}  // namespace wavefit::ingest
