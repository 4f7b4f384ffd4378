#pragma once

// Canonical CSV ingestion for agency death tables.
//
// Weekly:       nation,measure,iso_year,iso_week,place,count
// Monthly:      nation,measure,year,month,place,count
// Health board: nation,measure,board,iso_year,iso_week,place,count
//
// Weekly and monthly files spell places exactly as Home, Hospital, Hospice,
// CareHome, OCE, Elsewhere. Health-board files carry the agency's own place
// labels and are mapped through map_place_label before aggregation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavefit/core_types.hpp"

namespace wavefit::ingest {

enum class Agency : std::uint8_t { ONS, NRS, NISRA };
enum class Granularity : std::uint8_t { Weekly, Monthly };
enum class Layout : std::uint8_t { Weekly, Monthly, HealthBoard };

std::string_view to_string(Agency a);
std::string_view to_string(Layout l);

/// Agency publishing data for a raw-ingested nation. UK has no agency.
Agency agency_for(Nation nation);

struct SourceSpec {
  Agency agency{Agency::ONS};
  std::filesystem::path path;
  Measure measure{Measure::CovidDeaths};
  Granularity granularity{Granularity::Weekly};

  /// NISRA publishes all-cause deaths by place only monthly; rejects NISRA weekly totals.
  void validate() const;
};

inline constexpr std::string_view kWeeklyHeader = "nation,measure,iso_year,iso_week,place,count";
inline constexpr std::string_view kMonthlyHeader = "nation,measure,year,month,place,count";
inline constexpr std::string_view kHealthBoardHeader = "nation,measure,board,iso_year,iso_week,place,count";

enum class IssueKind : std::uint8_t { Header, FieldCount, BadValue, NegativeCount, Duplicate, Missing, Gap, Mismatch, Empty };

std::string_view to_string(IssueKind k);

/// One schema problem. `row` is the 1-based line number, 0 when not tied to a row.
struct Issue {
  IssueKind kind;
  std::size_t row;
  std::string column;
  std::string message;
};

template <typename Table>
struct Parsed {
  std::optional<Table> table;
  std::vector<Issue> issues;

  bool ok() const { return issues.empty(); }
};

/// Collects every schema issue instead of stopping at the first.
Parsed<DeathTable> validate_weekly_csv(const SourceSpec& source, std::istream& content);
Parsed<MonthlyTable> validate_monthly_csv(const SourceSpec& source, std::istream& content);

/// Throws ParseError for the first issue found.
DeathTable parse_weekly_csv(const SourceSpec& source, std::istream& content);
MonthlyTable parse_monthly_csv(const SourceSpec& source, std::istream& content);

void write_weekly_csv(const DeathTable& table, std::ostream& out);
void write_monthly_csv(const MonthlyTable& table, std::ostream& out);

/// Reads the header and first data row of a file to infer its layout and SourceSpec.
struct SniffedSource {
  SourceSpec source;
  Layout layout;
  Nation nation;
};
SniffedSource sniff_source(const std::filesystem::path& path);

// --- place labels -------------------------------------------------------------

/// Documented place labels per agency, in a fixed order.
std::span<const std::string_view> place_labels(Agency agency);

/// NRS "Other institutions" maps to OCE and "Home / Non-institution" to Home;
/// all other labels must match exactly. Unknown labels throw RangeError.
Place map_place_label(Agency agency, std::string_view raw_label);

// --- health boards ------------------------------------------------------------

struct BoardRow {
  std::string board;
  Place place;
  WeekIndex week;
  std::int64_t count;
};

/// Sums counts over boards per (place, week). Places no board reports stay zero;
/// a week absent from every row is a gap.
DeathTable aggregate_health_boards(Nation nation, Measure measure, std::span<const BoardRow> rows);

/// Parses a health-board file into rows (labels mapped through map_place_label).
std::vector<BoardRow> parse_health_board_csv(const SourceSpec& source, std::istream& content,
                                             Nation* nation_out = nullptr);

// --- UK composite -------------------------------------------------------------

/// Per-cell sum of England+Wales, Scotland and (for COVID deaths only) Northern
/// Ireland over the weeks all supplied tables share. Northern Ireland weekly
/// totals do not exist, so a TotalDeaths NI table is ignored.
DeathTable combine_uk(const DeathTable& england_wales, const DeathTable& scotland,
                      const std::optional<DeathTable>& northern_ireland = std::nullopt);

}  // namespace wavefit::ingest
