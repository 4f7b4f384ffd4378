#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"
#include "wavefit/errors.hpp"
#include "wavefit/ingest.hpp"

using namespace wavefit;
using namespace wavefit::ingest;

namespace {

const SourceSpec kOnsCovid{Agency::ONS, "mem", Measure::CovidDeaths, Granularity::Weekly};

std::string full_weeks(std::string_view nation, int year, std::initializer_list<int> weeks, std::string_view count = "0") {
  std::string out;
  for (int w : weeks) {
    for (Place p : kAllPlaces) out += testing::weekly_row(nation, "CovidDeaths", year, w, to_string(p), count);
  }
  return out;
}

Parsed<DeathTable> validate(const std::string& body, const SourceSpec& source = kOnsCovid) {
  std::istringstream in(std::string(kWeeklyHeader) + "\n" + body);
  return validate_weekly_csv(source, in);
}

}  // namespace

TEST_CASE("zero table parses to a 6 x 3 zero matrix") {
  std::istringstream in(std::string(kWeeklyHeader) + "\n" + full_weeks("England", 2020, {10, 11, 12}));
  const DeathTable t = parse_weekly_csv(kOnsCovid, in);
  CHECK(t.nation() == Nation::England);
  CHECK(t.week_count() == 3);
  CHECK(t.counts().size() == 18);
  CHECK(t.total() == 0);
}

TEST_CASE("a missing week is a gap error naming the week") {
  const auto parsed = validate(full_weeks("England", 2020, {11, 13}));
  REQUIRE(parsed.issues.size() == 1);
  CHECK(parsed.issues[0].kind == IssueKind::Gap);
  CHECK(parsed.issues[0].message.find("2020w12") != std::string::npos);
  CHECK(parsed.issues[0].row == 8);  // first row of week 13
  std::istringstream in(std::string(kWeeklyHeader) + "\n" + full_weeks("England", 2020, {11, 13}));
  CHECK_THROWS_AS(parse_weekly_csv(kOnsCovid, in), ParseError);
}

TEST_CASE("negative count is reported with row and column") {
  std::string body = full_weeks("England", 2020, {10});
  body += testing::weekly_row("England", "CovidDeaths", 2020, 11, "Home", "-3");
  const auto parsed = validate(body);
  REQUIRE(parsed.issues.size() >= 1);
  CHECK(parsed.issues[0].kind == IssueKind::NegativeCount);
  CHECK(parsed.issues[0].row == 8);
  CHECK(parsed.issues[0].column == "count");
}

TEST_CASE("duplicate (week, place) rows are rejected") {
  std::string body = full_weeks("England", 2020, {10});
  body += testing::weekly_row("England", "CovidDeaths", 2020, 10, "Hospice", "4");
  const auto parsed = validate(body);
  REQUIRE(parsed.issues.size() == 1);
  CHECK(parsed.issues[0].kind == IssueKind::Duplicate);
  CHECK(parsed.issues[0].row == 8);
}

TEST_CASE("schema errors") {
  SUBCASE("header") {
    std::istringstream in("nation,measure,week,place,count\n");
    const auto parsed = validate_weekly_csv(kOnsCovid, in);
    REQUIRE(parsed.issues.size() == 1);
    CHECK(parsed.issues[0].kind == IssueKind::Header);
  }
  SUBCASE("non-integer count") {
    std::string body = full_weeks("England", 2020, {10});
    body.replace(body.rfind(",0"), 2, ",1.5");
    const auto parsed = validate(body);
    REQUIRE(parsed.issues.size() >= 1);
    CHECK(parsed.issues[0].kind == IssueKind::BadValue);
    CHECK(parsed.issues[0].column == "count");
  }
  SUBCASE("suppressed cell marker") {
    std::string body = full_weeks("England", 2020, {10});
    body.replace(body.rfind(",0"), 2, ",*");
    CHECK_FALSE(validate(body).ok());
  }
  SUBCASE("unknown place") {
    std::string body = full_weeks("England", 2020, {10});
    body += testing::weekly_row("England", "CovidDeaths", 2020, 10, "Prison", "1");
    const auto parsed = validate(body);
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.issues[0].column == "place");
  }
  SUBCASE("missing place is an error, not a zero") {
    std::string body = full_weeks("England", 2020, {10});
    body += testing::weekly_row("England", "CovidDeaths", 2020, 11, "Home", "1");
    const auto parsed = validate(body);
    CHECK(parsed.issues.size() == 5);
    CHECK(parsed.issues[0].kind == IssueKind::Missing);
  }
  SUBCASE("UK rows are never ingested") {
    CHECK_FALSE(validate(full_weeks("UK", 2020, {10})).ok());
  }
  SUBCASE("nation must belong to the agency") {
    const auto parsed = validate(full_weeks("Scotland", 2020, {10}));
    REQUIRE_FALSE(parsed.ok());
    CHECK(parsed.issues[0].kind == IssueKind::Mismatch);
  }
  SUBCASE("invalid ISO week") {
    CHECK_FALSE(validate(full_weeks("England", 2021, {53})).ok());
  }
  SUBCASE("empty file") {
    const auto parsed = validate("");
    REQUIRE(parsed.issues.size() == 1);
    CHECK(parsed.issues[0].kind == IssueKind::Empty);
  }
}

TEST_CASE("NISRA weekly totals are not a valid source") {
  const SourceSpec bad{Agency::NISRA, "x", Measure::TotalDeaths, Granularity::Weekly};
  CHECK_THROWS_AS(bad.validate(), DataError);
  const SourceSpec good{Agency::NISRA, "x", Measure::TotalDeaths, Granularity::Monthly};
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("Northern Ireland weekly COVID-19 fixture totals 830 for January to June 2020") {
  std::ifstream in(std::string(WAVEFIT_FIXTURES) + "/ni_weekly_covid_2020h1.csv");
  REQUIRE(in);
  const SourceSpec source{Agency::NISRA, "ni", Measure::CovidDeaths, Granularity::Weekly};
  const DeathTable t = parse_weekly_csv(source, in);
  CHECK(t.nation() == Nation::NorthernIreland);
  CHECK(t.first_week() == WeekIndex::from_iso(2020, 1));
  CHECK(t.last_week() == WeekIndex::from_iso(2020, 26));
  std::int64_t sum = 0;
  for (std::size_t c = 0; c < t.week_count(); ++c) sum += t.week_total(c);
  CHECK(sum == 830);
}

TEST_CASE("monthly parsing") {
  std::string body;
  for (int m : {1, 2}) {
    for (Place p : kAllPlaces) {
      body += "NorthernIreland,TotalDeaths,2020," + std::to_string(m) + "," + std::string(to_string(p)) + ",7\n";
    }
  }
  std::istringstream in(std::string(kMonthlyHeader) + "\n" + body);
  const MonthlyTable t =
      parse_monthly_csv(SourceSpec{Agency::NISRA, "m", Measure::TotalDeaths, Granularity::Monthly}, in);
  CHECK(t.month_count() == 2);
  CHECK(t.total() == 84);
}

TEST_CASE("write then parse reproduces every count") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const DeathTable original = testing::random_table(rng, Nation::Scotland, Measure::TotalDeaths,
                                                      WeekIndex::from_iso(2020, 40), 5 + trial % 20, 100000);
    std::ostringstream out;
    write_weekly_csv(original, out);
    std::istringstream in(out.str());
    const DeathTable parsed = parse_weekly_csv({Agency::NRS, "s", Measure::TotalDeaths, Granularity::Weekly}, in);
    REQUIRE(parsed == original);
    std::istringstream again(out.str());
    REQUIRE(parse_weekly_csv({Agency::NRS, "s", Measure::TotalDeaths, Granularity::Weekly}, again) == parsed);
  }
}

TEST_CASE("place label mapping") {
  CHECK(map_place_label(Agency::NRS, "Other institutions") == Place::OCE);
  CHECK(map_place_label(Agency::NRS, "Home / Non-institution") == Place::Home);
  CHECK(map_place_label(Agency::ONS, "Care Home") == Place::CareHome);
  CHECK(map_place_label(Agency::ONS, "Other communal establishment") == Place::OCE);
  try {
    map_place_label(Agency::NRS, "Prison");
    FAIL("expected an error");
  } catch (const RangeError& e) {
    const std::string what = e.what();
    CHECK(what.find("Other institutions") != std::string::npos);
    CHECK(what.find("Care Home") != std::string::npos);
  }
}

TEST_CASE("health board aggregation") {
  const WeekIndex w = WeekIndex::from_iso(2020, 15);
  SUBCASE("additivity") {
    const std::vector<BoardRow> rows{{"Lothian", Place::Hospital, w, 3}, {"Tayside", Place::Hospital, w, 4}};
    const DeathTable t = aggregate_health_boards(Nation::Scotland, Measure::CovidDeaths, rows);
    CHECK(t.count(Place::Hospital, 0) == 7);
    CHECK(t.total() == 7);
  }
  SUBCASE("single board passes through") {
    const std::vector<BoardRow> rows{{"Fife", Place::Home, w, 5}, {"Fife", Place::CareHome, w + 1, 2}};
    const DeathTable t = aggregate_health_boards(Nation::Scotland, Measure::CovidDeaths, rows);
    CHECK(t.count(Place::Home, 0) == 5);
    CHECK(t.count(Place::CareHome, 1) == 2);
    CHECK(t.total() == 7);
  }
  SUBCASE("duplicate triple") {
    const std::vector<BoardRow> rows{{"Fife", Place::Home, w, 5}, {"Fife", Place::Home, w, 2}};
    CHECK_THROWS_AS(aggregate_health_boards(Nation::Scotland, Measure::CovidDeaths, rows), DataError);
  }
  SUBCASE("week gap") {
    const std::vector<BoardRow> rows{{"Fife", Place::Home, w, 5}, {"Fife", Place::Home, w + 2, 2}};
    CHECK_THROWS_AS(aggregate_health_boards(Nation::Scotland, Measure::CovidDeaths, rows), DataError);
  }
}

TEST_CASE("14 boards aggregate like a brute-force group-by") {
  std::mt19937_64 rng(2020);
  std::uniform_int_distribution<int> count(0, 9);
  const std::array<Place, 4> nrs_places{Place::CareHome, Place::Home, Place::Hospital, Place::OCE};
  std::vector<BoardRow> rows;
  for (int b = 0; b < 14; ++b) {
    for (int week = 10; week <= 20; ++week) {
      for (Place p : nrs_places) {
        if (count(rng) < 3) continue;  // boards may omit cells
        rows.push_back({"board" + std::to_string(b), p, WeekIndex::from_iso(2020, week), count(rng)});
      }
    }
  }
  std::map<std::pair<Place, int>, std::int64_t> oracle;
  std::int64_t input_sum = 0;
  for (const BoardRow& r : rows) {
    oracle[{r.place, r.week.iso_week()}] += r.count;
    input_sum += r.count;
  }
  const DeathTable t = aggregate_health_boards(Nation::Scotland, Measure::TotalDeaths, rows);
  CHECK(t.total() == input_sum);
  for (Place p : kAllPlaces) {
    for (int week = 10; week <= 20; ++week) {
      const auto it = oracle.find({p, week});
      CHECK(t.count(p, static_cast<std::size_t>(week - 10)) == (it == oracle.end() ? 0 : it->second));
    }
  }
}

TEST_CASE("health board CSV maps agency labels") {
  std::istringstream in(std::string(kHealthBoardHeader) +
                        "\nScotland,CovidDeaths,Lothian,2020,15,Other institutions,2\n"
                        "Scotland,CovidDeaths,Fife,2020,15,Other institutions,3\n"
                        "Scotland,CovidDeaths,Fife,2020,15,Home / Non-institution,1\n");
  Nation nation{};
  const auto rows =
      parse_health_board_csv({Agency::NRS, "b", Measure::CovidDeaths, Granularity::Weekly}, in, &nation);
  CHECK(nation == Nation::Scotland);
  const DeathTable t = aggregate_health_boards(nation, Measure::CovidDeaths, rows);
  CHECK(t.count(Place::OCE, 0) == 5);
  CHECK(t.count(Place::Home, 0) == 1);
}

TEST_CASE("UK composite") {
  std::mt19937_64 rng(11);
  const WeekIndex start = WeekIndex::from_iso(2020, 10);

  SUBCASE("total deaths omit Northern Ireland even when supplied") {
    const DeathTable ew = testing::random_table(rng, Nation::EnglandAndWales, Measure::TotalDeaths, start, 8);
    const DeathTable sc = testing::random_table(rng, Nation::Scotland, Measure::TotalDeaths, start, 8);
    const DeathTable ni = testing::random_table(rng, Nation::NorthernIreland, Measure::TotalDeaths, start, 8);
    const DeathTable uk = combine_uk(ew, sc, ni);
    CHECK(uk.nation() == Nation::UK);
    CHECK(uk.total() == ew.total() + sc.total());
    CHECK(uk == combine_uk(ew, sc));
  }
  SUBCASE("all-zero COVID-19 tables give a zero table") {
    const auto z = [&](Nation n) { return DeathTable::zeros(n, Measure::CovidDeaths, start, 4); };
    CHECK(combine_uk(z(Nation::EnglandAndWales), z(Nation::Scotland), z(Nation::NorthernIreland)).total() == 0);
  }
  SUBCASE("COVID-19 composite equals brute-force triple addition on the shared weeks") {
    for (int trial = 0; trial < 20; ++trial) {
      const DeathTable ew = testing::random_table(rng, Nation::EnglandAndWales, Measure::CovidDeaths, start, 20);
      const DeathTable sc = testing::random_table(rng, Nation::Scotland, Measure::CovidDeaths, start + 2, 20);
      const DeathTable ni = testing::random_table(rng, Nation::NorthernIreland, Measure::CovidDeaths, start - 3, 15);
      const DeathTable uk = combine_uk(ew, sc, ni);
      REQUIRE(uk.first_week() == start + 2);
      REQUIRE(uk.last_week() == start + 11);
      for (std::size_t c = 0; c < uk.week_count(); ++c) {
        const WeekIndex w = uk.weeks()[c];
        for (Place p : kAllPlaces) {
          const std::int64_t expected = ew.count(p, *ew.column_of(w)) + sc.count(p, *sc.column_of(w)) +
                                        ni.count(p, *ni.column_of(w));
          REQUIRE(uk.count(p, c) == expected);
        }
      }
    }
  }
  SUBCASE("errors") {
    const DeathTable ew = testing::random_table(rng, Nation::EnglandAndWales, Measure::CovidDeaths, start, 4);
    const DeathTable sc_total = testing::random_table(rng, Nation::Scotland, Measure::TotalDeaths, start, 4);
    const DeathTable sc_late = testing::random_table(rng, Nation::Scotland, Measure::CovidDeaths, start + 10, 4);
    CHECK_THROWS_AS(combine_uk(ew, sc_total), DataError);
    CHECK_THROWS_AS(combine_uk(ew, sc_late), DataError);
    CHECK_THROWS_AS(combine_uk(sc_late, ew), DataError);
  }
}
