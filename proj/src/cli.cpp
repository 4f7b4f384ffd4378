#include "wavefit/cli.hpp"

#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "wavefit/errors.hpp"
#include "wavefit/format.hpp"
#include "wavefit/ingest.hpp"
#include "wavefit/report.hpp"

namespace wavefit::cli {

namespace fs = std::filesystem;
using analysis::CellStatus;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_table(const fs::path& dir, const std::string& name, const report::Table& table,
                 const std::set<Format>& formats) {
  if (formats.contains(Format::Csv)) {
    write_file(dir / (name + ".csv"), [&](std::ostream& o) { report::write_csv(table, o); });
  }
  if (formats.contains(Format::Json)) {
    write_file(dir / (name + ".json"), [&](std::ostream& o) { o << report::to_json(table).dump(2) << '\n'; });
  }
  if (formats.contains(Format::Markdown)) {
    write_file(dir / (name + ".md"), [&](std::ostream& o) { report::write_markdown(table, o); });
  }
}

std::string key(Nation n, Measure m, std::string_view granularity) {
  return std::string(to_string(n)) + " " + std::string(to_string(m)) + " " + std::string(granularity);
}

template <typename Table>
void insert_unique(std::map<Nation, Table>& map, Table table, const std::string& what) {
  const Nation n = table.nation();
  if (!map.emplace(n, std::move(table)).second) throw DataError("more than one input for " + what);
}

void print_issues(const fs::path& path, std::span<const ingest::Issue> issues, std::ostream& out) {
  out << path.string() << ": " << issues.size() << (issues.size() == 1 ? " issue\n" : " issues\n");
  for (const auto& i : issues) {
    out << "  row " << i.row;
    if (!i.column.empty()) out << ", column '" << i.column << "'";
    out << ": [" << ingest::to_string(i.kind) << "] " << i.message << '\n';
  }
}

nlohmann::ordered_json quarantine_entry(const analysis::CellResult& cell) {
  nlohmann::ordered_json j;
  j["cell"] = cell.id.stem();
  j["series"] = std::string(transform::to_string(cell.id.kind));
  j["status"] = std::string(analysis::to_string(cell.status));
  j["message"] = cell.message;
  j["points"] = static_cast<std::int64_t>(cell.defined_points);
  if (cell.fit) {
    auto points = nlohmann::ordered_json::array();
    for (const auto& p : cell.fit->points) points.push_back({p.t, p.value});
    j["data"] = std::move(points);
    j["initial"] = std::vector<double>(cell.fit->theta0.begin(), cell.fit->theta0.end());
    j["best"] = std::vector<double>(cell.fit->fit.theta_hat.begin(), cell.fit->fit.theta_hat.end());
    j["iterations"] = cell.fit->fit.iterations;
    j["stop_reason"] = std::string(lm::to_string(cell.fit->fit.stop_reason));
  }
  return j;
}

nlohmann::ordered_json run_summary(const RunConfig& config, const analysis::AnalysisResult& result) {
  nlohmann::ordered_json j;
  auto windows = nlohmann::ordered_json::array();
  for (const auto& w : config.windows) {
    windows.push_back({{"label", w.label}, {"start", w.start.to_string()}, {"end", w.end.to_string()}});
  }
  j["windows"] = std::move(windows);
  j["max_iterations"] = config.lm.max_iterations;
  j["step_tolerance"] = config.lm.step_tolerance;
  std::map<std::string, std::int64_t> counts;
  for (CellStatus s : {CellStatus::Ok, CellStatus::NotConverged, CellStatus::InsufficientData, CellStatus::FitFailed}) {
    counts[std::string(analysis::to_string(s))] = 0;
  }
  for (const auto& c : result.cells) ++counts[std::string(analysis::to_string(c.status))];
  j["cells"] = counts;
  j["warnings"] = result.warnings;
  return j;
}

// Maps library exceptions onto exit codes for the loading stage.
int load_or_report(std::span<const fs::path> inputs, analysis::Dataset& data, std::ostream& err) {
  try {
    data = load_dataset(inputs);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  if (text == "md" || text == "markdown") return Format::Markdown;
  throw RangeError("unknown format '" + std::string(text) + "' (expected csv, json or md)");
}

analysis::Dataset load_dataset(std::span<const fs::path> inputs) {
  analysis::Dataset data;
  for (const auto& path : inputs) {
    const ingest::SniffedSource sniffed = ingest::sniff_source(path);
    std::ifstream in = open_input(path);
    const ingest::SourceSpec& source = sniffed.source;
    try {
      switch (sniffed.layout) {
        case ingest::Layout::Weekly:
        case ingest::Layout::HealthBoard: {
          DeathTable table = [&] {
            if (sniffed.layout == ingest::Layout::Weekly) return ingest::parse_weekly_csv(source, in);
            Nation nation{};
            const auto rows = ingest::parse_health_board_csv(source, in, &nation);
            return ingest::aggregate_health_boards(nation, source.measure, rows);
          }();
          auto& map = source.measure == Measure::CovidDeaths ? data.weekly_covid : data.weekly_total;
          insert_unique(map, std::move(table), key(sniffed.nation, source.measure, "weekly"));
          break;
        }
        case ingest::Layout::Monthly: {
          MonthlyTable table = ingest::parse_monthly_csv(source, in);
          auto& map = source.measure == Measure::CovidDeaths ? data.monthly_covid : data.monthly_total;
          insert_unique(map, std::move(table), key(sniffed.nation, source.measure, "monthly"));
          break;
        }
      }
    } catch (const ParseError& e) {
      throw ParseError(e.row(), e.column(), path.string() + ": " + e.what());
    } catch (const IoError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  return data;
}

int cmd_validate(std::span<const fs::path> inputs, std::ostream& out, std::ostream& err) {
  bool io_failure = false;
  bool invalid = false;
  for (const auto& path : inputs) {
    try {
      const ingest::SniffedSource sniffed = ingest::sniff_source(path);
      std::ifstream in = open_input(path);
      std::vector<ingest::Issue> issues;
      std::string summary;
      if (sniffed.layout == ingest::Layout::Weekly) {
        auto parsed = ingest::validate_weekly_csv(sniffed.source, in);
        issues = std::move(parsed.issues);
        if (parsed.table) {
          summary = std::to_string(parsed.table->week_count()) + " weeks " + parsed.table->first_week().to_string() +
                    ".." + parsed.table->last_week().to_string();
        }
      } else if (sniffed.layout == ingest::Layout::Monthly) {
        auto parsed = ingest::validate_monthly_csv(sniffed.source, in);
        issues = std::move(parsed.issues);
        if (parsed.table) {
          summary = std::to_string(parsed.table->month_count()) + " months " +
                    parsed.table->months().front().to_string() + ".." + parsed.table->months().back().to_string();
        }
      } else {
        try {
          Nation nation{};
          const auto rows = ingest::parse_health_board_csv(sniffed.source, in, &nation);
          const DeathTable t = ingest::aggregate_health_boards(nation, sniffed.source.measure, rows);
          summary = std::to_string(t.week_count()) + " weeks " + t.first_week().to_string() + ".." +
                    t.last_week().to_string();
        } catch (const ParseError& e) {
          issues.push_back({ingest::IssueKind::BadValue, e.row(), e.column(), e.what()});
        } catch (const DataError& e) {
          issues.push_back({ingest::IssueKind::Gap, 0, "", e.what()});
        }
      }
      if (issues.empty()) {
        out << path.string() << ": ok (" << ingest::to_string(sniffed.layout) << ", " << to_string(sniffed.nation)
            << ", " << to_string(sniffed.source.measure) << ", " << summary << ")\n";
      } else {
        invalid = true;
        print_issues(path, issues, out);
      }
    } catch (const IoError& e) {
      io_failure = true;
      err << "error: " << e.what() << '\n';
    } catch (const ParseError& e) {
      invalid = true;
      const ingest::Issue issue{ingest::IssueKind::Header, e.row(), e.column(), e.what()};
      print_issues(path, std::span(&issue, 1), out);
    }
  }
  if (io_failure) return kExitIo;
  return invalid ? kExitValidation : kExitOk;
}

int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.inputs.empty()) {
    err << "error: at least one --input is required\n";
    return kExitUsage;
  }
  analysis::Dataset data;
  if (const int code = load_or_report(config.inputs, data, err); code != kExitOk) return code;

  analysis::AnalysisConfig ac;
  ac.windows = config.windows;
  ac.lm = config.lm;
  ac.threads = config.threads;
  analysis::AnalysisResult result;
  try {
    result = analysis::run_analysis(data, ac);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFit;
  }

  try {
    const fs::path& dir = config.out_dir;
    make_dir(dir / "curves");
    write_file(dir / "series.csv", [&](std::ostream& o) { transform::write_series_csv(result.series, o); });
    write_table(dir, "fits", report::fits_table(result.cells), config.formats);
    write_table(dir, "peaks", report::peaks_table(result.cells), config.formats);

    const auto signs = analysis::beta_sign_table(result.cells, analysis::table_one_rows(), config.windows);
    std::set<Format> long_formats = config.formats;
    long_formats.erase(Format::Markdown);
    write_table(dir, "beta_signs", report::beta_sign_long_table(signs), long_formats);
    if (config.formats.contains(Format::Markdown)) {
      write_file(dir / "beta_signs.md",
                 [&](std::ostream& o) { report::write_markdown(report::beta_sign_grid(signs, config.windows), o); });
    }

    for (const auto& cell : result.cells) {
      if (cell.status == CellStatus::Ok) {
        write_file(dir / "curves" / (cell.id.stem() + ".csv"),
                   [&](std::ostream& o) { report::write_csv(report::curve_table(*cell.fit), o); });
        continue;
      }
      make_dir(dir / "quarantine");
      write_file(dir / "quarantine" / (cell.id.stem() + ".json"),
                 [&](std::ostream& o) { o << quarantine_entry(cell).dump(2) << '\n'; });
      if (cell.fit) {
        write_file(dir / "quarantine" / (cell.id.stem() + ".csv"),
                   [&](std::ostream& o) { report::write_csv(report::curve_table(*cell.fit), o); });
      }
    }
    write_file(dir / "summary.json", [&](std::ostream& o) { o << run_summary(config, result).dump(2) << '\n'; });
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }

  std::size_t ok = 0;
  for (const auto& cell : result.cells) {
    if (cell.status == CellStatus::Ok) {
      ++ok;
    } else {
      err << cell.id.stem() << ": " << analysis::to_string(cell.status) << ": " << cell.message << '\n';
    }
  }
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  out << ok << " of " << result.cells.size() << " cells fitted; outputs in " << config.out_dir.string() << '\n';
  return result.all_ok() ? kExitOk : kExitFit;
}

int cmd_compare(const RunConfig& config, std::span<const Nation> nations, std::ostream& out, std::ostream& err) {
  if (config.inputs.empty() || nations.empty()) {
    err << "error: compare needs at least one --input and one nation\n";
    return kExitUsage;
  }
  analysis::Dataset data;
  if (const int code = load_or_report(config.inputs, data, err); code != kExitOk) return code;

  analysis::AnalysisConfig ac;
  ac.windows = config.windows;
  ac.lm = config.lm;
  ac.threads = config.threads;
  ac.fit_shares = false;
  std::vector<analysis::PeakComparison> rows;
  try {
    const analysis::AnalysisResult result = analysis::run_analysis(data, ac);
    rows = analysis::compare_peaks(result.cells, nations, config.windows);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFit;
  }

  const report::Table table = report::comparison_table(rows);
  report::write_markdown(table, out);
  if (!config.out_dir.empty()) {
    try {
      make_dir(config.out_dir);
      write_table(config.out_dir, "compare", table, config.formats);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kExitIo;
    }
  }
  bool complete = true;
  for (const auto& r : rows) {
    if (!r.lag_weeks) {
      complete = false;
      err << r.wave << " " << to_string(r.nation) << ": no fitted peak\n";
    }
  }
  return complete ? kExitOk : kExitFit;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wave modelling of COVID-19 deaths by place of occurrence"};
  app.require_subcommand(1);

  std::vector<std::string> inputs;
  std::string waves;
  int max_iter = lm::LmConfig{}.max_iterations;
  double tol = lm::LmConfig{}.step_tolerance;
  std::string out_dir;
  std::vector<std::string> formats;
  std::vector<std::string> nations;
  unsigned threads = 0;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--input", inputs, "input CSV file (repeatable)")->required()->take_all();
    sub->add_option("--waves", waves, "wave windows, e.g. 2020w10:2020w38,2020w38:2020w51,2020w51:2021w08");
    sub->add_option("--max-iter", max_iter, "optimizer iteration cap")->capture_default_str();
    sub->add_option("--tol", tol, "relative step tolerance")->capture_default_str();
    sub->add_option("--format", formats, "csv, json, md (repeatable or comma separated)")->delimiter(',');
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
  };

  CLI::App* validate = app.add_subcommand("validate", "check input files against the schema");
  validate->add_option("--input", inputs, "input CSV file (repeatable)")->required()->take_all();

  CLI::App* fit = app.add_subcommand("fit", "normalise, fit every wave and write the reports");
  add_run_options(fit);
  fit->add_option("--out", out_dir, "output directory")->required();

  CLI::App* compare = app.add_subcommand("compare", "compare national peaks against a reference nation");
  add_run_options(compare);
  compare->add_option("--out", out_dir, "output directory for compare.* files");
  compare->add_option("--nations", nations, "nations, reference first (comma separated)")
      ->delimiter(',')
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  std::vector<Nation> nation_list;
  try {
    for (const auto& i : inputs) config.inputs.emplace_back(i);
    if (!waves.empty()) config.windows = analysis::parse_wave_windows(waves);
    config.lm.max_iterations = max_iter;
    config.lm.step_tolerance = tol;
    config.lm.validate();
    config.out_dir = out_dir;
    config.threads = threads;
    if (!formats.empty()) {
      config.formats.clear();
      for (const auto& f : formats) config.formats.insert(parse_format(f));
    }
    for (const auto& n : nations) nation_list.push_back(parse_nation(n));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (validate->parsed()) return cmd_validate(config.inputs, out, err);
  if (fit->parsed()) return cmd_fit(config, out, err);
  return cmd_compare(config, nation_list, out, err);
}

}  // namespace wavefit::cli
