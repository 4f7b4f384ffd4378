#include "wavefit/report.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "wavefit/format.hpp"

namespace wavefit::report {

using analysis::CellResult;
using models::ModelKind;

namespace {

std::string text(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

std::string markdown_text(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_fixed(*d, 3);
  return text(cell);
}

std::string display_name(Nation n) {
  switch (n) {
    case Nation::NorthernIreland:
      return "Northern Ireland";
    case Nation::EnglandAndWales:
      return "England and Wales";
    default:
      return std::string(to_string(n));
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

Cell optional_real(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

// Offset of a model's parameters within kParameterNames.
std::size_t parameter_offset(ModelKind m) { return m == ModelKind::ModifiedWeibull ? 0 : 3; }

std::string row_label(const analysis::BetaSignEntry& e) {
  if (!e.place) return display_name(e.nation);
  static const std::map<Place, std::string> plural{{Place::Home, "Homes"},          {Place::Hospital, "Hospitals"},
                                                   {Place::Hospice, "Hospices"},    {Place::CareHome, "Care Homes"},
                                                   {Place::OCE, "OCE"},             {Place::Elsewhere, "Elsewhere"}};
  return plural.at(*e.place) + " (" + display_name(e.nation) + ")";
}

void identity(std::vector<Cell>& row, const analysis::CellId& id) {
  row.emplace_back(std::string(to_string(id.nation)));
  row.emplace_back(std::string(id.place_label()));
  row.emplace_back(std::string(transform::to_string(id.kind)));
  row.emplace_back(id.wave);
  row.emplace_back(std::string(models::to_string(id.model)));
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_field(table.columns[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(text(row[c]));
    out << '\n';
  }
}

void write_markdown(const Table& table, std::ostream& out) {
  out << '|';
  for (const auto& c : table.columns) out << ' ' << c << " |";
  out << "\n|";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << "---|";
  out << '\n';
  for (const auto& row : table.rows) {
    out << '|';
    for (const auto& cell : row) out << ' ' << markdown_text(cell) << " |";
    out << '\n';
  }
}

nlohmann::ordered_json to_json(const Table& table) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      nlohmann::ordered_json value;
      if (const auto* s = std::get_if<std::string>(&cell)) {
        value = *s;
      } else if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        value = *i;
      } else if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isfinite(*d)) value = *d;
      } else if (const auto* b = std::get_if<bool>(&cell)) {
        value = *b;
      }
      obj[table.columns[c]] = std::move(value);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

Table fits_table(std::span<const CellResult> cells) {
  Table t;
  t.columns = {"nation", "place", "series", "wave", "model", "status", "points", "low_count", "mu"};
  for (auto name : kParameterNames) t.columns.push_back("initial_" + std::string(name));
  for (auto name : kParameterNames) t.columns.push_back(std::string(name));
  for (const char* c : {"r_squared", "objective", "iterations", "final_damping", "stop_reason", "message"}) {
    t.columns.emplace_back(c);
  }

  for (const auto& cell : cells) {
    std::vector<Cell> row;
    identity(row, cell.id);
    row.emplace_back(std::string(analysis::to_string(cell.status)));
    row.emplace_back(static_cast<std::int64_t>(cell.defined_points));
    row.emplace_back(cell.low_count);
    const analysis::WaveFit* fit = cell.fit ? &*cell.fit : nullptr;
    row.push_back(fit && fit->model == ModelKind::ModifiedWeibull ? Cell(fit->mu) : Cell());
    for (const Eigen::VectorXd* values : {fit ? &fit->theta0 : nullptr, fit ? &fit->fit.theta_hat : nullptr}) {
      std::vector<Cell> params(std::size(kParameterNames));
      if (values) {
        const std::size_t offset = parameter_offset(fit->model);
        for (Eigen::Index i = 0; i < values->size(); ++i) params[offset + static_cast<std::size_t>(i)] = (*values)[i];
      }
      row.insert(row.end(), params.begin(), params.end());
    }
    if (fit) {
      row.emplace_back(fit->fit.r_squared);
      row.emplace_back(fit->fit.objective);
      row.emplace_back(static_cast<std::int64_t>(fit->fit.iterations));
      row.emplace_back(fit->fit.final_damping);
      row.emplace_back(std::string(lm::to_string(fit->fit.stop_reason)));
    } else {
      row.insert(row.end(), 5, Cell());
    }
    row.emplace_back(cell.message);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table peaks_table(std::span<const CellResult> cells) {
  Table t;
  t.columns = {"nation", "place", "series", "wave", "model", "source", "week", "iso_week", "magnitude", "low_count"};
  for (const auto& cell : cells) {
    for (const auto* peak : {cell.fitted_peak ? &*cell.fitted_peak : nullptr, cell.data_peak ? &*cell.data_peak : nullptr}) {
      if (!peak) continue;
      std::vector<Cell> row;
      identity(row, cell.id);
      row.emplace_back(std::string(analysis::to_string(peak->source)));
      row.emplace_back(peak->week);
      row.emplace_back(peak->iso_week().to_string());
      row.emplace_back(peak->magnitude);
      row.emplace_back(cell.low_count);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table beta_sign_long_table(std::span<const analysis::BetaSignEntry> entries) {
  Table t;
  t.columns = {"nation", "place", "wave", "sign", "beta", "r_squared"};
  for (const auto& e : entries) {
    t.rows.push_back({std::string(to_string(e.nation)), e.place ? std::string(to_string(*e.place)) : "All", e.wave,
                      std::string(analysis::to_string(e.sign)), optional_real(e.beta),
                      e.beta ? Cell(e.r_squared) : Cell()});
  }
  return t;
}

Table beta_sign_grid(std::span<const analysis::BetaSignEntry> entries, std::span<const analysis::WaveWindow> windows) {
  Table t;
  t.columns = {"Place"};
  for (const auto& w : windows) t.columns.push_back("beta " + w.label);
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, std::string>> grid;
  for (const auto& e : entries) {
    const std::string label = row_label(e);
    if (!grid.contains(label)) order.push_back(label);
    grid[label][e.wave] = std::string(analysis::to_string(e.sign));
  }
  for (const auto& label : order) {
    std::vector<Cell> row{label};
    for (const auto& w : windows) {
      const auto it = grid[label].find(w.label);
      row.emplace_back(it == grid[label].end() ? std::string("NA") : it->second);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table comparison_table(std::span<const analysis::PeakComparison> rows) {
  Table t;
  t.columns = {"wave",      "nation",   "reference", "peak_week", "peak_iso_week", "peak_magnitude",
               "lag_weeks", "magnitude_difference_pp"};
  for (const auto& r : rows) {
    std::vector<Cell> row{r.wave, std::string(to_string(r.nation)), std::string(to_string(r.reference))};
    if (r.peak) {
      row.emplace_back(r.peak->week);
      row.emplace_back(r.peak->iso_week().to_string());
      row.emplace_back(r.peak->magnitude);
    } else {
      row.insert(row.end(), 3, Cell());
    }
    row.push_back(optional_real(r.lag_weeks));
    row.push_back(optional_real(r.magnitude_difference));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table curve_table(const analysis::WaveFit& fit) {
  Table t;
  t.columns = {"week", "iso_week", "observed", "fitted"};
  std::map<int, double> observed;
  for (const auto& p : fit.points) observed[static_cast<int>(p.t)] = p.value;
  const int start = fit.window.start.ordinal();
  const int steps = 10 * (fit.window.end - fit.window.start);
  for (int k = 0; k <= steps; ++k) {
    const double week = start + k / 10.0;
    std::vector<Cell> row{week, WeekIndex::from_ordinal(start + k / 10).to_string()};
    const auto it = k % 10 == 0 ? observed.find(start + k / 10) : observed.end();
    row.push_back(it != observed.end() ? Cell(it->second) : Cell());
    row.emplace_back(fit.value(week));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace wavefit::report
