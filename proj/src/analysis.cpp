#include "wavefit/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <thread>

#include "wavefit/errors.hpp"
#include "wavefit/ingest.hpp"

namespace wavefit::analysis {

using models::ModelKind;
using transform::ProportionSeries;
using transform::SeriesKind;

namespace {

constexpr std::array<std::string_view, 2> kPeakSourceNames{"FittedCurve", "RawData"};
constexpr std::array<std::string_view, 4> kStatusNames{"ok", "not_converged", "insufficient_data", "fit_failed"};
constexpr std::array<std::string_view, 3> kSignNames{"+", "-", "NA"};

std::string describe(const ProportionSeries& series, const WaveWindow& window) {
  return std::string(to_string(series.nation)) + " " + std::string(series.place_label()) + " " +
         std::string(transform::to_string(series.kind)) + " " + window.label + " (" + window.start.to_string() + ".." +
         window.end.to_string() + ")";
}

bool better(const lm::FitResult& candidate, const lm::FitResult& incumbent) {
  if (candidate.converged != incumbent.converged) return candidate.converged;
  return candidate.objective < incumbent.objective;
}

// Columns [first, last] of a table, which must cover them.
DeathTable slice(const DeathTable& table, WeekIndex first, WeekIndex last) {
  const std::size_t offset = *table.column_of(first);
  const auto n = static_cast<std::size_t>(last - first + 1);
  std::vector<WeekIndex> weeks(table.weeks().begin() + static_cast<std::ptrdiff_t>(offset),
                               table.weeks().begin() + static_cast<std::ptrdiff_t>(offset + n));
  std::vector<std::int64_t> counts;
  counts.reserve(kPlaceCount * n);
  for (Place place : kAllPlaces) {
    const auto row = table.row(place).subspan(offset, n);
    counts.insert(counts.end(), row.begin(), row.end());
  }
  return DeathTable(table.nation(), table.measure(), std::move(weeks), std::move(counts));
}

std::optional<std::pair<WeekIndex, WeekIndex>> common_weeks(const DeathTable& a, const DeathTable& b) {
  const WeekIndex first = std::max(a.first_week(), b.first_week());
  const WeekIndex last = std::min(a.last_week(), b.last_week());
  if (last < first) return std::nullopt;
  return std::pair{first, last};
}

DeathTable sum_tables(Nation nation, const DeathTable& a, const DeathTable& b) {
  const auto range = common_weeks(a, b);
  if (!range) throw DataError("cannot combine tables without shared weeks");
  const DeathTable x = slice(a, range->first, range->second);
  const DeathTable y = slice(b, range->first, range->second);
  std::vector<std::int64_t> counts(x.counts().begin(), x.counts().end());
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += y.counts()[i];
  return DeathTable(nation, a.measure(), {x.weeks().begin(), x.weeks().end()}, std::move(counts));
}

std::optional<DeathTable> england_and_wales(const std::map<Nation, DeathTable>& tables) {
  if (auto it = tables.find(Nation::EnglandAndWales); it != tables.end()) return it->second;
  const auto e = tables.find(Nation::England);
  const auto w = tables.find(Nation::Wales);
  if (e == tables.end() || w == tables.end()) return std::nullopt;
  return sum_tables(Nation::EnglandAndWales, e->second, w->second);
}

template <typename Map>
const typename Map::mapped_type* lookup(const Map& map, Nation nation) {
  const auto it = map.find(nation);
  return it == map.end() ? nullptr : &it->second;
}

struct Task {
  std::size_t series;
  WaveWindow window;
  ModelKind model;
};

}  // namespace

// --- windows --------------------------------------------------------------------

std::vector<WaveWindow> default_wave_windows() {
  return {{"wave1", WeekIndex::from_iso(2020, 10), WeekIndex::from_iso(2020, 38), 0},
          {"wave2", WeekIndex::from_iso(2020, 38), WeekIndex::from_iso(2020, 51), 1},
          {"wave3", WeekIndex::from_iso(2020, 51), WeekIndex::from_iso(2021, 8), 2}};
}

std::vector<WaveWindow> parse_wave_windows(std::string_view spec) {
  std::vector<WaveWindow> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string_view item = spec.substr(pos, comma - pos);
    const std::size_t colon = item.find(':');
    if (item.empty() || colon == std::string_view::npos) {
      throw RangeError("wave window '" + std::string(item) + "' is not of the form <week>:<week>");
    }
    WaveWindow w;
    w.start = WeekIndex::parse(item.substr(0, colon));
    w.end = WeekIndex::parse(item.substr(colon + 1));
    if (w.end < w.start) throw RangeError("wave window '" + std::string(item) + "' ends before it starts");
    w.index = static_cast<int>(out.size());
    w.label = "wave" + std::to_string(out.size() + 1);
    out.push_back(std::move(w));
    pos = comma + 1;
  }
  return out;
}

WaveWindow covering_window(std::span<const WaveWindow> windows) {
  if (windows.empty()) throw RangeError("no wave windows configured");
  WaveWindow full{"full", windows.front().start, windows.front().end, 0};
  for (const auto& w : windows) {
    full.start = std::min(full.start, w.start);
    full.end = std::max(full.end, w.end);
  }
  return full;
}

// --- fitting --------------------------------------------------------------------

std::vector<lm::DataPoint> window_points(const ProportionSeries& series, const WaveWindow& window) {
  std::vector<lm::DataPoint> points;
  for (std::size_t i = 0; i < series.weeks.size(); ++i) {
    if (series.values[i] && window.contains(series.weeks[i])) {
      points.push_back({static_cast<double>(series.weeks[i].ordinal()), *series.values[i]});
    }
  }
  return points;
}

Eigen::VectorXd weibull_initial_guess(std::span<const lm::DataPoint> points, double mu, double beta0) {
  if (points.empty()) throw InsufficientDataError("no points for an initial guess");
  const auto peak = std::max_element(points.begin(), points.end(),
                                     [](const lm::DataPoint& a, const lm::DataPoint& b) { return a.value < b.value; });
  // Place the start curve's mode and height on the observed maximum.
  const double x_mode = std::pow(beta0 / (beta0 + 1.0), 1.0 / beta0);
  const double unit_height = std::pow(x_mode, -beta0 - 1.0) * std::exp(-std::pow(x_mode, -beta0));
  const double alpha = peak->t - mu > 0.0 ? (peak->t - mu) / x_mode : 1.0;
  return Eigen::Vector3d(peak->value / unit_height, alpha, beta0);
}

Eigen::VectorXd logistic_initial_guess(std::span<const lm::DataPoint> points, bool complement) {
  if (points.empty()) throw InsufficientDataError("no points for an initial guess");
  std::vector<double> y;
  for (const auto& p : points) y.push_back(complement ? 100.0 - p.value : p.value);
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double lambda = y[peak] > 0.0 ? y[peak] : 1.0;
  const double half = 0.5 * y[peak];

  double kappa_g = points[peak].t;
  for (std::size_t i = 0; i <= peak; ++i) {
    if (y[i] >= half) {
      kappa_g = points[i].t;
      break;
    }
  }
  double kappa_d = points.back().t;
  for (std::size_t i = peak + 1; i < y.size(); ++i) {
    if (y[i] < half) {
      kappa_d = points[i].t;
      break;
    }
  }
  if (kappa_d <= kappa_g) kappa_d = kappa_g + 1.0;
  return models::DoubleLogisticModel::theta({lambda, 0.5, 0.5, kappa_g, kappa_d});
}

double WaveFit::value(double t) const {
  const Eigen::VectorXd& th = fit.theta_hat;
  switch (model) {
    case ModelKind::ModifiedWeibull:
      return models::weibull_eval({th[0], th[1], th[2], mu}, t);
    case ModelKind::DoubleLogistic:
      return models::double_logistic_eval(models::DoubleLogisticModel::params(th), t);
    case ModelKind::ComplementLogistic:
      return models::complement_logistic_eval(models::DoubleLogisticModel::params(th), t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

WaveFit fit_wave(const ProportionSeries& series, const WaveWindow& window, ModelKind model,
                 const lm::LmConfig& config) {
  WaveFit out;
  out.model = model;
  out.window = window;
  out.mu = static_cast<double>(window.start.ordinal());
  out.points = window_points(series, window);

  const bool weibull = model == ModelKind::ModifiedWeibull;
  const std::size_t needed = weibull ? kMinWeibullPoints : 5;
  if (out.points.size() < needed) {
    throw InsufficientDataError(describe(series, window) + ": need at least " + std::to_string(needed) +
                                " defined points, have " + std::to_string(out.points.size()));
  }

  std::vector<Eigen::VectorXd> starts;
  std::unique_ptr<models::CurveModel> curve;
  if (weibull) {
    const double beta0 = window.index == 0 ? 2.0 : -2.0;
    starts.push_back(weibull_initial_guess(out.points, out.mu, beta0));
    starts.push_back(weibull_initial_guess(out.points, out.mu, -beta0));
    curve = std::make_unique<models::WeibullModel>(out.mu);
  } else {
    const bool complement = model == ModelKind::ComplementLogistic;
    starts.push_back(logistic_initial_guess(out.points, complement));
    curve = std::make_unique<models::DoubleLogisticModel>(complement);
  }

  std::optional<lm::FitResult> best;
  std::string failure;
  for (const auto& theta0 : starts) {
    try {
      lm::FitResult r = lm::lm_fit(*curve, out.points, theta0, config);
      if (!best || better(r, *best)) {
        best = std::move(r);
        out.theta0 = theta0;
      }
    } catch (const FitError& e) {
      if (failure.empty()) failure = e.what();
    }
  }
  if (!best) throw FitError(describe(series, window) + ": " + failure);
  out.fit = std::move(*best);
  return out;
}

// --- peaks ----------------------------------------------------------------------

std::string_view to_string(PeakSource s) { return kPeakSourceNames[static_cast<std::size_t>(s)]; }

WeekIndex PeakDescriptor::iso_week() const { return WeekIndex::from_ordinal(static_cast<int>(std::floor(week))); }

PeakDescriptor peak_of_curve(ModelKind model, const Eigen::VectorXd& theta, double mu, const WaveWindow& window) {
  WaveFit probe;
  probe.model = model;
  probe.mu = mu;
  probe.fit.theta_hat = theta;
  const double start = window.start.ordinal();
  const int steps = 10 * (window.end - window.start);
  PeakDescriptor best{window.label, start, probe.value(start), PeakSource::FittedCurve};
  for (int k = 1; k <= steps; ++k) {
    const double t = start + k / 10.0;
    const double v = probe.value(t);
    if (v > best.magnitude) {
      best.week = t;
      best.magnitude = v;
    }
  }
  return best;
}

PeakDescriptor peak_of_fit(const WaveFit& fit) {
  if (!fit.fit.converged) throw FitError("peak requested from a fit that did not converge (" + fit.window.label + ")");
  return peak_of_curve(fit.model, fit.fit.theta_hat, fit.mu, fit.window);
}

PeakDescriptor raw_peak(const WaveFit& fit) {
  if (fit.points.empty()) throw InsufficientDataError("no observations in " + fit.window.label);
  PeakDescriptor best{fit.window.label, fit.points.front().t, fit.points.front().value, PeakSource::RawData};
  for (const auto& p : fit.points) {
    if (p.value > best.magnitude) {
      best.week = p.t;
      best.magnitude = p.value;
    }
  }
  return best;
}

double peak_lag(const PeakDescriptor& a, const PeakDescriptor& b) {
  if (a.wave != b.wave) throw DataError("cannot compare peaks across waves (" + a.wave + " vs " + b.wave + ")");
  // Rounded so that grid-aligned peaks give grid-aligned lags.
  return std::round((b.week - a.week) * 1e9) / 1e9;
}

// --- fit grid -------------------------------------------------------------------

std::string CellId::stem() const {
  return std::string(to_string(nation)) + "_" + std::string(place_label()) + "_" + wave + "_" +
         std::string(models::to_string(model));
}

std::string_view to_string(CellStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

const CellResult* AnalysisResult::find(const CellId& id) const {
  for (const auto& c : cells) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

bool AnalysisResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.status == CellStatus::Ok; });
}

AnalysisResult run_analysis(const Dataset& data, const AnalysisConfig& config) {
  config.lm.validate();
  if (config.windows.empty()) throw RangeError("no wave windows configured");
  AnalysisResult result;

  // COVID-19 count tables per fitted nation, for low-count flags and proportions.
  std::map<Nation, DeathTable> covid;
  std::vector<ProportionSeries> ratio_series;

  auto add_weekly = [&](Nation nation, const DeathTable& c, const DeathTable& t) {
    const auto range = common_weeks(c, t);
    if (!range) {
      result.warnings.push_back(std::string(to_string(nation)) + ": COVID-19 and total tables share no weeks");
      return;
    }
    const DeathTable cs = slice(c, range->first, range->second);
    const DeathTable ts = slice(t, range->first, range->second);
    ratio_series.push_back(transform::national_deaths_due_to_covid(cs, ts));
    for (auto& s : transform::deaths_due_to_covid(cs, ts)) ratio_series.push_back(std::move(s));
  };

  const auto ew_covid = england_and_wales(data.weekly_covid);
  const auto ew_total = england_and_wales(data.weekly_total);
  const DeathTable* scot_covid = lookup(data.weekly_covid, Nation::Scotland);
  const DeathTable* scot_total = lookup(data.weekly_total, Nation::Scotland);
  const DeathTable* ni_covid = lookup(data.weekly_covid, Nation::NorthernIreland);

  if (ew_covid && ew_total && scot_covid && scot_total) {
    const DeathTable uk_covid =
        ingest::combine_uk(*ew_covid, *scot_covid, ni_covid ? std::optional<DeathTable>(*ni_covid) : std::nullopt);
    const DeathTable uk_total = ingest::combine_uk(*ew_total, *scot_total);
    covid.emplace(Nation::UK, uk_covid);
    add_weekly(Nation::UK, uk_covid, uk_total);
  }
  for (Nation nation : {Nation::England, Nation::Scotland, Nation::Wales}) {
    const DeathTable* c = lookup(data.weekly_covid, nation);
    const DeathTable* t = lookup(data.weekly_total, nation);
    if (c) covid.emplace(nation, *c);
    if (c && t) add_weekly(nation, *c, *t);
  }

  if (ni_covid) covid.emplace(Nation::NorthernIreland, *ni_covid);
  const MonthlyTable* ni_month_covid = lookup(data.monthly_covid, Nation::NorthernIreland);
  const MonthlyTable* ni_month_total = lookup(data.monthly_total, Nation::NorthernIreland);
  if (ni_month_covid && ni_month_total) {
    if (!ni_covid) {
      result.warnings.push_back("NorthernIreland: monthly data need weekly COVID-19 counts for week alignment");
    } else {
      const auto alignment = transform::align_monthly_to_weekly(*ni_month_covid, *ni_covid);
      ratio_series.push_back(transform::place_on_aligned_weeks(
          transform::monthly_deaths_due_to_covid(*ni_month_covid, *ni_month_total, std::nullopt), alignment));
      for (Place place : kAllPlaces) {
        ratio_series.push_back(transform::place_on_aligned_weeks(
            transform::monthly_deaths_due_to_covid(*ni_month_covid, *ni_month_total, place), alignment));
      }
    }
  }

  result.series = std::move(ratio_series);
  for (Nation nation : {Nation::UK, Nation::England, Nation::Scotland, Nation::Wales, Nation::NorthernIreland}) {
    if (const auto it = covid.find(nation); it != covid.end()) {
      for (auto& s : transform::proportion_of_covid_deaths(it->second)) result.series.push_back(std::move(s));
    }
  }

  for (const auto& s : result.series) {
    if (!s.above_hundred().empty()) {
      result.warnings.push_back(std::string(to_string(s.nation)) + " " + std::string(s.place_label()) +
                                ": COVID-19 deaths exceed total deaths in " +
                                std::to_string(s.above_hundred().size()) + " week(s)");
    }
  }

  // Task list in series order, then window order.
  const WaveWindow full = covering_window(config.windows);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < result.series.size(); ++i) {
    const ProportionSeries& s = result.series[i];
    if (s.weeks.empty()) continue;
    auto overlaps = [&](const WaveWindow& w) { return s.weeks.front() <= w.end && w.start <= s.weeks.back(); };
    if (s.kind == SeriesKind::DeathsDueToCovid) {
      if (s.nation == Nation::NorthernIreland && s.place == Place::Home) continue;
      for (const auto& w : config.windows) {
        if (overlaps(w)) tasks.push_back({i, w, ModelKind::ModifiedWeibull});
      }
    } else if (config.fit_shares && s.kind == SeriesKind::ProportionOfCovidDeaths && overlaps(full)) {
      tasks.push_back(
          {i, full, s.place == Place::Hospital ? ModelKind::ComplementLogistic : ModelKind::DoubleLogistic});
    }
  }

  auto run_task = [&](const Task& task) {
    const ProportionSeries& s = result.series[task.series];
    CellResult cell;
    cell.id = {s.nation, s.place, s.kind, task.window.label, task.model};
    cell.defined_points = window_points(s, task.window).size();
    if (const auto it = covid.find(s.nation); it != covid.end()) {
      std::int64_t peak = 0;
      for (std::size_t c = 0; c < it->second.week_count(); ++c) {
        if (!task.window.contains(it->second.weeks()[c])) continue;
        peak = std::max(peak, s.place ? it->second.count(*s.place, c) : it->second.week_total(c));
      }
      cell.low_count = peak < kLowCountThreshold;
    }
    try {
      cell.fit = fit_wave(s, task.window, task.model, config.lm);
      cell.data_peak = raw_peak(*cell.fit);
      if (cell.fit->fit.converged) {
        cell.fitted_peak = peak_of_fit(*cell.fit);
      } else {
        cell.status = CellStatus::NotConverged;
        cell.message = std::string("stopped without converging: ") + std::string(lm::to_string(cell.fit->fit.stop_reason));
      }
    } catch (const InsufficientDataError& e) {
      cell.status = CellStatus::InsufficientData;
      cell.message = e.what();
    } catch (const Error& e) {
      cell.status = CellStatus::FitFailed;
      cell.message = e.what();
    }
    return cell;
  };

  result.cells.resize(tasks.size());
  unsigned threads = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < tasks.size(); i += threads) result.cells[i] = run_task(tasks[i]);
    }));
  }
  for (auto& f : workers) f.get();
  return result;
}

// --- beta signs -----------------------------------------------------------------

std::string_view to_string(BetaSign s) { return kSignNames[static_cast<std::size_t>(s)]; }

std::vector<SignRow> table_one_rows() {
  std::vector<SignRow> rows;
  for (Nation n : {Nation::UK, Nation::England, Nation::Scotland, Nation::Wales, Nation::NorthernIreland}) {
    rows.push_back({n, std::nullopt});
  }
  for (Place p : {Place::Home, Place::CareHome, Place::Hospital}) {
    for (Nation n : {Nation::UK, Nation::England, Nation::Scotland, Nation::Wales}) rows.push_back({n, p});
  }
  return rows;
}

std::vector<BetaSignEntry> beta_sign_table(std::span<const CellResult> cells, std::span<const SignRow> rows,
                                           std::span<const WaveWindow> windows) {
  std::vector<const CellResult*> fitted;
  for (const auto& c : cells) {
    if (c.id.model != ModelKind::ModifiedWeibull || c.id.kind != SeriesKind::DeathsDueToCovid || !c.fit) continue;
    for (const CellResult* other : fitted) {
      if (other->id == c.id) throw DataError("duplicate fit for cell " + c.id.stem());
    }
    fitted.push_back(&c);
  }

  std::vector<BetaSignEntry> out;
  for (const auto& row : rows) {
    for (const auto& w : windows) {
      BetaSignEntry e{row.nation, row.place, w.label, BetaSign::NotAvailable,
                      std::numeric_limits<double>::quiet_NaN(), std::nullopt};
      for (const CellResult* c : fitted) {
        if (c->id.nation == row.nation && c->id.place == row.place && c->id.wave == w.label) {
          const double beta = c->fit->fit.theta_hat[2];
          e.sign = beta > 0.0 ? BetaSign::Positive : BetaSign::Negative;
          e.r_squared = c->fit->fit.r_squared;
          e.beta = beta;
        }
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

// --- comparison -----------------------------------------------------------------

std::vector<PeakComparison> compare_peaks(std::span<const CellResult> cells, std::span<const Nation> nations,
                                          std::span<const WaveWindow> windows) {
  if (nations.empty()) throw RangeError("no nations to compare");
  auto national = [&](Nation n, const std::string& wave) -> const CellResult* {
    for (const auto& c : cells) {
      if (c.id.nation == n && !c.id.place && c.id.kind == SeriesKind::DeathsDueToCovid &&
          c.id.model == ModelKind::ModifiedWeibull && c.id.wave == wave) {
        return &c;
      }
    }
    return nullptr;
  };
  for (Nation n : nations) {
    const bool any = std::any_of(windows.begin(), windows.end(), [&](const WaveWindow& w) { return national(n, w.label); });
    if (!any) throw DataError("no national fits for " + std::string(to_string(n)));
  }

  std::vector<PeakComparison> out;
  for (const auto& w : windows) {
    const CellResult* ref = national(nations.front(), w.label);
    const std::optional<PeakDescriptor> ref_peak = ref ? ref->fitted_peak : std::nullopt;
    for (Nation n : nations) {
      PeakComparison row{w.label, n, nations.front(), std::nullopt, std::nullopt, std::nullopt};
      if (const CellResult* c = national(n, w.label)) row.peak = c->fitted_peak;
      if (row.peak && ref_peak) {
        row.lag_weeks = peak_lag(*ref_peak, *row.peak);
        row.magnitude_difference = std::round((row.peak->magnitude - ref_peak->magnitude) * 1e9) / 1e9;
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace wavefit::analysis
