#pragma once

// Per-wave fitting of the normalised series, peak and lag extraction, the
// beta-sign table, and the full nation x place x wave fit grid.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wavefit/core_types.hpp"
#include "wavefit/lm_optimizer.hpp"
#include "wavefit/models.hpp"
#include "wavefit/transform.hpp"

namespace wavefit::analysis {

/// Inclusive week range of one epidemic wave. Consecutive windows may share a week.
struct WaveWindow {
  std::string label;  // "wave1", "wave2", ... or "full"
  WeekIndex start = WeekIndex::from_ordinal(0);
  WeekIndex end = WeekIndex::from_ordinal(0);
  int index = 0;  // 0 for the first wave

  bool contains(WeekIndex week) const { return start <= week && week <= end; }
  int length() const { return end - start + 1; }
};

std::vector<WaveWindow> default_wave_windows();

/// Parses "2020w10:2020w38,2020w38:2020w51"; labels are wave1, wave2, ... in order.
/// Throws RangeError on malformed text or a window whose end precedes its start.
std::vector<WaveWindow> parse_wave_windows(std::string_view spec);

/// Window from the first start to the last end, labelled "full".
WaveWindow covering_window(std::span<const WaveWindow> windows);

// --- single fits ----------------------------------------------------------------

inline constexpr std::size_t kMinWeibullPoints = 5;

/// Defined values whose week lies in the window, at t = week ordinal.
std::vector<lm::DataPoint> window_points(const transform::ProportionSeries& series, const WaveWindow& window);

/// gamma = max(y), alpha = argmax week - mu (1 when zero), beta = beta0.
Eigen::VectorXd weibull_initial_guess(std::span<const lm::DataPoint> points, double mu, double beta0);

/// lambda = max(y) (of 100 - y for the complement), kappa_g / kappa_d at the
/// half-maximum crossings either side of the maximum, nu_g = nu_d = 0.5.
Eigen::VectorXd logistic_initial_guess(std::span<const lm::DataPoint> points, bool complement);

struct WaveFit {
  models::ModelKind model{};
  WaveWindow window;
  double mu{};  // window start ordinal; unused by the logistic models
  std::vector<lm::DataPoint> points;
  Eigen::VectorXd theta0;  // start of the retained run
  lm::FitResult fit;

  double value(double t) const;
};

/// Fits one series over one window. Weibull fits start from beta0 = +2 on the
/// first wave and -2 later, then also from the opposite sign; the lower
/// objective wins. Throws InsufficientDataError (fewer than 5 points for the
/// Weibull, fewer than the parameter count otherwise) and FitError, both naming the series.
WaveFit fit_wave(const transform::ProportionSeries& series, const WaveWindow& window, models::ModelKind model,
                 const lm::LmConfig& config = {});

// --- peaks --------------------------------------------------------------------

enum class PeakSource : std::uint8_t { FittedCurve, RawData };
std::string_view to_string(PeakSource s);

struct PeakDescriptor {
  std::string wave;
  double week{};  // ordinal, fractional for fitted curves
  double magnitude{};
  PeakSource source{};

  /// The ISO week containing the peak (floor of the ordinal).
  WeekIndex iso_week() const;
};

/// Argmax of a curve over the window on a 0.1-week grid; earliest on ties.
PeakDescriptor peak_of_curve(models::ModelKind model, const Eigen::VectorXd& theta, double mu,
                             const WaveWindow& window);

/// Throws FitError for a fit that did not converge.
PeakDescriptor peak_of_fit(const WaveFit& fit);

/// Largest observed value in the window; earliest on ties.
PeakDescriptor raw_peak(const WaveFit& fit);

/// b.week - a.week. Throws DataError when the peaks belong to different waves.
double peak_lag(const PeakDescriptor& a, const PeakDescriptor& b);

// --- fit grid -----------------------------------------------------------------

struct CellId {
  Nation nation{};
  std::optional<Place> place;  // nullopt: national
  transform::SeriesKind kind{};
  std::string wave;
  models::ModelKind model{};

  std::string_view place_label() const { return place ? to_string(*place) : std::string_view("All"); }
  /// "<nation>_<place>_<wave>_<model>", the plot file stem.
  std::string stem() const;

  friend bool operator==(const CellId&, const CellId&) = default;
};

enum class CellStatus : std::uint8_t { Ok, NotConverged, InsufficientData, FitFailed };
std::string_view to_string(CellStatus s);

struct CellResult {
  CellId id;
  CellStatus status{CellStatus::Ok};
  std::string message;
  std::size_t defined_points{};
  bool low_count{};  // peak COVID-19 count in the window below kLowCountThreshold
  std::optional<WaveFit> fit;
  std::optional<PeakDescriptor> fitted_peak;
  std::optional<PeakDescriptor> data_peak;
};

inline constexpr std::int64_t kLowCountThreshold = 10;

/// Weekly and monthly inputs by nation. England and Wales may be supplied
/// separately, combined, or both.
struct Dataset {
  std::map<Nation, DeathTable> weekly_covid;
  std::map<Nation, DeathTable> weekly_total;
  std::map<Nation, MonthlyTable> monthly_covid;
  std::map<Nation, MonthlyTable> monthly_total;
};

struct AnalysisConfig {
  std::vector<WaveWindow> windows = default_wave_windows();
  lm::LmConfig lm;
  bool fit_shares = true;  // logistic fits of the proportion of COVID-19 deaths
  unsigned threads = 0;    // 0: hardware concurrency
};

struct AnalysisResult {
  std::vector<transform::ProportionSeries> series;
  std::vector<CellResult> cells;  // fixed order, independent of thread count
  std::vector<std::string> warnings;

  const CellResult* find(const CellId& id) const;
  bool all_ok() const;
};

/// Builds every series (deaths due to COVID-19 nationally and per place, the
/// proportion of COVID-19 deaths per place) and fits the grid in parallel.
/// Weibull fits cover each wave window; logistic fits cover the whole span, with
/// the complement model for hospitals. Northern Ireland Homes is not fitted.
AnalysisResult run_analysis(const Dataset& data, const AnalysisConfig& config);

// --- beta-sign table ----------------------------------------------------------

enum class BetaSign : std::uint8_t { Positive, Negative, NotAvailable };
std::string_view to_string(BetaSign s);

struct BetaSignEntry {
  Nation nation{};
  std::optional<Place> place;
  std::string wave;
  BetaSign sign{BetaSign::NotAvailable};
  double r_squared{};  // NaN when NotAvailable
  std::optional<double> beta;
};

struct SignRow {
  Nation nation{};
  std::optional<Place> place;
};

/// National rows for UK, England, Scotland, Wales and Northern Ireland, then
/// Homes, Care Homes and Hospitals for UK, England, Scotland and Wales.
std::vector<SignRow> table_one_rows();

/// One entry per row and wave from the Weibull fits of deaths due to COVID-19.
/// Cells without a fit are NotAvailable; beta <= 0 is Negative. Throws DataError
/// when two fitted cells share an identity.
std::vector<BetaSignEntry> beta_sign_table(std::span<const CellResult> cells, std::span<const SignRow> rows,
                                           std::span<const WaveWindow> windows);

// --- cross-nation comparison --------------------------------------------------

struct PeakComparison {
  std::string wave;
  Nation nation{};
  Nation reference{};
  std::optional<PeakDescriptor> peak;
  std::optional<double> lag_weeks;            // peak week minus reference peak week
  std::optional<double> magnitude_difference;  // percentage points, minus the reference
};

/// National fitted peaks per wave against the first nation in the list.
/// Throws DataError when a requested nation has no national Weibull fits.
std::vector<PeakComparison> compare_peaks(std::span<const CellResult> cells, std::span<const Nation> nations,
                                          std::span<const WaveWindow> windows);

}  // namespace wavefit::analysis
