#pragma once

// Levenberg-Marquardt nonlinear least squares.
//
// Minimises S(theta) = || y - g(theta) ||^2 by solving the damped normal equations
//   (J^T J + omega I) delta = J^T (y - g(theta))
// and accepting theta + delta only when S decreases. omega is divided by
// `damping_decrease` after an accepted step and multiplied by `damping_increase`
// after a rejected one.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wavefit/models.hpp"

namespace wavefit::lm {

struct LmConfig {
  int max_iterations = 200;
  /// Converged when an accepted step satisfies ||delta|| / ||theta|| < step_tolerance.
  double step_tolerance = 1e-4;
  /// Converged when every Jacobian column is orthogonal to the residual to this
  /// cosine (the objective is stationary to rounding).
  double gradient_tolerance = 1e-10;
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 10.0;
  double min_damping = 1e-12;
  double max_damping = 1e12;

  /// Throws RangeError on an inconsistent configuration.
  void validate() const;
};

struct DataPoint {
  double t;
  double value;
};

enum class StopReason : std::uint8_t { StepTolerance, GradientTolerance, ZeroResidual, MaxIterations, DampingLimit };

std::string_view to_string(StopReason r);

struct FitResult {
  Eigen::VectorXd theta_hat;
  double r_squared{};  // NaN when the data are constant
  Eigen::VectorXd residuals;  // data - model at theta_hat
  double objective{};         // S(theta_hat)
  int iterations{};           // damped systems solved (at least 1)
  bool converged{};
  double final_damping{};
  StopReason stop_reason{StopReason::MaxIterations};
  /// S(theta0) followed by S after every accepted step; strictly decreasing.
  std::vector<double> accepted_objectives;
};

struct LmStep {
  Eigen::VectorXd delta;
  Eigen::VectorXd candidate;
  /// S(theta) - ||r - J delta||^2 under the linearised model.
  double predicted_reduction{};
};

/// One damped Gauss-Newton step from an explicit Jacobian and residual vector.
/// Throws FitError when J^T J + omega I is numerically singular.
LmStep solve_damped_step(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& theta, double omega);

/// One damped step for `model` on `data` at `theta`.
LmStep lm_step(const Eigen::VectorXd& theta, double omega, const models::CurveModel& model,
               std::span<const DataPoint> data);

/// Throws InsufficientDataError with fewer points than parameters, FitError when
/// theta0 is infeasible or the model is non-finite at theta0.
FitResult lm_fit(const models::CurveModel& model, std::span<const DataPoint> data, const Eigen::VectorXd& theta0,
                 const LmConfig& config = {});

/// 1 - SS_res / SS_tot. Throws DataError on mismatched lengths, fewer than two
/// points, or constant data.
double r_squared(std::span<const double> data, std::span<const double> fitted);

}  // namespace wavefit::lm
