#include "wavefit/lm_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "wavefit/errors.hpp"

namespace wavefit::lm {

namespace {

constexpr std::array<std::string_view, 5> kStopNames{"step_tolerance", "gradient_tolerance", "zero_residual",
                                                     "max_iterations", "damping_limit"};

struct Evaluation {
  Eigen::VectorXd residuals;
  double objective;
};

Evaluation evaluate(const models::CurveModel& model, std::span<const DataPoint> data, const Eigen::VectorXd& theta) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) r[static_cast<Eigen::Index>(i)] = data[i].value - model.value(theta, data[i].t);
  return {r, r.squaredNorm()};
}

Eigen::MatrixXd jacobian(const models::CurveModel& model, std::span<const DataPoint> data, const Eigen::VectorXd& theta) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(data.size()), model.parameter_count());
  Eigen::VectorXd row(model.parameter_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    model.gradient(theta, data[i].t, row);
    j.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return j;
}

// Largest cosine between the residual vector and a Jacobian column.
double gradient_cosine(const Eigen::MatrixXd& j, const Eigen::VectorXd& r) {
  const double r_norm = r.norm();
  if (r_norm == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index c = 0; c < j.cols(); ++c) {
    const double col_norm = j.col(c).norm();
    if (col_norm == 0.0) continue;
    worst = std::max(worst, std::abs(j.col(c).dot(r)) / (col_norm * r_norm));
  }
  return worst;
}

bool small_step(const Eigen::VectorXd& delta, const Eigen::VectorXd& theta, double tolerance) {
  const double scale = theta.norm();
  return scale > 0.0 ? delta.norm() < tolerance * scale : delta.norm() < tolerance;
}

}  // namespace

std::string_view to_string(StopReason r) { return kStopNames[static_cast<std::size_t>(r)]; }

void LmConfig::validate() const {
  if (max_iterations < 1) throw RangeError("max_iterations must be at least 1");
  if (!(step_tolerance > 0.0) || !(gradient_tolerance > 0.0)) throw RangeError("tolerances must be positive");
  if (!(initial_damping > 0.0)) throw RangeError("initial damping must be positive");
  if (!(damping_increase > 1.0) || !(damping_decrease > 1.0)) throw RangeError("damping factors must exceed 1");
  if (!(min_damping > 0.0) || !(min_damping <= initial_damping) || !(initial_damping <= max_damping)) {
    throw RangeError("damping bounds must satisfy 0 < min <= initial <= max");
  }
}

LmStep solve_damped_step(const Eigen::MatrixXd& jacobian, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& theta, double omega) {
  if (!(omega >= 0.0)) throw RangeError("damping must be non-negative");
  const Eigen::Index n = jacobian.cols();
  Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
  normal.diagonal().array() += omega;
  const Eigen::VectorXd gradient = jacobian.transpose() * residuals;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd pivots = ldlt.vectorD();
  const double largest = pivots.cwiseAbs().maxCoeff();
  const double threshold = largest * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (ldlt.info() != Eigen::Success || !(largest > 0.0) || !std::isfinite(largest) || pivots.minCoeff() <= threshold) {
    throw FitError("damped normal matrix is numerically singular (omega = " + std::to_string(omega) + ")");
  }

  LmStep step;
  step.delta = ldlt.solve(gradient);
  if (!step.delta.allFinite()) throw FitError("damped step is not finite");
  step.candidate = theta + step.delta;
  step.predicted_reduction = 2.0 * step.delta.dot(gradient) - (jacobian * step.delta).squaredNorm();
  return step;
}

LmStep lm_step(const Eigen::VectorXd& theta, double omega, const models::CurveModel& model,
               std::span<const DataPoint> data) {
  const Evaluation e = evaluate(model, data, theta);
  return solve_damped_step(jacobian(model, data, theta), e.residuals, theta, omega);
}

FitResult lm_fit(const models::CurveModel& model, std::span<const DataPoint> data, const Eigen::VectorXd& theta0,
                 const LmConfig& config) {
  config.validate();
  if (theta0.size() != model.parameter_count()) throw FitError("initial vector has the wrong number of parameters");
  if (data.size() < static_cast<std::size_t>(model.parameter_count())) {
    throw InsufficientDataError("need at least " + std::to_string(model.parameter_count()) + " points, have " +
                                std::to_string(data.size()));
  }
  if (!model.feasible(theta0)) throw FitError("initial parameters lie outside the model domain");

  Eigen::VectorXd theta = theta0;
  Evaluation current = evaluate(model, data, theta);
  if (!std::isfinite(current.objective)) throw FitError("model output is not finite at the initial parameters");

  FitResult result;
  result.accepted_objectives.push_back(current.objective);
  double omega = config.initial_damping;
  int iterations = 0;
  bool stopped = false;

  while (!stopped && iterations < config.max_iterations) {
    ++iterations;
    if (current.objective == 0.0) {
      result.stop_reason = StopReason::ZeroResidual;
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd j = jacobian(model, data, theta);
    if (!j.allFinite()) throw FitError("Jacobian is not finite");
    if (gradient_cosine(j, current.residuals) <= config.gradient_tolerance) {
      result.stop_reason = StopReason::GradientTolerance;
      result.converged = true;
      break;
    }

    // Retry with growing damping until a step reduces S; each attempt is one iteration.
    while (true) {
      std::optional<LmStep> step;
      try {
        step = solve_damped_step(j, current.residuals, theta, omega);
      } catch (const FitError&) {
        if (omega >= config.max_damping) throw FitError("damped normal matrix singular at maximal damping");
      }
      if (step && model.feasible(step->candidate)) {
        Evaluation trial = evaluate(model, data, step->candidate);
        if (std::isfinite(trial.objective) && trial.objective < current.objective) {
          const bool tiny = small_step(step->delta, theta, config.step_tolerance);
          theta = step->candidate;
          current = std::move(trial);
          result.accepted_objectives.push_back(current.objective);
          omega = std::max(omega / config.damping_decrease, config.min_damping);
          if (tiny) {
            result.stop_reason = StopReason::StepTolerance;
            result.converged = true;
            stopped = true;
          }
          break;
        }
      }
      omega *= config.damping_increase;
      if (omega > config.max_damping) {
        result.stop_reason = StopReason::DampingLimit;
        stopped = true;
        break;
      }
      if (iterations >= config.max_iterations) {
        result.stop_reason = StopReason::MaxIterations;
        stopped = true;
        break;
      }
      ++iterations;
    }
  }
  if (!stopped && !result.converged) result.stop_reason = StopReason::MaxIterations;

  result.theta_hat = theta;
  result.residuals = current.residuals;
  result.objective = current.objective;
  result.iterations = iterations;
  result.final_damping = omega;

  std::vector<double> observed(data.size());
  std::vector<double> fitted(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    observed[i] = data[i].value;
    fitted[i] = data[i].value - current.residuals[static_cast<Eigen::Index>(i)];
  }
  try {
    result.r_squared = r_squared(observed, fitted);
  } catch (const DataError&) {
    result.r_squared = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

double r_squared(std::span<const double> data, std::span<const double> fitted) {
  if (data.size() != fitted.size()) throw DataError("r_squared: length mismatch");
  if (data.size() < 2) throw DataError("r_squared: need at least two points");
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= static_cast<double>(data.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ss_tot += (data[i] - mean) * (data[i] - mean);
    ss_res += (data[i] - fitted[i]) * (data[i] - fitted[i]);
  }
  if (ss_tot == 0.0) throw DataError("r_squared: data are constant");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace wavefit::lm
