#pragma once

// Wave-shape model functions and their analytic parameter Jacobians.
//
// Modified Weibull (inverse-Weibull / Frechet form with free amplitude):
//   W(t) = gamma * x^(-beta-1) * exp(-x^(-beta)),  x = (t - mu) / alpha,  t > mu
//   W(t) = 0                                                              t <= mu
// beta > 0: fast growth, heavy right tail; beta < 0: slow growth, rapid decline.
//
// Double logistic:
//   f(t) = lambda * s(nu_g (t - kappa_g)) * (1 - s(nu_d (t - kappa_d))),  s(z) = 1 / (1 + e^-z)

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Core>

namespace wavefit::models {

enum class ModelKind : std::uint8_t { ModifiedWeibull, DoubleLogistic, ComplementLogistic };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view text);

struct WeibullParams {
  double gamma{};  // amplitude, percent
  double alpha{};  // scale, weeks, > 0
  double beta{};   // signed shape
  double mu{};     // location (week ordinal), fixed while fitting

  /// Throws RangeError on alpha <= 0 or non-finite values.
  void validate() const;
};

struct WeibullGradient {
  double d_gamma{};
  double d_alpha{};
  double d_beta{};
};

double weibull_eval(const WeibullParams& p, double t);
/// Zero for t <= mu.
WeibullGradient weibull_jacobian(const WeibullParams& p, double t);

struct DoubleLogisticParams {
  double lambda{};   // amplitude, percent
  double nu_g{};     // growth steepness, 1/week, > 0
  double nu_d{};     // decay steepness, 1/week, > 0
  double kappa_g{};  // growth midpoint, week ordinal
  double kappa_d{};  // decay midpoint, week ordinal

  void validate() const;
  /// kappa_g > kappa_d is allowed but unusual; callers may warn on it.
  bool midpoints_ordered() const { return kappa_g <= kappa_d; }
};

struct DoubleLogisticGradient {
  double d_lambda{};
  double d_nu_g{};
  double d_nu_d{};
  double d_kappa_g{};
  double d_kappa_d{};
};

/// Overflow-free logistic: evaluated through e^-|z|.
double sigmoid(double z);

double double_logistic_eval(const DoubleLogisticParams& p, double t);
DoubleLogisticGradient double_logistic_jacobian(const DoubleLogisticParams& p, double t);

/// 100 - f(t), for series that fall from near 100 % (hospital shares).
double complement_logistic_eval(const DoubleLogisticParams& p, double t);
DoubleLogisticGradient complement_logistic_jacobian(const DoubleLogisticParams& p, double t);

// --- least-squares adapters -------------------------------------------------------

/// A model g(theta, t) with an analytic gradient, as consumed by the optimizer.
class CurveModel {
 public:
  virtual ~CurveModel() = default;

  virtual Eigen::Index parameter_count() const = 0;
  virtual double value(const Eigen::VectorXd& theta, double t) const = 0;
  virtual void gradient(const Eigen::VectorXd& theta, double t, Eigen::Ref<Eigen::VectorXd> out) const = 0;
  /// Steps leaving the feasible region are rejected by the optimizer.
  virtual bool feasible(const Eigen::VectorXd& /*theta*/) const { return true; }
};

/// theta = (gamma, alpha, beta); mu is held fixed.
class WeibullModel final : public CurveModel {
 public:
  explicit WeibullModel(double mu) : mu_(mu) {}

  double mu() const { return mu_; }
  WeibullParams params(const Eigen::VectorXd& theta) const { return {theta[0], theta[1], theta[2], mu_}; }
  static Eigen::VectorXd theta(const WeibullParams& p) { return Eigen::Vector3d(p.gamma, p.alpha, p.beta); }

  Eigen::Index parameter_count() const override { return 3; }
  double value(const Eigen::VectorXd& theta, double t) const override;
  void gradient(const Eigen::VectorXd& theta, double t, Eigen::Ref<Eigen::VectorXd> out) const override;
  bool feasible(const Eigen::VectorXd& theta) const override;

 private:
  double mu_;
};

/// theta = (lambda, nu_g, nu_d, kappa_g, kappa_d). `complement` fits 100 - f(t).
class DoubleLogisticModel final : public CurveModel {
 public:
  explicit DoubleLogisticModel(bool complement = false) : complement_(complement) {}

  bool complement() const { return complement_; }
  static DoubleLogisticParams params(const Eigen::VectorXd& theta) {
    return {theta[0], theta[1], theta[2], theta[3], theta[4]};
  }
  static Eigen::VectorXd theta(const DoubleLogisticParams& p) {
    Eigen::VectorXd v(5);
    v << p.lambda, p.nu_g, p.nu_d, p.kappa_g, p.kappa_d;
    return v;
  }

  Eigen::Index parameter_count() const override { return 5; }
  double value(const Eigen::VectorXd& theta, double t) const override;
  void gradient(const Eigen::VectorXd& theta, double t, Eigen::Ref<Eigen::VectorXd> out) const override;
  bool feasible(const Eigen::VectorXd& theta) const override;

 private:
  bool complement_;
};

}  // namespace wavefit::models
