#include "wavefit/models.hpp"

#include <cmath>
#include <string>

#include "wavefit/errors.hpp"

namespace wavefit::models {

namespace {

constexpr std::array<std::string_view, 3> kKindNames{"ModifiedWeibull", "DoubleLogistic", "ComplementLogistic"};

bool all_finite(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Shape factor x^(-beta-1) exp(-x^(-beta)) evaluated in log space so a huge
// x^(-beta) underflows to zero instead of producing inf * 0.
struct WeibullTerms {
  double shape;  // W / gamma
  double log_x;
  double u;  // x^(-beta)
};

WeibullTerms weibull_terms(double alpha, double beta, double mu, double t) {
  const double x = (t - mu) / alpha;
  const double log_x = std::log(x);
  const double a = -beta * log_x;
  const double u = std::exp(a);
  return {std::exp(a - log_x - u), log_x, u};
}

double weibull_value(double gamma, double alpha, double beta, double mu, double t) {
  if (t <= mu) return 0.0;
  return gamma * weibull_terms(alpha, beta, mu, t).shape;
}

WeibullGradient weibull_gradient(double gamma, double alpha, double beta, double mu, double t) {
  if (t <= mu) return {};
  const WeibullTerms w = weibull_terms(alpha, beta, mu, t);
  if (w.shape == 0.0) return {};
  const double value = gamma * w.shape;
  return {w.shape, value / alpha * ((beta + 1.0) - beta * w.u), value * w.log_x * (w.u - 1.0)};
}

double dl_value(const DoubleLogisticParams& p, double t) {
  return p.lambda * sigmoid(p.nu_g * (t - p.kappa_g)) * sigmoid(-p.nu_d * (t - p.kappa_d));
}

DoubleLogisticGradient dl_gradient(const DoubleLogisticParams& p, double t) {
  const double zg = p.nu_g * (t - p.kappa_g);
  const double zd = p.nu_d * (t - p.kappa_d);
  const double grow = sigmoid(zg);
  const double grow_rest = sigmoid(-zg);  // 1 - grow
  const double keep = sigmoid(-zd);       // 1 - s(zd)
  const double decayed = sigmoid(zd);
  const double f_over_lambda = grow * keep;
  const double lg = p.lambda * grow * grow_rest * keep;
  const double ld = p.lambda * grow * keep * decayed;
  return {f_over_lambda, lg * (t - p.kappa_g), -ld * (t - p.kappa_d), -lg * p.nu_g, ld * p.nu_d};
}

}  // namespace

std::string_view to_string(ModelKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

ModelKind parse_model_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<ModelKind>(i);
  }
  throw RangeError("unknown model kind '" + std::string(text) + "'");
}

void WeibullParams::validate() const {
  if (!all_finite({gamma, alpha, beta, mu})) throw RangeError("Weibull parameters must be finite");
  if (!(alpha > 0.0)) throw RangeError("Weibull alpha must be positive");
}

double weibull_eval(const WeibullParams& p, double t) {
  p.validate();
  if (!std::isfinite(t)) throw RangeError("time must be finite");
  return weibull_value(p.gamma, p.alpha, p.beta, p.mu, t);
}

WeibullGradient weibull_jacobian(const WeibullParams& p, double t) {
  p.validate();
  if (!std::isfinite(t)) throw RangeError("time must be finite");
  return weibull_gradient(p.gamma, p.alpha, p.beta, p.mu, t);
}

void DoubleLogisticParams::validate() const {
  if (!all_finite({lambda, nu_g, nu_d, kappa_g, kappa_d})) throw RangeError("double logistic parameters must be finite");
  if (!(nu_g > 0.0) || !(nu_d > 0.0)) throw RangeError("double logistic steepness must be positive");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double double_logistic_eval(const DoubleLogisticParams& p, double t) {
  p.validate();
  return dl_value(p, t);
}

DoubleLogisticGradient double_logistic_jacobian(const DoubleLogisticParams& p, double t) {
  p.validate();
  return dl_gradient(p, t);
}

double complement_logistic_eval(const DoubleLogisticParams& p, double t) { return 100.0 - double_logistic_eval(p, t); }

DoubleLogisticGradient complement_logistic_jacobian(const DoubleLogisticParams& p, double t) {
  const DoubleLogisticGradient g = double_logistic_jacobian(p, t);
  return {-g.d_lambda, -g.d_nu_g, -g.d_nu_d, -g.d_kappa_g, -g.d_kappa_d};
}

double WeibullModel::value(const Eigen::VectorXd& theta, double t) const {
  return weibull_value(theta[0], theta[1], theta[2], mu_, t);
}

void WeibullModel::gradient(const Eigen::VectorXd& theta, double t, Eigen::Ref<Eigen::VectorXd> out) const {
  const WeibullGradient g = weibull_gradient(theta[0], theta[1], theta[2], mu_, t);
  out << g.d_gamma, g.d_alpha, g.d_beta;
}

bool WeibullModel::feasible(const Eigen::VectorXd& theta) const { return theta.allFinite() && theta[1] > 0.0; }

double DoubleLogisticModel::value(const Eigen::VectorXd& theta, double t) const {
  const double f = dl_value(params(theta), t);
  return complement_ ? 100.0 - f : f;
}

void DoubleLogisticModel::gradient(const Eigen::VectorXd& theta, double t, Eigen::Ref<Eigen::VectorXd> out) const {
  const DoubleLogisticGradient g = dl_gradient(params(theta), t);
  const double sign = complement_ ? -1.0 : 1.0;
  out << sign * g.d_lambda, sign * g.d_nu_g, sign * g.d_nu_d, sign * g.d_kappa_g, sign * g.d_kappa_d;
}

bool DoubleLogisticModel::feasible(const Eigen::VectorXd& theta) const {
  return theta.allFinite() && theta[1] > 0.0 && theta[2] > 0.0;
}

}  // namespace wavefit::models
