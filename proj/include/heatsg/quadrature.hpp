#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "heatsg/kernel.hpp"

namespace heatsg {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  // Absolute floor on the error target. Zero keeps the tolerance purely
  // relative, which is what log-space comparisons of tiny kernels need.
  double abs_tol = 0.0;
  long max_evals = 10'000'000;
  double tail_mass_tol = 1e-12;
  int base_points_per_axis = 64;

  /// Throws std::invalid_argument on inadmissible settings.
  void validate() const;
};

struct IntegrationResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evals_used = 0;
  double truncation_radius = 0.0;
  bool converged = false;
  // log|value| and sign(value). Stays finite when value itself overflows
  // or underflows.
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

/// A real number as (sign, log|value|).
struct SignedLog {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static SignedLog zero() { return {}; }
  static SignedLog from_log(double log_abs) { return {log_abs, 1}; }
  static SignedLog from_value(double v);

  double value() const;
  SignedLog operator*(const SignedLog& o) const {
    if (sign == 0 || o.sign == 0) return zero();
    return {log_abs + o.log_abs, sign * o.sign};
  }
};

/// Upper envelope of log|f(y)| used to size truncation windows:
///   quadratic*|y|^2 + linear*|y| + poly_degree*log(1+|y|)
///     + power_coeff*|y|^power_exponent.
struct GrowthEnvelope {
  double quadratic = 0.0;
  double linear = 0.0;
  double poly_degree = 0.0;
  double power_coeff = 0.0;
  double power_exponent = 0.0;
};

struct RadiusResult {
  bool integrable = true;
  double radius = 0.0;
};

/// Radius about `center` outside of which exp(-r^2/(4 t_eff)) times the growth
/// envelope carries relative mass at most config.tail_mass_tol. Reports
/// integrable=false when the envelope beats every Gaussian of that width.
RadiusResult truncation_radius(const Point& center, double t_eff,
                               const GrowthEnvelope& growth,
                               const QuadratureConfig& config);

/// Location and width of the dominant Gaussian bump along one axis. Used to
/// place the initial panels.
struct AxisHint {
  double center = 0.0;
  double scale = 1.0;
};

using AxisFactor = std::function<SignedLog(double)>;
using JointFunction = std::function<SignedLog(const Point&)>;

/// A log-space integrand on R^n. Separable integrands are products of
/// per-axis factors and are integrated axis by axis.
class LogIntegrand {
 public:
  static LogIntegrand separable(std::vector<AxisFactor> factors);
  static LogIntegrand joint(Dim n, JointFunction f);

  LogIntegrand& with_breakpoints(int axis, std::vector<double> points);
  LogIntegrand& with_hint(int axis, AxisHint hint);

  Dim dim() const { return Dim(n_); }
  bool is_separable() const { return !factors_.empty(); }

  SignedLog operator()(const Point& y) const;
  const AxisFactor& factor(int axis) const;
  std::span<const double> breakpoints(int axis) const;
  std::optional<AxisHint> hint(int axis) const;

 private:
  int n_ = 1;
  std::vector<AxisFactor> factors_;
  JointFunction joint_;
  std::vector<std::vector<double>> breakpoints_;
  std::vector<std::optional<AxisHint>> hints_;
};

struct Box {
  Point lo;
  Point hi;
};

struct Ball {
  Point center;
  double radius;
};

using Domain = std::variant<Box, Ball>;

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. Panels are rescaled by
/// their largest log value before exponentiation.
IntegrationResult integrate_1d(const AxisFactor& f, double a, double b,
                               const QuadratureConfig& config,
                               std::span<const double> breakpoints = {},
                               std::optional<AxisHint> hint = std::nullopt);

/// Integral over a box or ball in R^n (n <= 3). Separable integrands on boxes
/// are tensorized; anything else is integrated as nested 1-D integrals.
IntegrationResult integrate(const LogIntegrand& integrand, const Domain& domain,
                            const QuadratureConfig& config);

/// W_t[exp(-a|.|^2)](x) = (1+4at)^{-n/2} exp(-a|x|^2/(1+4at)); nullopt when
/// 1 + 4at <= 0 (the Gaussian integral diverges).
std::optional<double> gaussian_heat_oracle(double a, const Point& x, double t,
                                           Dim n);

}  // namespace heatsg
