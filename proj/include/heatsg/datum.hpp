#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heatsg/kernel.hpp"
#include "heatsg/quadrature.hpp"

namespace heatsg {

/// Physicists' Hermite polynomial H_k(x) by three-term recurrence.
double hermite_polynomial(int k, double x);

/// Normalized Hermite function (2^k k! sqrt(pi))^{-1/2} H_k(x) e^{-x^2/2}, in
/// log space.
SignedLog log_hermite_function(int k, double x);

/// Log-space shape of a separable datum along one axis:
///   log|f_i(y)| = quadratic*y^2 + linear*y + (bounded or residual growth).
/// The Gaussian part is folded exactly into the kernel window; the residual
/// envelope only sizes the truncation.
struct AxisShape {
  double quadratic = 0.0;
  double linear = 0.0;
  GrowthEnvelope residual;
  std::optional<std::pair<double, double>> support;
  std::vector<double> breakpoints;
};

/// Parametric initial data. Multi-index and per-axis parameters given with a
/// single entry are broadcast to every axis.
class InitialDatum {
 public:
  struct Gaussian {  // exp(-a|x|^2 + b.x)
    double a = 0.0;
    std::vector<double> b;
  };
  struct HermiteFunction {  // prod_i h_{k_i}(x_i)
    std::vector<int> k;
  };
  struct HermitePolynomial {  // prod_i H_{k_i}(x_i)
    std::vector<int> k;
  };
  struct BoxIndicator {  // indicator of prod_i [lo_i, hi_i]
    std::vector<double> lo;
    std::vector<double> hi;
  };
  struct QuarticExponential {  // exp(c|x|^4)
    double c = 0.0;
  };
  struct TabulatedContinuous {  // prod_i g(x_i), g piecewise linear, g = 0 off the nodes
    std::vector<double> nodes;
    std::vector<double> values;
  };
  struct Zero {};

  using Family = std::variant<Gaussian, HermiteFunction, HermitePolynomial,
                              BoxIndicator, QuarticExponential,
                              TabulatedContinuous, Zero>;

  explicit InitialDatum(Family family);

  static InitialDatum gaussian(double a, std::vector<double> b = {});
  static InitialDatum hermite_function(std::vector<int> k);
  static InitialDatum hermite_polynomial(std::vector<int> k);
  static InitialDatum box(std::vector<double> lo, std::vector<double> hi);
  static InitialDatum quartic_exponential(double c);
  static InitialDatum tabulated(std::vector<double> nodes,
                                std::vector<double> values);
  static InitialDatum zero();

  /// exp(log_scale - a|y|^2) * f(y). With a = 1/2 and
  /// log_scale = -(n/4) log(pi) this is the isometry U onto L^2(dx).
  InitialDatum times_gaussian(double a, double log_scale) const;

  const Family& family() const { return family_; }
  bool is_zero() const { return std::holds_alternative<Zero>(family_); }
  bool is_modified() const { return gauss_a_ != 0.0 || log_scale_ != 0.0; }

  double value(const Point& y) const;
  SignedLog log_value(const Point& y) const;

  bool separable(Dim n) const;
  SignedLog axis_factor(int axis, double y, Dim n) const;
  AxisShape axis_shape(int axis, Dim n) const;

  /// Growth of log|f| about the origin, for the non-separable path.
  GrowthEnvelope envelope() const;

  /// Whether apply() has an exact image for this kernel.
  bool has_closed_form(KernelKind kind) const;

  /// Compact textual form, e.g. "hermite-fn:0" or "box:-1,1".
  std::string describe() const;

 private:
  Family family_;
  double gauss_a_ = 0.0;
  double log_scale_ = 0.0;
};

}  // namespace heatsg
