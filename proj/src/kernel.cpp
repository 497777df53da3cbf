#include "heatsg/kernel.hpp"

#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace heatsg {

namespace {

constexpr double kPi = std::numbers::pi;

void check_points(const Point& x, const Point& y, Dim n) {
  if (x.size() != n.value() || y.size() != n.value()) {
    throw std::invalid_argument("point dimension does not match n");
  }
}

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::domain_error("time must be positive and finite, got " +
                            std::to_string(t));
  }
}

// log(sinh(u)) for u > 0 without overflow for large u.
double log_sinh(double u) {
  if (u < 1.0) return std::log(std::sinh(u));
  return u + std::log1p(-std::exp(-2.0 * u)) - std::numbers::ln2;
}

}  // namespace

Dim::Dim(int n) : n_(n) {
  if (n < 1 || n > kMax) {
    throw std::invalid_argument("dimension must be in [1, 3], got " +
                                std::to_string(n));
  }
}

Point::Point(Dim n) : n_(n.value()) {}

Point::Point(std::initializer_list<double> coords)
    : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords)
    : n_(Dim(static_cast<int>(coords.size())).value()) {
  for (std::size_t i = 0; i < coords.size(); ++i) c_[i] = coords[i];
}

double Point::norm_squared() const {
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) acc += (*this)[i] * (*this)[i];
  return acc;
}

double dot(const Point& x, const Point& y) {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double distance_squared(const Point& x, const Point& y) {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

double sum_squared(const Point& x, const Point& y) {
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double d = x[i] + y[i];
    acc += d * d;
  }
  return acc;
}

TimeParam TimeParam::from_t(double t) { return TimeParam(t, meda_inverse(t)); }

TimeParam TimeParam::from_s(double s) { return TimeParam(meda_forward(s), s); }

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Classical:
      return "classical";
    case KernelKind::Hermite:
      return "hermite";
    case KernelKind::HermiteShifted:
      return "hermite-shifted";
    case KernelKind::OrnsteinUhlenbeck:
      return "ou";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "classical") return KernelKind::Classical;
  if (name == "hermite") return KernelKind::Hermite;
  if (name == "hermite-shifted") return KernelKind::HermiteShifted;
  if (name == "ou" || name == "ornstein-uhlenbeck") {
    return KernelKind::OrnsteinUhlenbeck;
  }
  throw std::invalid_argument("unknown kernel kind '" + std::string(name) +
                              "'");
}

double meda_forward(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw std::domain_error("Meda parameter must lie in (0, 1), got " +
                            std::to_string(s));
  }
  return std::atanh(s);
}

double meda_inverse(double t) {
  check_time(t);
  const double s = std::tanh(t);
  if (s >= 1.0) return std::nextafter(1.0, 0.0);
  return s;
}

LogDensity classical_kernel(const Point& x, const Point& y, double t, Dim n) {
  check_time(t);
  check_points(x, y, n);
  return {-0.5 * n.as_double() * std::log(4.0 * kPi * t) -
          distance_squared(x, y) / (4.0 * t)};
}

LogDensity hermite_kernel_s(const Point& x, const Point& y, double s, Dim n) {
  if (!(s > 0.0 && s < 1.0)) {
    throw std::domain_error("Meda parameter must lie in (0, 1), got " +
                            std::to_string(s));
  }
  check_points(x, y, n);
  const double log_prefactor =
      0.5 * n.as_double() * (std::log1p(-s * s) - std::log(4.0 * kPi * s));
  const double exponent =
      0.25 * (s * sum_squared(x, y) + distance_squared(x, y) / s);
  return {log_prefactor - exponent};
}

LogDensity hermite_kernel_t(const Point& x, const Point& y, double t, Dim n) {
  check_time(t);
  check_points(x, y, n);
  const double log_prefactor =
      -0.5 * n.as_double() * (std::log(2.0 * kPi) + log_sinh(2.0 * t));
  const double coth2t = 1.0 / std::tanh(2.0 * t);
  const double exponent =
      0.5 * distance_squared(x, y) * coth2t + dot(x, y) * std::tanh(t);
  return {log_prefactor - exponent};
}

LogDensity hermite_shifted_kernel(const Point& x, const Point& y, double t,
                                  Dim n) {
  return {n.as_double() * t + hermite_kernel_t(x, y, t, n).log_value};
}

LogDensity ou_kernel(const Point& x, const Point& y, double t, Dim n) {
  const double h = hermite_kernel_t(x, y, t, n).log_value;
  return {n.as_double() * t + 0.5 * (x.norm_squared() - y.norm_squared()) + h};
}

LogDensity ou_kernel_gaussian_measure(const Point& x, const Point& y, double t,
                                      Dim n) {
  return {y.norm_squared() + 0.5 * n.as_double() * std::log(kPi) +
          ou_kernel(x, y, t, n).log_value};
}

LogDensity kernel(KernelKind kind, const Point& x, const Point& y,
                  const TimeParam& tp, Dim n) {
  switch (kind) {
    case KernelKind::Classical:
      return classical_kernel(x, y, tp.t(), n);
    case KernelKind::Hermite:
      return hermite_kernel_t(x, y, tp.t(), n);
    case KernelKind::HermiteShifted:
      return hermite_shifted_kernel(x, y, tp.t(), n);
    case KernelKind::OrnsteinUhlenbeck:
      return ou_kernel(x, y, tp.t(), n);
  }
  throw std::invalid_argument("unknown kernel kind");
}

}  // namespace heatsg
