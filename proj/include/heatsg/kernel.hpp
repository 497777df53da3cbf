#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string_view>

namespace heatsg {

/// Ambient dimension of R^n. Quadrature is capped at three dimensions, so the
/// whole library is too.
class Dim {
 public:
  static constexpr int kMax = 3;

  explicit Dim(int n);

  int value() const { return n_; }
  double as_double() const { return static_cast<double>(n_); }

  friend bool operator==(Dim, Dim) = default;

 private:
  int n_;
};

/// A point of R^n, n <= 3, stored inline.
class Point {
 public:
  Point() = default;
  explicit Point(Dim n);
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  Dim dim() const { return Dim(n_); }
  int size() const { return n_; }

  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  std::span<const double> coords() const {
    return {c_.data(), static_cast<std::size_t>(n_)};
  }

  double norm_squared() const;

 private:
  std::array<double, Dim::kMax> c_{};
  int n_ = 0;
};

double dot(const Point& x, const Point& y);
double distance_squared(const Point& x, const Point& y);
double sum_squared(const Point& x, const Point& y);  // |x + y|^2

/// Physical time t and Meda parameter s = tanh(t), kept together.
class TimeParam {
 public:
  static TimeParam from_t(double t);
  static TimeParam from_s(double s);

  double t() const { return t_; }
  double s() const { return s_; }

 private:
  TimeParam(double t, double s) : t_(t), s_(s) {}
  double t_;
  double s_;
};

enum class KernelKind { Classical, Hermite, HermiteShifted, OrnsteinUhlenbeck };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

/// Natural log of a strictly positive kernel value.
struct LogDensity {
  double log_value;

  double value() const { return std::exp(log_value); }
};

/// t = (1/2) ln((1+s)/(1-s)); throws std::domain_error unless 0 < s < 1.
double meda_forward(double s);

/// s = tanh(t), clamped below 1; throws std::domain_error unless t > 0.
double meda_inverse(double t);

/// W_t(x - y) = (4 pi t)^{-n/2} exp(-|x-y|^2 / (4t)).
LogDensity classical_kernel(const Point& x, const Point& y, double t, Dim n);

/// Mehler kernel of exp(-tH), H = -Delta + |x|^2, in the Meda parameter s:
///   ((1-s^2)/(4 pi s))^{n/2} exp(-[s|x+y|^2 + |x-y|^2/s]/4).
LogDensity hermite_kernel_s(const Point& x, const Point& y, double s, Dim n);

/// Mehler kernel of exp(-tH) in physical time:
///   (2 pi sinh 2t)^{-n/2} exp(-[|x-y|^2 coth(2t)/2 + x.y tanh t]).
/// Computed without going through hermite_kernel_s.
LogDensity hermite_kernel_t(const Point& x, const Point& y, double t, Dim n);

/// Kernel of exp(-t(H - n)) = e^{nt} exp(-tH).
LogDensity hermite_shifted_kernel(const Point& x, const Point& y, double t,
                                  Dim n);

/// Lebesgue-measure kernel of exp(-tO), O = -Delta + 2x.grad:
///   K_t(x,y) = e^{nt} e^{(|x|^2 - |y|^2)/2} W^H_t(x,y).
LogDensity ou_kernel(const Point& x, const Point& y, double t, Dim n);

/// Gaussian-measure form M_t(x,y) = e^{|y|^2} pi^{n/2} K_t(x,y); symmetric.
LogDensity ou_kernel_gaussian_measure(const Point& x, const Point& y, double t,
                                      Dim n);

/// Dispatch on kind. Hermite-type kernels use the physical-time form.
LogDensity kernel(KernelKind kind, const Point& x, const Point& y,
                  const TimeParam& tp, Dim n);

}  // namespace heatsg
