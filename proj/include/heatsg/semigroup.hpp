#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "heatsg/datum.hpp"
#include "heatsg/kernel.hpp"
#include "heatsg/quadrature.hpp"

namespace heatsg {

/// u(x,t) for one kernel, one datum, one point.
struct ApplyResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evals_used = 0;
  double truncation_radius = 0.0;
  bool converged = false;
  // Set when the datum's growth beats the kernel's Gaussian decay; value is
  // then meaningless (+inf).
  bool divergent = false;
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

ApplyResult apply(KernelKind kind, const InitialDatum& f, const Point& x,
                  const TimeParam& tp, const QuadratureConfig& config = {});

/// Exact semigroup image when one is known (see InitialDatum::has_closed_form).
std::optional<double> closed_form(KernelKind kind, const InitialDatum& f,
                                  const Point& x, const TimeParam& tp);

/// Grid approximation of sup_{t<R} |u(x,t)| on t_j = R 2^{-j}, j = 1..J.
struct MaximalReport {
  Point point;
  double horizon = 0.0;
  std::vector<double> time_grid;
  std::vector<double> values;
  double sup_value = 0.0;
  double argmax_time = 0.0;
  bool finite = true;
};

MaximalReport maximal(KernelKind kind, const InitialDatum& f, const Point& x,
                      double horizon, int grid_size,
                      const QuadratureConfig& config = {});

struct ConvergeOptions {
  double t0 = 1.0;
  int steps = 10;
  double shrink = 0.25;
  double threshold = 1e-3;
};

/// u(x, t_k) against f(x) along t_k = t0 shrink^k, k = 1..steps.
struct ConvergenceReport {
  Point point;
  std::vector<double> times;
  std::vector<double> values;
  double target = 0.0;
  std::vector<double> errors;
  bool converged = false;
  std::optional<int> divergence_index;
};

ConvergenceReport converge(KernelKind kind, const InitialDatum& f,
                           const Point& x, const ConvergeOptions& options,
                           const QuadratureConfig& config = {});

/// Witness pair for a weight outside D_p^W, in one dimension:
/// v(y) = exp(-y^4) and f(y) = exp(y^4/(2p)). f lies in L^p(v), yet the
/// heat integral of f diverges.
struct DivergenceDemo {
  double p = 1.0;
  // int |f|^p v dy over [-R, R] for R in finite_radii.
  std::vector<double> finite_radii;
  std::vector<double> finite_values;
  bool finite_certified = false;
  // log of int_{|y|<=R} W_1(-y) f(y) dy for R in truncated_radii.
  std::vector<double> truncated_radii;
  std::vector<double> truncated_log_values;
  bool growth_certified = false;
  bool untruncated_divergent = false;
  bool weight_member = true;
  std::string note;
};

DivergenceDemo divergence_demo(double p, const QuadratureConfig& config = {});

}  // namespace heatsg
