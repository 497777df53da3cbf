#include "heatsg/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatsg/weights.hpp"

namespace heatsg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Along each axis the kernel is exp(-A (y - c)^2 + const) in y.
struct AxisGaussian {
  double rate;
  double center;
};

AxisGaussian kernel_axis(KernelKind kind, double x, const TimeParam& tp) {
  const double t = tp.t();
  switch (kind) {
    case KernelKind::Classical:
      return {1.0 / (4.0 * t), x};
    case KernelKind::Hermite:
    case KernelKind::HermiteShifted:
      return {0.5 / std::tanh(2.0 * t), x / std::cosh(2.0 * t)};
    case KernelKind::OrnsteinUhlenbeck:
      return {0.5 / std::tanh(2.0 * t) + 0.5, x * std::exp(-2.0 * t)};
  }
  throw std::invalid_argument("unknown kernel kind");
}

ApplyResult divergent_result() {
  ApplyResult r;
  r.divergent = true;
  r.value = kInf;
  r.log_magnitude = kInf;
  r.sign = 1;
  return r;
}

ApplyResult from_integration(const IntegrationResult& ir, double radius) {
  ApplyResult r;
  r.value = ir.value;
  r.error_estimate = ir.error_estimate;
  r.evals_used = ir.evals_used;
  r.converged = ir.converged;
  r.log_magnitude = ir.log_magnitude;
  r.sign = ir.sign;
  r.truncation_radius = radius;
  return r;
}

ApplyResult apply_separable(KernelKind kind, const InitialDatum& f,
                            const Point& x, const TimeParam& tp,
                            const QuadratureConfig& config) {
  const Dim n = x.dim();
  Point lo(n);
  Point hi(n);
  std::vector<AxisFactor> factors;
  std::vector<AxisHint> hints;
  std::vector<std::vector<double>> breaks;
  double radius = 0.0;
  for (int i = 0; i < n.value(); ++i) {
    const AxisGaussian k = kernel_axis(kind, x[i], tp);
    const AxisShape shape = f.axis_shape(i, n);
    const double rate = k.rate - shape.quadratic;
    if (!(rate > 0.0)) return divergent_result();
    const double center = (2.0 * k.rate * k.center + shape.linear) / (2.0 * rate);
    const double t_eff = 1.0 / (4.0 * rate);
    const RadiusResult rr =
        truncation_radius(Point{center}, t_eff, shape.residual, config);
    if (!rr.integrable) return divergent_result();
    radius = std::max(radius, rr.radius);
    double a = center - rr.radius;
    double b = center + rr.radius;
    if (shape.support) {
      a = std::max(a, shape.support->first);
      b = std::min(b, shape.support->second);
    }
    if (!(a < b)) {
      ApplyResult zero;
      zero.converged = true;
      zero.truncation_radius = rr.radius;
      return zero;
    }
    lo[i] = a;
    hi[i] = b;
    const double xi = x[i];
    factors.push_back([kind, xi, tp, &f, i, n](double y) {
      const SignedLog d = f.axis_factor(i, y, n);
      if (d.sign == 0) return d;
      const double lk = kernel(kind, Point{xi}, Point{y}, tp, Dim(1)).log_value;
      return SignedLog{lk + d.log_abs, d.sign};
    });
    hints.push_back({center, std::sqrt(2.0 * t_eff)});
    breaks.push_back(shape.breakpoints);
  }
  LogIntegrand integrand = LogIntegrand::separable(std::move(factors));
  for (int i = 0; i < n.value(); ++i) {
    integrand.with_hint(i, hints[static_cast<std::size_t>(i)]);
    integrand.with_breakpoints(i, breaks[static_cast<std::size_t>(i)]);
  }
  return from_integration(integrate(integrand, Box{lo, hi}, config), radius);
}

ApplyResult apply_joint(KernelKind kind, const InitialDatum& f, const Point& x,
                        const TimeParam& tp, const QuadratureConfig& config) {
  const Dim n = x.dim();
  Point center(n);
  double rate = 0.0;
  for (int i = 0; i < n.value(); ++i) {
    const AxisGaussian k = kernel_axis(kind, x[i], tp);
    center[i] = k.center;
    rate = k.rate;
  }
  const RadiusResult rr =
      truncation_radius(center, 1.0 / (4.0 * rate), f.envelope(), config);
  if (!rr.integrable) return divergent_result();
  Point lo(n);
  Point hi(n);
  for (int i = 0; i < n.value(); ++i) {
    lo[i] = center[i] - rr.radius;
    hi[i] = center[i] + rr.radius;
  }
  LogIntegrand integrand =
      LogIntegrand::joint(n, [kind, x, tp, &f, n](const Point& y) {
        const SignedLog d = f.log_value(y);
        if (d.sign == 0) return d;
        return SignedLog{kernel(kind, x, y, tp, n).log_value + d.log_abs,
                         d.sign};
      });
  for (int i = 0; i < n.value(); ++i) {
    integrand.with_hint(i, {center[i], std::sqrt(0.5 / rate)});
  }
  return from_integration(integrate(integrand, Box{lo, hi}, config), rr.radius);
}

double box_heat(double x, double lo, double hi, double t) {
  const double w = 2.0 * std::sqrt(t);
  return 0.5 * (std::erf((x - lo) / w) - std::erf((x - hi) / w));
}

}  // namespace

ApplyResult apply(KernelKind kind, const InitialDatum& f, const Point& x,
                  const TimeParam& tp, const QuadratureConfig& config) {
  config.validate();
  if (f.is_zero()) {
    ApplyResult r;
    r.converged = true;
    return r;
  }
  if (f.separable(x.dim())) return apply_separable(kind, f, x, tp, config);
  return apply_joint(kind, f, x, tp, config);
}

std::optional<double> closed_form(KernelKind kind, const InitialDatum& f,
                                  const Point& x, const TimeParam& tp) {
  if (!f.has_closed_form(kind)) return std::nullopt;
  const Dim n = x.dim();
  const double t = tp.t();
  return std::visit(
      [&](const auto& fam) -> std::optional<double> {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, InitialDatum::Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, InitialDatum::HermiteFunction>) {
          int degree = 0;
          for (int i = 0; i < n.value(); ++i) {
            degree += fam.k.size() == 1 ? fam.k[0] : fam.k.at(static_cast<std::size_t>(i));
          }
          const double decay = kind == KernelKind::Hermite
                                   ? (2.0 * degree + n.value()) * t
                                   : 2.0 * degree * t;
          return std::exp(-decay) * f.value(x);
        } else if constexpr (std::is_same_v<T, InitialDatum::HermitePolynomial>) {
          int degree = 0;
          for (int i = 0; i < n.value(); ++i) {
            degree += fam.k.size() == 1 ? fam.k[0] : fam.k.at(static_cast<std::size_t>(i));
          }
          return std::exp(-2.0 * degree * t) * f.value(x);
        } else if constexpr (std::is_same_v<T, InitialDatum::Gaussian>) {
          return gaussian_heat_oracle(fam.a, x, t, n);
        } else if constexpr (std::is_same_v<T, InitialDatum::BoxIndicator>) {
          double v = 1.0;
          for (int i = 0; i < n.value(); ++i) {
            const std::size_t j = fam.lo.size() == 1 ? 0 : static_cast<std::size_t>(i);
            v *= box_heat(x[i], fam.lo[j], fam.hi[j], t);
          }
          return v;
        } else {
          return std::nullopt;
        }
      },
      f.family());
}

MaximalReport maximal(KernelKind kind, const InitialDatum& f, const Point& x,
                      double horizon, int grid_size,
                      const QuadratureConfig& config) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid size must be >= 2");
  MaximalReport rep;
  rep.point = x;
  rep.horizon = horizon;
  for (int j = 1; j <= grid_size; ++j) {
    const double t = std::ldexp(horizon, -j);
    const ApplyResult r = apply(kind, f, x, TimeParam::from_t(t), config);
    rep.time_grid.push_back(t);
    if (r.divergent) {
      rep.finite = false;
      rep.values.push_back(kInf);
      continue;
    }
    rep.values.push_back(r.value);
    if (rep.time_grid.size() == 1 || std::abs(r.value) > rep.sup_value) {
      rep.sup_value = std::abs(r.value);
      rep.argmax_time = t;
    }
  }
  if (!rep.finite) {
    rep.sup_value = kInf;
    for (std::size_t j = 0; j < rep.values.size(); ++j) {
      if (std::isinf(rep.values[j])) {
        rep.argmax_time = rep.time_grid[j];
        break;
      }
    }
  }
  return rep;
}

ConvergenceReport converge(KernelKind kind, const InitialDatum& f,
                           const Point& x, const ConvergeOptions& options,
                           const QuadratureConfig& config) {
  if (!(options.t0 > 0.0)) throw std::invalid_argument("t0 must be positive");
  if (!(options.shrink > 0.0 && options.shrink < 1.0)) {
    throw std::invalid_argument("shrink factor must lie in (0, 1)");
  }
  if (options.steps < 1) throw std::invalid_argument("steps must be >= 1");
  ConvergenceReport rep;
  rep.point = x;
  rep.target = f.value(x);
  double t = options.t0;
  for (int k = 1; k <= options.steps; ++k) {
    t *= options.shrink;
    const ApplyResult r = apply(kind, f, x, TimeParam::from_t(t), config);
    if (r.divergent) {
      rep.divergence_index = k;
      rep.converged = false;
      return rep;
    }
    rep.times.push_back(t);
    rep.values.push_back(r.value);
    rep.errors.push_back(std::abs(r.value - rep.target));
  }
  rep.converged = rep.errors.back() < options.threshold;
  return rep;
}

DivergenceDemo divergence_demo(double p, const QuadratureConfig& config) {
  const LebesgueExponent exponent(p);
  DivergenceDemo demo;
  demo.p = p;
  demo.note =
      "witness pair v=exp(-|y|^4), f=exp(|y|^4/(2p)) is a fixed design choice";

  // |f|^p v = exp(p |y|^4/(2p) - |y|^4)
  const AxisFactor lp_integrand = [p](double y) {
    const double y4 = y * y * y * y;
    return SignedLog::from_log(p * (y4 / (2.0 * p)) - y4);
  };
  demo.finite_radii = {4.0, 8.0, 16.0};
  bool all_converged = true;
  for (double r : demo.finite_radii) {
    const IntegrationResult ir =
        integrate_1d(lp_integrand, -r, r, config, {}, AxisHint{0.0, 1.0});
    all_converged = all_converged && ir.converged;
    demo.finite_values.push_back(ir.value);
  }
  bool stable = true;
  for (std::size_t i = 1; i < demo.finite_values.size(); ++i) {
    stable = stable && std::abs(demo.finite_values[i] - demo.finite_values[i - 1]) <=
                           1e-9 * std::abs(demo.finite_values[i]);
  }
  demo.finite_certified = all_converged && stable;

  const Point origin{0.0};
  const AxisFactor heat_integrand = [p, &origin](double y) {
    const double y4 = y * y * y * y;
    return SignedLog::from_log(
        classical_kernel(origin, Point{y}, 1.0, Dim(1)).log_value +
        y4 / (2.0 * p));
  };
  demo.truncated_radii = {4.0, 8.0, 12.0};
  for (double r : demo.truncated_radii) {
    const IntegrationResult ir =
        integrate_1d(heat_integrand, -r, r, config, {}, AxisHint{0.0, 1.0});
    demo.truncated_log_values.push_back(ir.log_magnitude);
  }
  bool increasing = true;
  for (std::size_t i = 1; i < demo.truncated_log_values.size(); ++i) {
    increasing = increasing &&
                 demo.truncated_log_values[i] > demo.truncated_log_values[i - 1];
  }
  demo.growth_certified =
      increasing && demo.truncated_log_values.back() > std::log(1e6);

  demo.untruncated_divergent =
      apply(KernelKind::Classical,
            InitialDatum::quartic_exponential(1.0 / (2.0 * p)), origin,
            TimeParam::from_t(1.0), config)
          .divergent;
  demo.weight_member =
      dpw_classify(WeightSpec::stretched_exp(1.0, 4.0), exponent, Dim(1), config)
          .member;
  return demo;
}

}  // namespace heatsg
