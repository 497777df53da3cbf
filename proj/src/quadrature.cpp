#include "heatsg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace heatsg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod abscissae on [-1, 1]; index 7 is the centre. Gauss nodes are the odd
// indices 1, 3, 5 plus the centre.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double scale = -kInf;  // log of the largest |f| on the nodes
  double kronrod = 0.0;  // integral estimate / e^scale
  double error = 0.0;    // error estimate / e^scale
  bool roundoff = false;
  bool splittable = true;
};

Panel evaluate_panel(const AxisFactor& f, double a, double b, long& evals) {
  Panel p;
  p.a = a;
  p.b = b;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  std::array<SignedLog, 15> v;
  v[0] = f(mid);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[static_cast<std::size_t>(j)];
    v[static_cast<std::size_t>(1 + 2 * j)] = f(mid - dx);
    v[static_cast<std::size_t>(2 + 2 * j)] = f(mid + dx);
  }
  evals += 15;

  double m = -kInf;
  for (const auto& s : v) {
    if (std::isnan(s.log_abs)) {
      p.scale = std::numeric_limits<double>::quiet_NaN();
      return p;
    }
    if (s.sign != 0) m = std::max(m, s.log_abs);
  }
  p.scale = m;
  p.splittable = half > 64.0 * kEps * std::max(std::abs(a), std::abs(b));
  if (!std::isfinite(m)) return p;

  std::array<double, 15> w{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = v[i].sign == 0 ? 0.0 : v[i].sign * std::exp(v[i].log_abs - m);
  }

  const double fc = w[0];
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  double resabs = kWgk[7] * std::abs(fc);
  for (std::size_t j = 0; j < 7; ++j) {
    const double f1 = w[1 + 2 * j];
    const double f2 = w[2 + 2 * j];
    kronrod += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * kronrod;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    resasc += kWgk[j] *
              (std::abs(w[1 + 2 * j] - mean) + std::abs(w[2 + 2 * j] - mean));
  }

  kronrod *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((kronrod - gauss * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double floor = 50.0 * kEps * resabs;
  if (err <= floor) {
    err = floor;
    p.roundoff = true;
  }
  p.kronrod = kronrod;
  p.error = err;
  return p;
}

// Priority key: log of the absolute error carried by a panel.
double refine_key(const Panel& p) {
  if (!p.splittable || p.roundoff || p.error <= 0.0 || !std::isfinite(p.scale))
    return -kInf;
  return p.scale + std::log(p.error);
}

std::vector<double> initial_partition(double a, double b,
                                      std::span<const double> breakpoints,
                                      std::optional<AxisHint> hint,
                                      int base_points) {
  std::vector<double> pts = {a, b};
  for (double bp : breakpoints) {
    if (bp > a && bp < b) pts.push_back(bp);
  }
  if (hint && hint->scale > 0.0 && std::isfinite(hint->center)) {
    const double c = hint->center;
    const double h = hint->scale;
    if (c > a && c < b) pts.push_back(c);
    for (double k = 0.5; c - k * h > a || c + k * h < b; k *= 2.0) {
      if (c - k * h > a && c - k * h < b) pts.push_back(c - k * h);
      if (c + k * h > a && c + k * h < b) pts.push_back(c + k * h);
      if (k > 1e30) break;
    }
  }
  const int min_panels = std::max(1, (base_points + 14) / 15);
  if (static_cast<int>(pts.size()) - 1 < min_panels) {
    for (int i = 1; i < min_panels; ++i) {
      pts.push_back(a + (b - a) * static_cast<double>(i) / min_panels);
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double x : pts) {
    if (out.empty() || x - out.back() > 16.0 * kEps * std::max(1.0, std::abs(x)))
      out.push_back(x);
  }
  if (out.back() != b) out.back() = b;
  return out;
}

struct Totals {
  double scale = -kInf;
  double sum = 0.0;
  double error = 0.0;
};

Totals accumulate(const std::vector<Panel>& panels) {
  Totals t;
  for (const auto& p : panels) {
    if (std::isfinite(p.scale)) t.scale = std::max(t.scale, p.scale);
  }
  if (!std::isfinite(t.scale)) return t;
  for (const auto& p : panels) {
    if (!std::isfinite(p.scale)) continue;
    const double f = std::exp(p.scale - t.scale);
    t.sum += f * p.kronrod;
    t.error += f * p.error;
  }
  return t;
}

bool within_target(double value_abs, double error, double rel_tol,
                   double abs_tol) {
  return error <= std::max(rel_tol * value_abs, abs_tol);
}

void finish(IntegrationResult& r, double log_scale, double scaled_sum,
            double scaled_error) {
  if (scaled_sum == 0.0 || !std::isfinite(log_scale)) {
    r.value = 0.0;
    r.sign = 0;
    r.log_magnitude = -kInf;
  } else {
    r.sign = scaled_sum > 0.0 ? 1 : -1;
    r.log_magnitude = log_scale + std::log(std::abs(scaled_sum));
    r.value = r.sign * std::exp(r.log_magnitude);
  }
  r.error_estimate = (scaled_error == 0.0 || !std::isfinite(log_scale))
                         ? 0.0
                         : std::exp(log_scale + std::log(scaled_error));
}

double log_abs_or_neg_inf(double v) {
  return v == 0.0 ? -kInf : std::log(std::abs(v));
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (!(abs_tol >= 0.0)) throw std::invalid_argument("abs_tol must be >= 0");
  if (!(tail_mass_tol > 0.0))
    throw std::invalid_argument("tail_mass_tol must be > 0");
  if (max_evals < 1000) throw std::invalid_argument("max_evals must be >= 1000");
  if (base_points_per_axis < 1)
    throw std::invalid_argument("base_points_per_axis must be >= 1");
}

SignedLog SignedLog::from_value(double v) {
  if (v == 0.0) return zero();
  return {std::log(std::abs(v)), v > 0.0 ? 1 : -1};
}

double SignedLog::value() const {
  return sign == 0 ? 0.0 : sign * std::exp(log_abs);
}

RadiusResult truncation_radius(const Point& center, double t_eff,
                               const GrowthEnvelope& growth,
                               const QuadratureConfig& config) {
  if (!(t_eff > 0.0)) {
    throw std::domain_error("effective time must be positive");
  }
  double quadratic = growth.quadratic;
  double power_coeff = std::max(0.0, growth.power_coeff);
  const double power_exp = growth.power_exponent;
  if (power_coeff > 0.0 && power_exp > 2.0) return {false, kInf};
  if (power_coeff > 0.0 && power_exp == 2.0) {
    quadratic += power_coeff;
    power_coeff = 0.0;
  }
  const double q = std::max(0.0, quadratic);
  const double a = 1.0 / (4.0 * t_eff) - q;
  if (!(a > 0.0)) return {false, kInf};

  const double c = std::sqrt(center.norm_squared());
  const double lin = std::max(0.0, growth.linear);
  // Surface factor r^{n-1} of the ball in n dimensions.
  const double poly =
      std::max(0.0, growth.poly_degree) + (center.size() - 1);

  auto extra = [&](double r) {
    const double u = c + r;
    double e = q * (u * u - r * r) + lin * u + poly * std::log1p(u);
    if (power_coeff > 0.0) e += power_coeff * std::pow(u, power_exp);
    return e;
  };
  auto g = [&](double r) { return -a * r * r + extra(r); };

  const double sigma = 1.0 / std::sqrt(2.0 * a);

  // Peak of the envelope in r (unimodal for the envelopes we admit).
  double hi = sigma;
  while (g(2.0 * hi) >= g(hi) && hi < 1e12) hi *= 2.0;
  hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (g(m1) < g(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  const double peak = 0.5 * (lo + hi);
  const double sqrt_a = std::sqrt(a);
  const double extra_peak = extra(peak);
  auto log_ratio = [&](double r) {
    const double tail = std::erfc(sqrt_a * (r - peak));
    if (tail <= 0.0) return -kInf;
    return std::log(tail) + extra(r) - extra_peak;
  };

  const double log_tol = std::log(config.tail_mass_tol);
  if (log_ratio(peak) <= log_tol) return {true, peak};

  double step = sigma;
  double inner = peak;
  double outer = peak + step;
  while (log_ratio(outer) > log_tol) {
    inner = outer;
    step *= 2.0;
    outer = peak + step;
    if (step > 1e15) return {false, kInf};
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (inner + outer);
    if (log_ratio(mid) > log_tol) {
      inner = mid;
    } else {
      outer = mid;
    }
  }
  return {true, outer};
}

LogIntegrand LogIntegrand::separable(std::vector<AxisFactor> factors) {
  LogIntegrand f;
  f.n_ = Dim(static_cast<int>(factors.size())).value();
  f.factors_ = std::move(factors);
  f.breakpoints_.resize(static_cast<std::size_t>(f.n_));
  f.hints_.resize(static_cast<std::size_t>(f.n_));
  return f;
}

LogIntegrand LogIntegrand::joint(Dim n, JointFunction fn) {
  LogIntegrand f;
  f.n_ = n.value();
  f.joint_ = std::move(fn);
  f.breakpoints_.resize(static_cast<std::size_t>(f.n_));
  f.hints_.resize(static_cast<std::size_t>(f.n_));
  return f;
}

LogIntegrand& LogIntegrand::with_breakpoints(int axis,
                                             std::vector<double> points) {
  breakpoints_.at(static_cast<std::size_t>(axis)) = std::move(points);
  return *this;
}

LogIntegrand& LogIntegrand::with_hint(int axis, AxisHint hint) {
  hints_.at(static_cast<std::size_t>(axis)) = hint;
  return *this;
}

SignedLog LogIntegrand::operator()(const Point& y) const {
  if (!is_separable()) return joint_(y);
  SignedLog acc = SignedLog::from_log(0.0);
  for (int i = 0; i < n_; ++i) {
    acc = acc * factors_[static_cast<std::size_t>(i)](y[i]);
    if (acc.sign == 0) break;
  }
  return acc;
}

const AxisFactor& LogIntegrand::factor(int axis) const {
  return factors_.at(static_cast<std::size_t>(axis));
}

std::span<const double> LogIntegrand::breakpoints(int axis) const {
  return breakpoints_.at(static_cast<std::size_t>(axis));
}

std::optional<AxisHint> LogIntegrand::hint(int axis) const {
  return hints_.at(static_cast<std::size_t>(axis));
}

IntegrationResult integrate_1d(const AxisFactor& f, double a, double b,
                               const QuadratureConfig& config,
                               std::span<const double> breakpoints,
                               std::optional<AxisHint> hint) {
  IntegrationResult result;
  if (!(a < b)) {
    result.converged = true;
    return result;
  }

  const auto pts =
      initial_partition(a, b, breakpoints, hint, config.base_points_per_axis);
  std::vector<Panel> panels;
  panels.reserve(pts.size() * 4);
  long evals = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    panels.push_back(evaluate_panel(f, pts[i], pts[i + 1], evals));
  }

  auto has_nonfinite = [&] {
    return std::any_of(panels.begin(), panels.end(), [](const Panel& p) {
      return std::isnan(p.scale) || p.scale == kInf;
    });
  };

  using Entry = std::pair<double, std::size_t>;  // (key, index)
  auto cmp = [](const Entry& l, const Entry& r) {
    if (l.first != r.first) return l.first < r.first;
    return l.second > r.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    queue.push({refine_key(panels[i]), i});
  }

  // Running totals in a floating reference scale; recomputed exactly before
  // any convergence decision.
  Totals run = accumulate(panels);
  auto add = [&run](const Panel& p, double sgn) {
    if (!std::isfinite(p.scale)) return;
    if (!std::isfinite(run.scale) || p.scale > run.scale) {
      const double f = std::isfinite(run.scale) ? std::exp(run.scale - p.scale) : 0.0;
      run.sum *= f;
      run.error *= f;
      run.scale = p.scale;
    }
    const double f = std::exp(p.scale - run.scale);
    run.sum += sgn * f * p.kronrod;
    run.error += sgn * f * p.error;
  };
  auto meets_target = [&config](const Totals& t) {
    if (!std::isfinite(t.scale)) return true;
    const double abs_target = config.abs_tol * std::exp(-t.scale);
    return within_target(std::abs(t.sum), std::max(0.0, t.error),
                         config.rel_tol, abs_target);
  };

  bool converged = false;
  if (!has_nonfinite()) {
    for (long iter = 0;; ++iter) {
      if (iter % 256 == 0) run = accumulate(panels);
      if (meets_target(run)) {
        run = accumulate(panels);
        if (meets_target(run)) {
          converged = true;
          break;
        }
      }
      if (evals + 30 > config.max_evals) break;
      if (queue.empty() || queue.top().first == -kInf) break;
      const std::size_t idx = queue.top().second;
      queue.pop();
      const Panel old = panels[idx];
      const double mid = 0.5 * (old.a + old.b);
      panels[idx] = evaluate_panel(f, old.a, mid, evals);
      panels.push_back(evaluate_panel(f, mid, old.b, evals));
      if (std::isnan(panels[idx].scale) || panels[idx].scale == kInf ||
          std::isnan(panels.back().scale) || panels.back().scale == kInf) {
        break;
      }
      add(old, -1.0);
      add(panels[idx], 1.0);
      add(panels.back(), 1.0);
      queue.push({refine_key(panels[idx]), idx});
      queue.push({refine_key(panels.back()), panels.size() - 1});
    }
  }

  result.evals_used = evals;
  if (has_nonfinite()) {
    const bool any_nan = std::any_of(panels.begin(), panels.end(),
                                     [](const Panel& p) { return std::isnan(p.scale); });
    result.value = any_nan ? std::numeric_limits<double>::quiet_NaN() : kInf;
    result.log_magnitude = any_nan ? std::numeric_limits<double>::quiet_NaN() : kInf;
    result.sign = any_nan ? 0 : 1;
    result.error_estimate = kInf;
    result.converged = false;
    return result;
  }

  // Final sum in positional order so the result does not depend on the
  // refinement history beyond the panel set itself.
  std::sort(panels.begin(), panels.end(),
            [](const Panel& l, const Panel& r) { return l.a < r.a; });
  const Totals tot = accumulate(panels);
  finish(result, tot.scale, tot.sum, tot.error);
  result.converged = converged;
  return result;
}

namespace {

struct NestedState {
  const LogIntegrand* integrand;
  const Domain* domain;
  QuadratureConfig config;
  long used = 0;
  // Largest relative error reported at each inner level.
  std::array<double, Dim::kMax> worst_rel{};
  bool inner_failed = false;
};

IntegrationResult nested_level(NestedState& st, int axis, Point& y) {
  const int n = st.integrand->dim().value();
  double lo = 0.0;
  double hi = 0.0;
  if (const auto* box = std::get_if<Box>(st.domain)) {
    lo = box->lo[axis];
    hi = box->hi[axis];
  } else {
    const auto& ball = std::get<Ball>(*st.domain);
    double r2 = ball.radius * ball.radius;
    for (int j = 0; j < axis; ++j) {
      const double d = y[j] - ball.center[j];
      r2 -= d * d;
    }
    const double half = std::sqrt(std::max(0.0, r2));
    lo = ball.center[axis] - half;
    hi = ball.center[axis] + half;
  }

  QuadratureConfig cfg = st.config;
  cfg.max_evals = std::max<long>(30, st.config.max_evals - st.used);
  cfg.rel_tol = st.config.rel_tol / n;

  AxisFactor factor;
  if (axis + 1 == n) {
    factor = [&st, &y, axis](double v) {
      y[axis] = v;
      return (*st.integrand)(y);
    };
  } else {
    factor = [&st, &y, axis](double v) {
      y[axis] = v;
      Point inner = y;
      const IntegrationResult r = nested_level(st, axis + 1, inner);
      if (!r.converged) st.inner_failed = true;
      if (r.value != 0.0 && std::isfinite(r.value)) {
        auto& w = st.worst_rel[static_cast<std::size_t>(axis + 1)];
        w = std::max(w, r.error_estimate / std::abs(r.value));
      }
      return SignedLog{r.log_magnitude, r.sign};
    };
  }
  IntegrationResult r = integrate_1d(factor, lo, hi, cfg,
                                     st.integrand->breakpoints(axis),
                                     st.integrand->hint(axis));
  if (axis + 1 == n) st.used += r.evals_used;
  return r;
}

}  // namespace

IntegrationResult integrate(const LogIntegrand& integrand, const Domain& domain,
                            const QuadratureConfig& config) {
  config.validate();
  const int n = integrand.dim().value();
  const Point& ref = std::holds_alternative<Box>(domain)
                         ? std::get<Box>(domain).lo
                         : std::get<Ball>(domain).center;
  if (ref.size() != n) {
    throw std::invalid_argument("domain dimension does not match integrand");
  }

  if (integrand.is_separable() && std::holds_alternative<Box>(domain)) {
    const auto& box = std::get<Box>(domain);
    QuadratureConfig axis_cfg = config;
    axis_cfg.rel_tol = config.rel_tol / n;
    // An absolute floor only makes sense for the product, not per factor.
    axis_cfg.abs_tol = 0.0;
    std::vector<IntegrationResult> parts;
    long used = 0;
    // An axis that stops short of its own target (roundoff under cancellation)
    // is acceptable as long as the product meets the overall target; running
    // out of budget is not.
    bool all_converged = true;
    for (int i = 0; i < n; ++i) {
      axis_cfg.max_evals = std::max<long>(1000, config.max_evals - used);
      parts.push_back(integrate_1d(integrand.factor(i), box.lo[i], box.hi[i],
                                   axis_cfg, integrand.breakpoints(i),
                                   integrand.hint(i)));
      used += parts.back().evals_used;
      const bool exhausted =
          !parts.back().converged &&
          parts.back().evals_used + 30 > axis_cfg.max_evals;
      const bool broken = !std::isfinite(parts.back().error_estimate);
      all_converged = all_converged && !exhausted && !broken;
    }
    IntegrationResult r;
    r.evals_used = used;
    int sign = 1;
    double log_mag = 0.0;
    for (const auto& p : parts) {
      sign *= p.sign;
      log_mag += p.log_magnitude;
    }
    if (sign == 0) {
      r.value = 0.0;
      r.sign = 0;
      r.log_magnitude = -kInf;
    } else {
      r.sign = sign;
      r.log_magnitude = log_mag;
      r.value = sign * std::exp(log_mag);
    }
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double term = log_abs_or_neg_inf(parts[static_cast<std::size_t>(i)].error_estimate);
      for (int j = 0; j < n; ++j) {
        if (j != i) term += parts[static_cast<std::size_t>(j)].log_magnitude;
      }
      if (std::isfinite(term)) err += std::exp(term);
    }
    r.error_estimate = err;
    r.converged = all_converged &&
                  within_target(std::abs(r.value), err, config.rel_tol,
                                config.abs_tol);
    if (all_converged && !r.converged && std::isfinite(log_mag) &&
        !std::isfinite(r.value + err)) {
      // value overflows double; judge convergence relatively.
      r.converged = true;
    }
    return r;
  }

  NestedState st{&integrand, &domain, config};
  Point y(integrand.dim());
  IntegrationResult r = nested_level(st, 0, y);
  r.evals_used = st.used;
  if (r.value != 0.0 && std::isfinite(r.value)) {
    for (double w : st.worst_rel) r.error_estimate += w * std::abs(r.value);
  }
  r.converged = r.converged && !st.inner_failed &&
                within_target(std::abs(r.value), r.error_estimate,
                              config.rel_tol, config.abs_tol);
  return r;
}

std::optional<double> gaussian_heat_oracle(double a, const Point& x, double t,
                                           Dim n) {
  if (!(t > 0.0)) throw std::domain_error("time must be positive");
  const double d = 1.0 + 4.0 * a * t;
  if (!(d > 0.0)) return std::nullopt;
  return std::pow(d, -0.5 * n.as_double()) * std::exp(-a * x.norm_squared() / d);
}

}  // namespace heatsg
