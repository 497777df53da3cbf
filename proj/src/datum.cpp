#include "heatsg/datum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace heatsg {

namespace {

template <class T>
T per_axis(const std::vector<T>& v, int axis, Dim n, const char* what) {
  if (v.size() == 1) return v.front();
  if (static_cast<int>(v.size()) != n.value()) {
    throw std::invalid_argument(std::string(what) +
                                " needs 1 or n entries, got " +
                                std::to_string(v.size()));
  }
  return v[static_cast<std::size_t>(axis)];
}

double interpolate(const InitialDatum::TabulatedContinuous& tab, double y) {
  const auto& xs = tab.nodes;
  if (y <= xs.front() || y >= xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), y);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double w = (y - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return (1.0 - w) * tab.values[i - 1] + w * tab.values[i];
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_integral_v<T>) {
      out += std::to_string(v[i]);
    } else {
      out += num(v[i]);
    }
  }
  return out;
}

}  // namespace

double hermite_polynomial(int k, double x) {
  if (k < 0) throw std::invalid_argument("Hermite degree must be >= 0");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = 2.0 * x;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * x * cur - 2.0 * j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

SignedLog log_hermite_function(int k, double x) {
  const SignedLog h = SignedLog::from_value(hermite_polynomial(k, x));
  if (h.sign == 0) return h;
  const double log_norm =
      0.5 * (k * std::numbers::ln2 + std::lgamma(k + 1.0) +
             0.5 * std::log(std::numbers::pi));
  return {h.log_abs - 0.5 * x * x - log_norm, h.sign};
}

InitialDatum::InitialDatum(Family family) : family_(std::move(family)) {
  if (const auto* t = std::get_if<TabulatedContinuous>(&family_)) {
    if (t->nodes.size() < 2 || t->nodes.size() != t->values.size()) {
      throw std::invalid_argument(
          "tabulated datum needs >= 2 nodes and one value per node");
    }
    for (std::size_t i = 1; i < t->nodes.size(); ++i) {
      if (!(t->nodes[i] > t->nodes[i - 1])) {
        throw std::invalid_argument("tabulated nodes must increase strictly");
      }
    }
    if (t->values.front() != 0.0 || t->values.back() != 0.0) {
      throw std::invalid_argument(
          "tabulated datum must vanish at its end nodes (compact support)");
    }
  }
  if (const auto* b = std::get_if<BoxIndicator>(&family_)) {
    if (b->lo.empty() || b->lo.size() != b->hi.size()) {
      throw std::invalid_argument("box needs matching lo/hi lists");
    }
    for (std::size_t i = 0; i < b->lo.size(); ++i) {
      if (!(b->lo[i] < b->hi[i])) throw std::invalid_argument("box needs lo < hi");
    }
  }
  auto check_k = [](const std::vector<int>& k) {
    if (k.empty()) throw std::invalid_argument("empty multi-index");
    for (int ki : k) {
      if (ki < 0) throw std::invalid_argument("negative multi-index entry");
    }
  };
  if (const auto* h = std::get_if<HermiteFunction>(&family_)) check_k(h->k);
  if (const auto* h = std::get_if<HermitePolynomial>(&family_)) check_k(h->k);
}

InitialDatum InitialDatum::gaussian(double a, std::vector<double> b) {
  return InitialDatum(Gaussian{a, std::move(b)});
}
InitialDatum InitialDatum::hermite_function(std::vector<int> k) {
  return InitialDatum(HermiteFunction{std::move(k)});
}
InitialDatum InitialDatum::hermite_polynomial(std::vector<int> k) {
  return InitialDatum(HermitePolynomial{std::move(k)});
}
InitialDatum InitialDatum::box(std::vector<double> lo, std::vector<double> hi) {
  return InitialDatum(BoxIndicator{std::move(lo), std::move(hi)});
}
InitialDatum InitialDatum::quartic_exponential(double c) {
  return InitialDatum(QuarticExponential{c});
}
InitialDatum InitialDatum::tabulated(std::vector<double> nodes,
                                     std::vector<double> values) {
  return InitialDatum(TabulatedContinuous{std::move(nodes), std::move(values)});
}
InitialDatum InitialDatum::zero() { return InitialDatum(Zero{}); }

InitialDatum InitialDatum::times_gaussian(double a, double log_scale) const {
  InitialDatum out = *this;
  out.gauss_a_ += a;
  out.log_scale_ += log_scale;
  return out;
}

bool InitialDatum::separable(Dim n) const {
  if (std::holds_alternative<QuarticExponential>(family_)) return n.value() == 1;
  return true;
}

SignedLog InitialDatum::axis_factor(int axis, double y, Dim n) const {
  SignedLog f = std::visit(
      [&](const auto& fam) -> SignedLog {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const double b = fam.b.empty() ? 0.0 : per_axis(fam.b, axis, n, "b");
          return SignedLog::from_log(-fam.a * y * y + b * y);
        } else if constexpr (std::is_same_v<T, HermiteFunction>) {
          return log_hermite_function(per_axis(fam.k, axis, n, "k"), y);
        } else if constexpr (std::is_same_v<T, HermitePolynomial>) {
          return SignedLog::from_value(
              heatsg::hermite_polynomial(per_axis(fam.k, axis, n, "k"), y));
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          const double lo = per_axis(fam.lo, axis, n, "lo");
          const double hi = per_axis(fam.hi, axis, n, "hi");
          return (y >= lo && y <= hi) ? SignedLog::from_log(0.0)
                                      : SignedLog::zero();
        } else if constexpr (std::is_same_v<T, QuarticExponential>) {
          if (n.value() != 1) {
            throw std::logic_error("quartic exponential is not separable");
          }
          return SignedLog::from_log(fam.c * y * y * y * y);
        } else if constexpr (std::is_same_v<T, TabulatedContinuous>) {
          return SignedLog::from_value(interpolate(fam, y));
        } else {
          return SignedLog::zero();
        }
      },
      family_);
  if (f.sign == 0) return f;
  f.log_abs -= gauss_a_ * y * y;
  if (axis == 0) f.log_abs += log_scale_;
  return f;
}

SignedLog InitialDatum::log_value(const Point& y) const {
  const Dim n = y.dim();
  if (!separable(n)) {
    const auto& q = std::get<QuarticExponential>(family_);
    const double r2 = y.norm_squared();
    return SignedLog::from_log(q.c * r2 * r2 - gauss_a_ * r2 + log_scale_);
  }
  SignedLog acc = SignedLog::from_log(0.0);
  for (int i = 0; i < n.value(); ++i) {
    acc = acc * axis_factor(i, y[i], n);
    if (acc.sign == 0) break;
  }
  return acc;
}

double InitialDatum::value(const Point& y) const { return log_value(y).value(); }

AxisShape InitialDatum::axis_shape(int axis, Dim n) const {
  AxisShape s = std::visit(
      [&](const auto& fam) -> AxisShape {
        using T = std::decay_t<decltype(fam)>;
        AxisShape out;
        if constexpr (std::is_same_v<T, Gaussian>) {
          out.quadratic = -fam.a;
          out.linear = fam.b.empty() ? 0.0 : per_axis(fam.b, axis, n, "b");
        } else if constexpr (std::is_same_v<T, HermiteFunction>) {
          out.quadratic = -0.5;
          out.residual.poly_degree = per_axis(fam.k, axis, n, "k");
        } else if constexpr (std::is_same_v<T, HermitePolynomial>) {
          out.residual.poly_degree = per_axis(fam.k, axis, n, "k");
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          const double lo = per_axis(fam.lo, axis, n, "lo");
          const double hi = per_axis(fam.hi, axis, n, "hi");
          out.support = std::make_pair(lo, hi);
          out.breakpoints = {lo, hi};
        } else if constexpr (std::is_same_v<T, QuarticExponential>) {
          out.residual.power_coeff = fam.c;
          out.residual.power_exponent = 4.0;
        } else if constexpr (std::is_same_v<T, TabulatedContinuous>) {
          out.support = std::make_pair(fam.nodes.front(), fam.nodes.back());
          out.breakpoints = fam.nodes;
        }
        return out;
      },
      family_);
  s.quadratic -= gauss_a_;
  return s;
}

GrowthEnvelope InitialDatum::envelope() const {
  GrowthEnvelope e = std::visit(
      [&](const auto& fam) -> GrowthEnvelope {
        using T = std::decay_t<decltype(fam)>;
        GrowthEnvelope out;
        if constexpr (std::is_same_v<T, Gaussian>) {
          out.quadratic = -fam.a;
          double b2 = 0.0;
          for (double b : fam.b) b2 += b * b;
          out.linear = std::sqrt(b2);
        } else if constexpr (std::is_same_v<T, HermiteFunction>) {
          out.quadratic = -0.5;
          for (int k : fam.k) out.poly_degree += k;
        } else if constexpr (std::is_same_v<T, HermitePolynomial>) {
          for (int k : fam.k) out.poly_degree += k;
        } else if constexpr (std::is_same_v<T, QuarticExponential>) {
          out.power_coeff = fam.c;
          out.power_exponent = 4.0;
        }
        return out;
      },
      family_);
  e.quadratic -= gauss_a_;
  return e;
}

bool InitialDatum::has_closed_form(KernelKind kind) const {
  if (is_modified()) return false;
  return std::visit(
      [&](const auto& fam) -> bool {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return true;
        } else if constexpr (std::is_same_v<T, HermiteFunction>) {
          return kind == KernelKind::Hermite ||
                 kind == KernelKind::HermiteShifted;
        } else if constexpr (std::is_same_v<T, HermitePolynomial>) {
          return kind == KernelKind::OrnsteinUhlenbeck;
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          for (double b : fam.b) {
            if (b != 0.0) return false;
          }
          return kind == KernelKind::Classical;
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          return kind == KernelKind::Classical;
        } else {
          return false;
        }
      },
      family_);
}

std::string InitialDatum::describe() const {
  std::string out = std::visit(
      [&](const auto& fam) -> std::string {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          std::string s = "gaussian:" + num(fam.a);
          if (!fam.b.empty()) s += "," + join(fam.b);
          return s;
        } else if constexpr (std::is_same_v<T, HermiteFunction>) {
          return "hermite-fn:" + join(fam.k);
        } else if constexpr (std::is_same_v<T, HermitePolynomial>) {
          return "hermite-poly:" + join(fam.k);
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          std::string s = "box:";
          for (std::size_t i = 0; i < fam.lo.size(); ++i) {
            if (i) s += ',';
            s += num(fam.lo[i]) + "," + num(fam.hi[i]);
          }
          return s;
        } else if constexpr (std::is_same_v<T, QuarticExponential>) {
          return "quartic-exp:" + num(fam.c);
        } else if constexpr (std::is_same_v<T, TabulatedContinuous>) {
          std::string s = "tabulated:";
          for (std::size_t i = 0; i < fam.nodes.size(); ++i) {
            if (i) s += ',';
            s += num(fam.nodes[i]) + "/" + num(fam.values[i]);
          }
          return s;
        } else {
          return "zero";
        }
      },
      family_);
  if (is_modified()) {
    out += " * exp(" + num(log_scale_) + " - " + num(gauss_a_) + "|y|^2)";
  }
  return out;
}

}  // namespace heatsg
