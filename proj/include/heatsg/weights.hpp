#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heatsg/kernel.hpp"
#include "heatsg/quadrature.hpp"

namespace heatsg {

/// p in [1, inf) with its conjugate p' (infinite for p = 1).
class LebesgueExponent {
 public:
  explicit LebesgueExponent(double p);

  double p() const { return p_; }
  double conjugate() const { return p_conj_; }
  bool is_sup_norm() const { return p_ == 1.0; }

 private:
  double p_;
  double p_conj_;
};

/// Catalog weights. Every entry may carry an extra Gaussian tilt
/// exp(tilt |x|^2), which is what transfer_weight produces for families that
/// are not Gaussian themselves.
class WeightSpec {
 public:
  struct GaussianWeight {  // exp(a|x|^2)
    double a = 0.0;
    friend bool operator==(const GaussianWeight&, const GaussianWeight&) = default;
  };
  struct PowerWeight {  // (1+|x|)^a
    double a = 0.0;
    friend bool operator==(const PowerWeight&, const PowerWeight&) = default;
  };
  struct StretchedExp {  // exp(-c|x|^beta), c > 0, beta > 0
    double c = 1.0;
    double beta = 1.0;
    friend bool operator==(const StretchedExp&, const StretchedExp&) = default;
  };
  struct Constant {  // c > 0
    double c = 1.0;
    friend bool operator==(const Constant&, const Constant&) = default;
  };
  using Family = std::variant<GaussianWeight, PowerWeight, StretchedExp, Constant>;

  explicit WeightSpec(Family family, double tilt = 0.0);

  static WeightSpec gaussian(double a) { return WeightSpec(GaussianWeight{a}); }
  static WeightSpec power(double a) { return WeightSpec(PowerWeight{a}); }
  static WeightSpec stretched_exp(double c, double beta) {
    return WeightSpec(StretchedExp{c, beta});
  }
  static WeightSpec constant(double c) { return WeightSpec(Constant{c}); }

  const Family& family() const { return family_; }
  double tilt() const { return tilt_; }

  /// log v at radius r = |x|.
  double log_value_radial(double r) const;

  std::string describe() const;

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;

 private:
  Family family_;
  double tilt_ = 0.0;
};

double weight_value(const WeightSpec& v, const Point& x);

struct NormResult {
  bool divergent = false;
  double value = std::numeric_limits<double>::infinity();
  double log_value = std::numeric_limits<double>::infinity();
  double error_estimate = 0.0;
  bool converged = false;
  // p = 1 only: largest value of the log integrand on the radial check grid,
  // and whether it confirms the analytic supremum.
  std::optional<double> grid_log_max;
  bool grid_confirmed = true;
};

/// ||W_{t0} v^{-1/p}||_{L^{p'}(R^n)} with W_{t0} v^{-1/p} read as the pointwise
/// product (4 pi t0)^{-n/2} exp(-|x|^2/(4 t0)) v(x)^{-1/p}.
NormResult dpw_norm(const WeightSpec& v, double t0, const LebesgueExponent& p,
                    Dim n, const QuadratureConfig& config = {});

struct EvidencePoint {
  double radius;
  double log_integral;  // log of the truncated integral (p > 1) or sup (p = 1)
};

struct MembershipVerdict {
  bool member = false;
  std::optional<double> witness_t0;
  std::optional<double> threshold_M;
  // Gaussian rate used for the evidence: the witness rate for members, a
  // probe rate for non-members.
  double evidence_rate = 0.0;
  std::vector<EvidencePoint> evidence;
  std::string interpretation;
};

/// Analytic tail-exponent decision for v in D_p^W, with numeric evidence.
MembershipVerdict dpw_classify(const WeightSpec& v, const LebesgueExponent& p,
                               Dim n, const QuadratureConfig& config = {});

/// x -> v(x) exp((p/2 - 1)|x|^2).
WeightSpec transfer_weight(const WeightSpec& v, const LebesgueExponent& p);

/// pi^{-n/2} exp(-|x|^2).
double gaussian_measure_density(const Point& x, Dim n);

}  // namespace heatsg
