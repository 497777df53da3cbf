#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heatsg/kernel.hpp"
#include "heatsg/quadrature.hpp"

namespace heatsg {

/// Where a check was at its worst.
struct CheckSample {
  int n = 1;
  Point x;
  std::optional<Point> y;
  double param = 0.0;       // s or t, see param_name
  std::string param_name;   // "s" or "t"
  std::string label;        // datum or sub-case, when relevant

  std::string describe() const;
};

/// Outcome of one certification run.
///
/// Inequalities report worst_margin = min over samples of the relative margin
/// (RHS - LHS) / max(1, |LHS|, |RHS|), evaluated in log space; they pass when
/// worst_margin >= -tolerance. Identities report worst_margin = max relative
/// deviation and pass when it is <= tolerance.
struct CheckReport {
  enum class Kind { Inequality, Identity };

  std::string check_name;
  Kind kind = Kind::Inequality;
  long samples = 0;
  double tolerance = 0.0;
  double worst_margin = 0.0;
  std::optional<CheckSample> worst_sample;
  bool passed = false;
  long flagged = 0;  // quadrature-level samples that did not converge
  std::vector<CheckReport> parts;
};

/// Streaming reducer that builds a CheckReport.
class CheckAccumulator {
 public:
  CheckAccumulator(std::string name, CheckReport::Kind kind, double tolerance);

  /// Inequality: margin; identity: deviation.
  void add(double value, const CheckSample& sample);
  void flag() { ++report_.flagged; }
  void add_part(CheckReport part) { report_.parts.push_back(std::move(part)); }

  CheckReport finish() const;

 private:
  CheckReport report_;
  bool any_ = false;
};

/// Upper kernel inequality W^H_{t(s)}(x,y) <= (1-s^2)^{n/2} W_s(x-y).
CheckReport check_remark_upper(long sample_count, std::uint64_t seed);

/// Lower kernel comparison with s* = 9s/(9+25s^2):
///   (1-s^2)^{n/2} W_{s*}(x-y) <= (34/9)^{n/2} e^{25 s|x|^2/4} W^H_{t(s)}(x,y),
/// plus both geometric cases and the prefactor bound.
CheckReport check_lemma_lower(long sample_count, std::uint64_t seed);

/// Quadrature-level chain for nonnegative data (h_0 and a box).
CheckReport check_chain26(long sample_count, std::uint64_t seed,
                          const QuadratureConfig& config = {});

/// Physical-time versus Meda-parameter forms of the Mehler kernel.
CheckReport check_kernel_forms(long sample_count, std::uint64_t seed);

/// U^{-1} e^{-t(H-n)} U = e^{-tO} on Hermite polynomials of degree <= degree_max.
CheckReport check_transference(int degree_max, long sample_count,
                               std::uint64_t seed,
                               const QuadratureConfig& config = {});

/// OU mass conservation, Gaussian-measure symmetry, long-time equilibrium.
CheckReport check_ou_markov(long sample_count, std::uint64_t seed,
                            const QuadratureConfig& config = {});

const std::vector<std::string>& check_names();
long default_sample_count(std::string_view name);

/// Runs a check by name; throws std::invalid_argument for unknown names.
CheckReport run_check(std::string_view name, std::optional<long> sample_count,
                      std::uint64_t seed, const QuadratureConfig& config = {});

}  // namespace heatsg
