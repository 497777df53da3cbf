// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heatsg/semigroup.hpp"
#include "heatsg/verify.hpp"
#include "heatsg/weights.hpp"

using namespace heatsg;

namespace {

constexpr std::uint64_t kSeed = 42;
const std::vector<double> kExponents = {1.0, 1.5, 2.0, 4.0};

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (passed) detail << "failed: ";
      detail << what << "; ";
      passed = false;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Point random_point(std::mt19937_64& rng, int n, double half_width) {
  Point x{Dim(n)};
  for (int i = 0; i < n; ++i) x[i] = uniform(rng, -half_width, half_width);
  return x;
}

void require_report(Outcome& o, const CheckReport& r) {
  o.require(r.passed, r.check_name + " did not pass");
  o.detail << r.check_name << " worst " << fmt(r.worst_margin) << " over " << r.samples;
  if (r.flagged) o.detail << " (" << r.flagged << " flagged)";
  o.detail << "; ";
}

const CheckReport* part(const CheckReport& r, const std::string& name) {
  for (const auto& p : r.parts) {
    if (p.check_name == name) return &p;
  }
  return nullptr;
}

Outcome kernel_forms() {
  Outcome o;
  const auto r = check_kernel_forms(100'000, kSeed);
  require_report(o, r);
  const auto* regular = part(r, "regular_t");
  const auto* small = part(r, "small_t");
  o.require(regular && regular->worst_margin <= 1e-11, "regular time above 1e-11");
  o.require(small && small->samples > 0 && small->worst_margin <= 1e-9, "small time above 1e-9");
  return o;
}

Outcome remark_upper() {
  Outcome o;
  const auto r = check_remark_upper(100'000, kSeed);
  require_report(o, r);
  o.require(r.samples == 100'000 && r.worst_margin >= -1e-12, "margin below -1e-12");
  return o;
}

Outcome lemma_lower() {
  Outcome o;
  const auto r = check_lemma_lower(100'000, kSeed);
  require_report(o, r);
  o.require(r.worst_margin >= -1e-12, "margin below -1e-12");
  for (const char* name : {"case1", "case2", "prefactor"}) {
    const auto* p = part(r, name);
    o.require(p && p->passed && p->samples > 0, std::string(name) + " sub-check");
  }
  return o;
}

Outcome chain() {
  Outcome o;
  const auto r = check_chain26(100, kSeed);
  require_report(o, r);
  o.require(r.flagged == 0, "non-converged side evaluations");
  const auto* acc = part(r, "side_accuracy");
  o.require(acc && acc->worst_margin <= 1e-8, "side evaluation off by more than 1e-8");
  return o;
}

Outcome transference() {
  Outcome o;
  const auto r = check_transference(4, 20, kSeed);
  require_report(o, r);
  o.require(r.flagged == 0 && r.worst_margin <= 1e-8, "sides or oracle differ by more than 1e-8");
  return o;
}

Outcome ou_markov() {
  Outcome o;
  const auto r = check_ou_markov(50, kSeed);
  require_report(o, r);
  const auto* mass = part(r, "mass");
  const auto* sym = part(r, "symmetry");
  o.require(mass && mass->worst_margin <= 1e-8, "mass off by more than 1e-8");
  o.require(sym && sym->worst_margin <= 1e-12, "symmetry off by more than 1e-12");
  return o;
}

Outcome eigen_decay() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  // h_k has zeros, so near them only an absolute target is attainable.
  QuadratureConfig config;
  config.abs_tol = 1e-10;
  double worst = 0.0;
  int count = 0;
  for (int n = 1; n <= 2; ++n) {
    for (int a = 0; a <= 4; ++a) {
      for (int b = 0; b <= (n == 2 ? 4 - a : 0); ++b) {
        const std::vector<int> k = n == 1 ? std::vector<int>{a} : std::vector<int>{a, b};
        const auto hk = InitialDatum::hermite_function(k);
        for (int i = 0; i < 4; ++i) {
          const Point x = random_point(rng, n, 2.5);
          const double t = uniform(rng, 0.05, 2.0);
          const auto res = apply(KernelKind::Hermite, hk, x, TimeParam::from_t(t), config);
          const double exact = std::exp(-(2.0 * (a + b) + n) * t) * hk.value(x);
          const double dev = std::abs(res.value - exact) / std::max(1.0, std::abs(exact));
          o.require(res.converged, "quadrature did not converge");
          worst = std::max(worst, dev);
          ++count;
        }
      }
    }
  }
  o.require(worst <= 1e-8, "deviation above 1e-8");
  o.detail << "worst " << fmt(worst) << " over " << count << " evaluations; ";
  return o;
}

Outcome closed_forms() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const double a = uniform(rng, 0.05, 4.0);
    const double t = uniform(rng, 0.01, 2.0);
    const Point x = random_point(rng, n, 3.0);
    const auto res = apply(KernelKind::Classical, InitialDatum::gaussian(a), x, TimeParam::from_t(t));
    const double exact = std::pow(1.0 + 4.0 * a * t, -0.5 * n) *
                         std::exp(-a * x.norm_squared() / (1.0 + 4.0 * a * t));
    worst = std::max(worst, std::abs(res.value - exact) / exact);
  }
  o.require(worst <= 1e-8, "gaussian data relative error above 1e-8");
  double worst_box = 0.0;
  for (double t : {1e-3, 0.01, 0.1, 0.5, 1.0, 4.0}) {
    const auto res = apply(KernelKind::Classical, InitialDatum::box({-1.0}, {1.0}), Point{0.0},
                           TimeParam::from_t(t));
    worst_box = std::max(worst_box, std::abs(res.value - std::erf(1.0 / (2.0 * std::sqrt(t)))));
  }
  o.require(worst_box <= 1e-8, "box value off erf by more than 1e-8");
  o.detail << "gaussian worst " << fmt(worst) << ", box worst " << fmt(worst_box) << "; ";
  return o;
}

std::vector<WeightSpec> catalog_draws(std::mt19937_64& rng, int per_family) {
  std::vector<WeightSpec> out;
  for (int i = 0; i < per_family; ++i) {
    out.push_back(WeightSpec::gaussian(uniform(rng, -3.0, 3.0)));
    out.push_back(WeightSpec::power(uniform(rng, -4.0, 4.0)));
    out.push_back(WeightSpec::stretched_exp(uniform(rng, 0.1, 3.0),
                                            i % 10 == 0 ? 2.0 : uniform(rng, 0.3, 4.0)));
    out.push_back(WeightSpec::constant(uniform(rng, 0.1, 10.0)));
  }
  return out;
}

bool increasing_evidence(const MembershipVerdict& v) {
  if (v.evidence.size() < 2) return false;
  for (std::size_t i = 1; i < v.evidence.size(); ++i) {
    if (!(v.evidence[i].log_integral > v.evidence[i - 1].log_integral)) return false;
  }
  return true;
}

Outcome classification() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  int members = 0, others = 0;
  for (double p : kExponents) {
    const LebesgueExponent pe(p);
    for (const auto& w : catalog_draws(rng, 30)) {
      const auto verdict = dpw_classify(w, pe, Dim(1));
      if (verdict.member) {
        ++members;
        const auto norm = dpw_norm(w, *verdict.witness_t0, pe, Dim(1));
        o.require(!norm.divergent && std::isfinite(norm.log_value),
                  "member " + w.describe() + " has no finite norm at its witness");
      } else {
        ++others;
        o.require(dpw_norm(w, 1e-3, pe, Dim(1)).divergent,
                  "non-member " + w.describe() + " has a finite norm");
        o.require(increasing_evidence(verdict), "non-member " + w.describe() + " evidence not growing");
      }
    }
    for (double a : {-0.5, -2.0, -4.0}) {
      const WeightSpec w = WeightSpec::gaussian(a);
      const double m = *dpw_classify(w, pe, Dim(1)).threshold_M;
      const auto above = dpw_norm(w, 1.0 / (4.0 * m * 1.01), pe, Dim(1));
      const auto below = dpw_norm(w, 1.0 / (4.0 * m * 0.99), pe, Dim(1));
      o.require(!above.divergent && std::isfinite(above.value) && below.divergent,
                "threshold not sharp for a=" + fmt(a) + " p=" + fmt(p));
    }
  }
  const auto ref = dpw_norm(WeightSpec::constant(1.0), 0.25, LebesgueExponent(2.0), Dim(1));
  const double expect = std::pow(2.0 * std::numbers::pi, -0.25);
  o.require(std::abs(ref.value - expect) <= 1e-6, "reference norm off");
  o.detail << members << " members, " << others << " non-members, reference norm "
           << fmt(ref.value) << "; ";
  return o;
}

Outcome transfer() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  int count = 0;
  for (double p : kExponents) {
    const LebesgueExponent pe(p);
    for (const auto& w : catalog_draws(rng, 30)) {
      const auto t = transfer_weight(w, pe);
      o.require(dpw_classify(w, pe, Dim(1)).member == dpw_classify(t, pe, Dim(1)).member,
                "verdict changed for " + w.describe() + " at p=" + fmt(p));
      if (p == 2.0) o.require(t == w, "transfer at p=2 is not the identity for " + w.describe());
      ++count;
    }
  }
  o.detail << count << " weights; ";
  return o;
}

Outcome convergence() {
  Outcome o;
  const auto hat = InitialDatum::tabulated({-1.0, -0.2, 0.5, 1.0}, {0.0, 0.8, 0.6, 0.0});
  double worst = 0.0;
  for (auto kind : {KernelKind::Classical, KernelKind::Hermite, KernelKind::HermiteShifted,
                    KernelKind::OrnsteinUhlenbeck}) {
    for (const Point& x : {Point{0.1}, Point{-0.5, 0.2}}) {
      const auto rep = converge(kind, hat, x, {});
      o.require(rep.converged && rep.errors.size() == 10,
                std::string(to_string(kind)) + " did not reach 1e-3");
      if (!rep.errors.empty()) worst = std::max(worst, rep.errors.back());
    }
  }
  o.detail << "worst final error " << fmt(worst) << "; ";
  for (double p : kExponents) {
    const auto demo = divergence_demo(p);
    o.require(demo.finite_certified, "weighted norm not stable at p=" + fmt(p));
    o.require(!demo.truncated_radii.empty() && demo.truncated_radii.back() <= 12.0 &&
                  demo.truncated_log_values.back() > std::log(1e6),
              "truncated integral below 1e6 at p=" + fmt(p));
    if (p == 2.0 && !demo.truncated_log_values.empty()) {
      o.detail << "p=2: norm^p " << fmt(demo.finite_values.back()) << ", log W_1 f(0) at R=12 "
               << fmt(demo.truncated_log_values.back()) << "; ";
    }
  }
  return o;
}

bool capture(const std::string& command, std::string& output) {
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return false;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
  return pclose(pipe) == 0;
}

Outcome determinism() {
  Outcome o;
  const std::string command = std::string("\"") + HEATSG_CLI_PATH + "\" verify all --seed 42";
  std::string first, second;
  const bool ok1 = capture(command, first);
  const bool ok2 = capture(command, second);
  o.require(ok1 && ok2, "verify all did not exit 0");
  o.require(!first.empty() && first == second, "reports differ");
  o.detail << first.size() << " bytes, identical=" << (first == second ? "yes" : "no") << "; ";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kernel-form agreement", kernel_forms},
      {"upper kernel inequality", remark_upper},
      {"lower kernel inequality with exact constants", lemma_lower},
      {"semigroup chain via quadrature", chain},
      {"transference on polynomials of degree <= 4", transference},
      {"OU mass and gaussian-measure symmetry", ou_markov},
      {"hermite eigenfunction decay", eigen_decay},
      {"quadrature against closed forms", closed_forms},
      {"D_p^W classification table", classification},
      {"weight transfer invariance", transfer},
      {"convergence and blow-up experiments", convergence},
      {"deterministic verify reports", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first
              << " [" << fmt(secs) << " s] " << o.detail.str() << "\n"
              << std::flush;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
