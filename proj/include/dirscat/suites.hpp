#pragma once

// Check suites shared by the command-line tool and the acceptance runner.
// Each suite returns named pass/fail results plus a JSON report.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "dirscat/dirac.hpp"
#include "dirscat/propagator.hpp"
#include "dirscat/resonance.hpp"

namespace dirscat {

// Frozen after the first scans; see README.
inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kNullConstant = 0.51;
inline constexpr double kRemainderBound = 8.0;
inline constexpr double kPhaseLowerBoundConstant = 0.9;
inline constexpr double kLinearSlope = -1.5;
inline constexpr double kLinearSlopeTolerance = 0.15;

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteResult {
  std::vector<CheckResult> checks;
  nlohmann::ordered_json report;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void add(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
};

namespace detail {
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}
}  // namespace detail

inline SuiteResult identity_suite(int samples, double radius = 100.0, std::uint64_t seed = 1,
                                  double max_seconds = 1.0) {
  SuiteResult s;
  const IdentityReport r = check_identities(samples, radius, seed);
  s.report = {{"samples", r.samples},
              {"radius", radius},
              {"seed", seed},
              {"hamiltonian_square", r.hamiltonian_square},
              {"completeness", r.completeness},
              {"idempotence", r.idempotence},
              {"orthogonality", r.orthogonality},
              {"max_deviation", r.max_deviation()},
              {"seconds", r.seconds}};
  s.add("identities", r.max_deviation() < kIdentityTolerance,
        "max deviation " + detail::sci(r.max_deviation()) + " (< " + detail::sci(kIdentityTolerance) + ")");
  s.add("identities_runtime", r.seconds < max_seconds, detail::sci(r.seconds) + " s");
  return s;
}

inline SuiteResult null_structure_suite(int samples, std::uint64_t seed = 7, double max_seconds = 10.0) {
  SuiteResult s;
  const NullScanReport r = scan_null_structure(samples, kNullConstant, seed);
  s.report = {{"samples", r.samples},
              {"seed", seed},
              {"constant", kNullConstant},
              {"max_ratio", r.max_ratio},
              {"worst_xi", r.worst_xi},
              {"worst_eta", r.worst_eta},
              {"violations", r.violations},
              {"seconds", r.seconds}};
  s.add("null_structure", r.violations == 0 && r.samples >= 10000,
        "max ratio " + detail::sci(r.max_ratio) + ", " + std::to_string(r.violations) + " violations of C = " +
            detail::sci(kNullConstant) + " over " + std::to_string(r.samples) + " pairs");
  s.add("null_structure_runtime", r.seconds < max_seconds, detail::sci(r.seconds) + " s");
  return s;
}

inline SuiteResult resonance_suite(int samples, double max_seconds = 30.0) {
  SuiteResult s;
  const auto start = std::chrono::steady_clock::now();
  const MBoundReport zero = scan_m_bound(samples, 0, 0);
  const NonDegeneracyReport nd = scan_mixed_sign_pair(samples);
  const RemainderReport q1 = quadratic_remainder_check(samples, 1e-2);
  const RemainderReport q2 = quadratic_remainder_check(samples, 1e-3);
  const GradientCheckReport gc = gradient_check(samples / 10 + 1);
  const PhaseLowerBoundReport pl = phase_lower_bound_check(samples);
  nlohmann::ordered_json mb = nlohmann::ordered_json::array();
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) {
      const MBoundReport r = scan_m_bound(samples / 10 + 1, n, m);
      mb.push_back({{"n", n}, {"m", m}, {"samples", r.samples}, {"ratio_min", r.ratio_min}, {"ratio_max", r.ratio_max}});
    }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  s.report = {{"samples", samples},
              {"m_zero_rows", zero.zero_eta_rows},
              {"m_zero_nonzero", zero.zero_eta_nonzero},
              {"mixed_pair_min", nd.min_value},
              {"remainder", {{{"eta", q1.eta_scale}, {"max_ratio", q1.max_ratio}}, {{"eta", q2.eta_scale}, {"max_ratio", q2.max_ratio}}}},
              {"remainder_bound", kRemainderBound},
              {"gradient_max_relative_error", gc.max_relative_error},
              {"phase_lower_bound_min_ratio", pl.min_ratio},
              {"phase_lower_bound_constant", kPhaseLowerBoundConstant},
              {"m_bound_scans", mb},
              {"seconds", seconds}};
  s.add("m_vanishes_at_eta_zero", zero.zero_eta_rows > 0 && zero.zero_eta_nonzero == 0,
        std::to_string(zero.zero_eta_nonzero) + " nonzero of " + std::to_string(zero.zero_eta_rows) + " rows");
  s.add("mixed_pair_nondegenerate", nd.min_value >= 2.0, "min " + detail::sci(nd.min_value));
  s.add("quadratic_remainder", q1.max_ratio <= kRemainderBound && q2.max_ratio <= kRemainderBound,
        "ratios " + detail::sci(q1.max_ratio) + ", " + detail::sci(q2.max_ratio) + " (<= " + detail::sci(kRemainderBound) + ")");
  s.add("resonance_gradients", gc.max_relative_error < 1e-6, "max rel err " + detail::sci(gc.max_relative_error));
  s.add("phase_lower_bound", pl.min_ratio >= kPhaseLowerBoundConstant, "min ratio " + detail::sci(pl.min_ratio));
  s.add("resonance_runtime", seconds < max_seconds, detail::sci(seconds) + " s");
  return s;
}

/// Linear decay and L2 conservation of the free flow from `psi0`.
inline SuiteResult linear_suite(const SpinorField& psi0, double t_lo, double t_hi, double every) {
  SuiteResult s;
  std::vector<double> times;
  for (double t = t_lo; t <= t_hi + 1e-9; t += every) times.push_back(t);
  const auto samples = decay_scan(psi0, times);
  const LineFit fit = decay_slope(samples, t_lo, t_hi);
  const double m0 = psi0.l2_norm();
  double drift = 0.0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : samples) {
    drift = std::max(drift, std::abs(r.l2 - m0) / m0);
    rows.push_back({{"time", r.t}, {"linf", r.sup}, {"l2", r.l2}});
  }
  s.report = {{"t_lo", t_lo}, {"t_hi", t_hi}, {"slope", fit.slope}, {"rms_residual", fit.rms_residual},
              {"max_l2_drift", drift}, {"samples", rows}};
  s.add("linear_decay", std::abs(fit.slope - kLinearSlope) <= kLinearSlopeTolerance,
        "slope " + detail::sci(fit.slope) + " (target -1.5 +- 0.15)");
  s.add("linear_unitarity", drift < 1e-12, "max L2 drift " + detail::sci(drift));
  return s;
}

}  // namespace dirscat
