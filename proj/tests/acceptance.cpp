// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "dirscat/io.hpp"
#include "dirscat/scattering.hpp"
#include "dirscat/suites.hpp"

#ifndef DIRSCAT_CONFIG_DIR
#define DIRSCAT_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace dirscat;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

RunConfig config(const std::string& name) { return load_config(fs::path(DIRSCAT_CONFIG_DIR) / name); }

std::string sci(double v) { return detail::sci(v); }

std::string summary(const SuiteResult& s) {
  std::string out;
  for (const auto& c : s.checks) out += (out.empty() ? "" : "; ") + c.name + (c.passed ? "" : " FAILED") + " (" + c.detail + ")";
  return out;
}

SpinorField linear_data() {
  const RunConfig c = config("decay.toml");
  return make_initial_data(make_grid(c.n, c.box_length), c.data);
}

const SuiteResult& linear_result() {
  static const SuiteResult s = linear_suite(linear_data(), 4.0, 28.0, 1.0);
  return s;
}

Outcome identities() {
  const SuiteResult s = identity_suite(1000, 100.0, 1, 1.0);
  return {s.passed(), summary(s)};
}

Outcome null_structure() {
  const SuiteResult s = null_structure_suite(10000, 7, 10.0);
  return {s.passed(), summary(s)};
}

Outcome conservation() {
  const CheckResult& lin = linear_result().checks.at(1);
  RunConfig c = config("conservation.toml");
  const TrajectoryState st = evolve(c);
  double drift = 0.0;
  for (const auto& r : st.diagnostics) drift = std::max(drift, r.mass_drift);
  const bool ok = lin.passed && drift < 1e-11;
  return {ok, lin.detail + "; nonlinear 48^3 mass drift " + sci(drift) + " (< 1e-11)"};
}

Outcome linear_decay() {
  const CheckResult& c = linear_result().checks.at(0);
  return {c.passed, c.detail};
}

Outcome nonlinear_decay() {
  const TrajectoryState st = evolve(config("decay.toml"));
  const NonlinearDecayFit f = nonlinear_decay_scan(st.diagnostics, 4.0, 28.0);
  const bool linf_ok = std::abs(f.linf.slope + 1.5) <= 0.2;
  const bool hartree_ok = f.has_hartree && std::abs(f.hartree.slope + 2.5) <= 0.3;
  return {linf_ok && hartree_ok, "Linf slope " + sci(f.linf.slope) + " (-1.5 +- 0.2), Hartree W2inf slope " +
                                     (f.has_hartree ? sci(f.hartree.slope) : std::string("n/a")) + " (-2.5 +- 0.3)"};
}

Outcome coulomb_oracle() {
  double worst = 0.0;
  for (double length : {12.0, 16.0, 24.0}) {
    auto g = make_grid(64, length);
    ScalarField rho(g, Representation::physical);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Vec3 x = g->position(i);
      rho[i] = std::exp(-dot(x, x));
    }
    const ScalarField v = CoulombSolver(g, CoulombMode::free_space).potential(rho);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Vec3 x = g->position(i);
      if (std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) > 0.4 * length) continue;
      const double r = norm(x);
      const double exact = r < 1e-12 ? 2.0 * std::numbers::pi : std::pow(std::numbers::pi, 1.5) * std::erf(r) / r;
      worst = std::max(worst, std::abs(v[i].real() - exact) / exact);
    }
  }
  return {worst <= 0.02, "free-space kernel, L in {12,16,24}: max relative error " + sci(worst) + " (<= 0.02)"};
}

Outcome splitting_order() {
  auto g = make_grid(32, 32.0);
  InitialData d;
  d.eps0 = 0.05;
  d.width = 1.5;
  d.branch = BranchContent::both;
  const SpinorField psi0 = make_initial_data(g, d);
  std::vector<SpinorField> runs;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    SplitStepper s(g, 1.0, dt);
    SpinorField p = psi0;
    s.steps(p, std::lround(2.0 / dt));
    runs.push_back(std::move(p));
  }
  std::vector<double> e;
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) e.push_back(linear_combination(1.0, runs[i], -1.0, runs[i + 1]).l2_norm());
  const double r1 = e[0] / e[1], r2 = e[1] / e[2];
  const bool ok = r1 >= 3.4 && r1 <= 4.6 && r2 >= 3.4 && r2 <= 4.6;
  return {ok, "error ratios " + sci(r1) + ", " + sci(r2) + " (in [3.4, 4.6])"};
}

Outcome modified_scattering() {
  const RunConfig c = config("scattering.toml");
  ScatterAnalysis a(make_grid(c.n, c.box_length), c.c1(), c.phase, c.t_final, ScatterOptions{});
  evolve(c, [&](double t, const SpinorField& psi) { a.observe(t, psi); });
  const ScatterReport r = a.finish();
  std::ostringstream o;
  o << "uncorrected";
  for (double u : r.uncorrected) o << " " << sci(u);
  for (const auto& v : r.variants) {
    o << "; " << to_string(v.sign) << ":";
    for (double x : v.drift) o << " " << sci(x);
    o << (v.halves_final && v.non_increasing ? " (passes)" : " (fails)");
  }
  return {r.drift_pass(), o.str()};
}

LogPhaseSlope phase_slope(double c1) {
  RunConfig c = config("phase_slope.toml");
  c.g = std::sqrt(4.0 * std::numbers::pi * c1);
  ScatterOptions opt;
  opt.variants.clear();
  opt.block_times.clear();
  opt.slope_t_lo = 8.0;
  ScatterAnalysis a(make_grid(c.n, c.box_length), c.c1(), c.phase, c.t_final, opt);
  evolve(c, [&](double t, const SpinorField& psi) { a.observe(t, psi); });
  const ScatterReport r = a.finish();
  if (!r.has_slope) throw std::runtime_error("no log-phase slope fitted");
  return r.slope;
}

Outcome log_phase() {
  const LogPhaseSlope full = phase_slope(1.0), half = phase_slope(0.5);
  const double scaling = full.measured / half.measured;
  const bool ok = std::abs(full.ratio - 1.0) <= 0.2 && std::abs(half.ratio - 1.0) <= 0.2 && std::abs(scaling / 2.0 - 1.0) <= 0.1;
  return {ok, "c1=1: measured " + sci(full.measured) + " predicted " + sci(full.predicted) + " ratio " + sci(full.ratio) +
                  "; c1=0.5: ratio " + sci(half.ratio) + "; slope(1)/slope(0.5) " + sci(scaling) + " (2 +- 10%)"};
}

Outcome resonance() {
  SuiteResult s = resonance_suite(10000, 30.0);
  SuiteResult again = resonance_suite(10000, 30.0);
  s.report.erase("seconds");
  again.report.erase("seconds");
  const bool deterministic = s.report.dump() == again.report.dump();
  return {s.passed() && deterministic, summary(s) + "; repeat identical: " + (deterministic ? "yes" : "no")};
}

Outcome reproducibility() {
  RunConfig c = config("minimal.toml");
  c.data.family = DataFamily::random_smooth;
  c.data.seed = 11;
  const fs::path dir = fs::temp_directory_path() / "dirscat_acceptance";
  fs::create_directories(dir);
  std::string bytes[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path p = dir / ("diagnostics_" + std::to_string(k) + ".csv");
    write_text(p, diagnostics_csv(evolve(c).diagnostics));
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes[k] = ss.str();
  }
  fs::remove_all(dir);
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
  return {ok, std::to_string(bytes[0].size()) + " bytes, " + (ok ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"algebraic identities", identities},      {"spinorial null structure", null_structure},
      {"unitarity and conservation", conservation}, {"linear decay", linear_decay},
      {"nonlinear decay", nonlinear_decay},      {"Coulomb oracle", coulomb_oracle},
      {"splitting convergence", splitting_order}, {"modified scattering", modified_scattering},
      {"log-phase slope", log_phase},            {"resonance scans", resonance},
      {"reproducibility", reproducibility}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
