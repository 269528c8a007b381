// dirscat: command-line driver.
//
// Exit status: 0 when every check of the invoked suite passes, 1 when a check
// fails, 2 on usage, configuration or file errors.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "dirscat/io.hpp"
#include "dirscat/scattering.hpp"
#include "dirscat/suites.hpp"

namespace fs = std::filesystem;
using namespace dirscat;

namespace {

int finish(const SuiteResult& s, const std::string& report_path) {
  nlohmann::ordered_json j = s.report;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : s.checks) {
    std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["passed"] = s.passed();
  if (!report_path.empty()) write_json(report_path, j);
  return s.passed() ? 0 : 1;
}

std::string checkpoint_name(long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "psi_%08ld.bin", step);
  return buf;
}

std::vector<fs::path> list_checkpoints(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.starts_with("psi_") && e.path().extension() == ".bin") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void echo_config(const RunConfig& c) {
  std::cerr << "# effective configuration\n" << format_config(c) << std::flush;
}

int run_simulate(const std::string& config_path, const fs::path& out, const std::string& checkpoints) {
  const RunConfig c = load_config(config_path);
  echo_config(c);
  fs::create_directories(out);
  write_text(out / "config.txt", format_config(c));
  const auto steps = c.snapshot_steps();
  std::size_t next = 0;
  const TrajectoryState state = evolve(c, [&](double t, const SpinorField& psi) {
    const long step = steps[next++];
    const bool last = next == steps.size();
    if (checkpoints == "all" || (checkpoints == "final" && last))
      write_checkpoint({t, CheckpointContent::full, psi}, out / checkpoint_name(step));
  });
  write_text(out / "diagnostics.csv", diagnostics_csv(state.diagnostics));

  SuiteResult s;
  double drift = 0.0;
  for (const auto& r : state.diagnostics) drift = std::max(drift, r.mass_drift);
  s.report = {{"snapshots", state.diagnostics.size()}, {"t_final", state.time}, {"max_mass_drift", drift}};
  s.add("mass_conservation", drift < 1e-11, "max relative mass drift " + detail::sci(drift));
  return finish(s, (out / "simulate.json").string());
}

int run_lincheck(const std::string& config_path, double t_lo, double t_hi, double every, const std::string& report) {
  const RunConfig c = load_config(config_path);
  echo_config(c);
  const SpinorField psi0 = make_initial_data(make_grid(c.n, c.box_length), c.data);
  return finish(linear_suite(psi0, t_lo, t_hi, every), report);
}

int run_nullcheck(int samples, std::uint64_t seed, const std::string& report) {
  SuiteResult all = null_structure_suite(samples, seed);
  SuiteResult res = resonance_suite(samples);
  all.checks.insert(all.checks.end(), res.checks.begin(), res.checks.end());
  nlohmann::ordered_json j;
  j["null_structure"] = all.report;
  j["resonance"] = res.report;
  all.report = j;
  return finish(all, report);
}

int run_scatter(const fs::path& run, const std::string& variant, std::vector<double> blocks, double slope_from,
                bool relative, const std::string& report, const std::string& phase_csv) {
  if (!fs::exists(run / "config.txt")) throw std::runtime_error("missing " + (run / "config.txt").string());
  const RunConfig c = load_config(run / "config.txt");
  const auto files = list_checkpoints(run);
  if (files.empty()) throw std::runtime_error("no checkpoint files psi_*.bin in " + run.string());

  ScatterOptions opt;
  if (variant == "theorem") opt.variants = {KernelSign::theorem_minus};
  else if (variant == "section6") opt.variants = {KernelSign::section6_plus};
  else opt.variants = {KernelSign::theorem_minus, KernelSign::section6_plus};
  if (!blocks.empty()) opt.block_times = blocks;
  opt.slope_t_lo = slope_from;
  opt.relative_phase = relative;

  GridPtr grid = make_grid(c.n, c.box_length);
  ScatterAnalysis analysis(grid, c.c1(), c.phase, c.t_final, opt);
  std::vector<double> seen;
  for (const auto& f : files) {
    Checkpoint cp = read_checkpoint(f);
    if (cp.content != CheckpointContent::full) continue;
    if (!(cp.field.grid() == *grid)) throw std::runtime_error(f.string() + ": grid does not match config.txt");
    analysis.observe(cp.time, cp.field);
    seen.push_back(cp.time);
  }
  for (double bt : opt.block_times)
    if (std::none_of(seen.begin(), seen.end(), [&](double t) { return std::abs(t - bt) < 1e-9 * std::max(1.0, bt); }))
      throw std::runtime_error("missing snapshot at block time " + detail::sci(bt) + " in " + run.string());
  const ScatterReport r = analysis.finish();

  SuiteResult s;
  nlohmann::ordered_json variants = nlohmann::ordered_json::array();
  for (const auto& v : r.variants)
    variants.push_back({{"kernel_sign", to_string(v.sign)},
                        {"corrected_drift", v.drift},
                        {"halves_final_block", v.halves_final},
                        {"non_increasing", v.non_increasing},
                        {"skipped_mass", v.skipped_mass}});
  s.report = {{"c1", c.c1()},
              {"weight_power", c.phase.weight_power},
              {"cutoff_exponent", c.phase.cutoff_exponent},
              {"correction_sign", to_string(c.phase.correction_sign)},
              {"profile_time", to_string(c.phase.profile_time)},
              {"blocks", r.blocks},
              {"uncorrected_drift", r.uncorrected},
              {"variants", variants}};
  s.add("corrected_drift", r.drift_pass(), "some variant halves the final-block drift and is non-increasing");
  if (r.has_slope) {
    const Vec3 node = grid->wavenumber(r.slope.node);
    s.report["log_phase_slope"] = {{"node", node},
                                   {"reference", grid->wavenumber(r.slope.reference)},
                                   {"measured", r.slope.measured},
                                   {"predicted", r.slope.predicted},
                                   {"ratio", r.slope.ratio}};
    s.add("log_phase_slope", std::abs(r.slope.ratio - 1.0) <= 0.2, "measured/predicted " + detail::sci(r.slope.ratio));
  }
  if (!phase_csv.empty() && !opt.variants.empty()) {
    const PhaseTable& t = analysis.table(0);
    std::string out = "kx,ky,kz,b_plus,b_minus\n";
    for (std::size_t idx = 0; idx < grid->size(); ++idx) {
      if (t.b_plus[idx] == 0.0 && t.b_minus[idx] == 0.0) continue;
      const Vec3 k = grid->wavenumber(idx);
      out += detail::fmt(k[0]) + "," + detail::fmt(k[1]) + "," + detail::fmt(k[2]) + "," + detail::fmt(t.b_plus[idx]) +
             "," + detail::fmt(t.b_minus[idx]) + "\n";
    }
    write_text(phase_csv, out);
  }
  return finish(s, report.empty() ? (run / "scatter.json").string() : report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirac-Hartree scattering simulator and diagnostics"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run the split-step integrator and write diagnostics");
  std::string config, out, checkpoints = "all";
  sim->add_option("--config", config, "flat key = value config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "output directory")->required();
  sim->add_option("--checkpoints", checkpoints, "which snapshots to write")
      ->check(CLI::IsMember({"all", "final", "none"}));

  auto* lin = app.add_subcommand("lincheck", "linear dispersive decay scan");
  double t_lo = 4.0, t_hi = 28.0, every = 1.0;
  std::string lin_report;
  lin->add_option("--config", config, "config supplying grid and initial data")->required()->check(CLI::ExistingFile);
  lin->add_option("--t-lo", t_lo, "fit window start");
  lin->add_option("--t-hi", t_hi, "fit window end");
  lin->add_option("--every", every, "sample spacing")->check(CLI::PositiveNumber);
  lin->add_option("--report", lin_report, "JSON report path");

  auto* nul = app.add_subcommand("nullcheck", "null-structure and resonance scans");
  int samples = 10000;
  std::uint64_t seed = 7;
  std::string nul_report;
  nul->add_option("--samples", samples, "samples per scan")->check(CLI::Range(1, 100000000));
  nul->add_option("--seed", seed, "seed for the null-structure scan");
  nul->add_option("--report", nul_report, "JSON report path");

  auto* sca = app.add_subcommand("scatter-analyze", "phase correction, drift metrics and log-phase slope");
  std::string run, variant = "both", sca_report, phase_csv;
  std::vector<double> blocks;
  double slope_from = 8.0;
  bool relative = false;
  sca->add_option("--run", run, "directory written by simulate")->required()->check(CLI::ExistingDirectory);
  sca->add_option("--variant", variant, "kernel-sign variant")->check(CLI::IsMember({"theorem", "section6", "both"}));
  sca->add_option("--blocks", blocks, "block boundary times")->delimiter(',');
  sca->add_option("--slope-from", slope_from, "log-phase fit window start");
  sca->add_flag("--relative-phase", relative, "fit the phase relative to a reference node");
  sca->add_option("--report", sca_report, "JSON report path (default RUN/scatter.json)");
  sca->add_option("--phase-csv", phase_csv, "write the final phase table as CSV");

  auto* ide = app.add_subcommand("identities", "Dirac algebra identity check");
  int id_samples = 1000;
  double radius = 100.0;
  std::string id_report;
  ide->add_option("--samples", id_samples, "random frequencies")->check(CLI::Range(1, 100000000));
  ide->add_option("--radius", radius, "sampling radius")->check(CLI::PositiveNumber);
  ide->add_option("--seed", seed, "random seed");
  ide->add_option("--report", id_report, "JSON report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(config, out, checkpoints);
    if (*lin) return run_lincheck(config, t_lo, t_hi, every, lin_report);
    if (*nul) return run_nullcheck(samples, seed, nul_report);
    if (*sca) return run_scatter(run, variant, blocks, slope_from, relative, sca_report, phase_csv);
    if (*ide) return finish(identity_suite(id_samples, radius, ide->count("--seed") ? seed : 1), id_report);
  } catch (const InstabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
