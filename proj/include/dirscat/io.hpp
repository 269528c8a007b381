#pragma once

// Run configuration files, binary checkpoints and diagnostics tables.
//
// Config: one `key = value` per line, `#` starts a comment, lists are
// written `[a, b, c]`, strings may be quoted. Unknown keys are errors.
//
// Checkpoint (version 1), all fields little-endian:
//   offset  0  char[8]  "DIRSCAT1"
//   offset  8  u32      version
//   offset 12  u32      n (points per axis)
//   offset 16  f64      box length L
//   offset 24  f64      time
//   offset 32  u32      content (0 full psi, 1 profile f_+, 2 profile f_-)
//   offset 36  u32      representation (0 physical, 1 spectral)
//   offset 40  f64[2 * 4 * n^3]  (re, im) pairs, component-major, x fastest
// Spectral payloads use the transform convention of field.hpp (forward
// transform carries dx^3).

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirscat/integrator.hpp"
#include "dirscat/scattering.hpp"

namespace dirscat {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
}

inline long parse_integer(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d)) throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigError("config key '" + key + "': expected a list [a, b, ...], got '" + v + "'");
  std::vector<double> out;
  std::stringstream ss(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

template <class Enum>
Enum parse_choice(const std::string& key, const std::string& v, const std::vector<std::pair<std::string, Enum>>& options) {
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (name == v) return value;
    allowed += (allowed.empty() ? "" : "|") + name;
  }
  throw ConfigError("config key '" + key + "': expected one of " + allowed + ", got '" + v + "'");
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
  const auto l = parse_list(key, v);
  if (l.size() != 3) throw ConfigError("config key '" + key + "': expected 3 entries");
  return {l[0], l[1], l[2]};
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

}  // namespace detail

/// Parses config text. `source` names the origin in error messages.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  RunConfig c;
  std::set<std::string> seen;
  bool have_g = false, have_c1 = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string v = detail::unquote(detail::trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "': given twice");
    using detail::parse_double, detail::parse_integer, detail::parse_bool, detail::parse_choice;
    if (key == "n") c.n = static_cast<int>(parse_integer(key, v));
    else if (key == "L") c.box_length = parse_double(key, v);
    else if (key == "eps0") c.data.eps0 = parse_double(key, v);
    else if (key == "dt") c.dt = parse_double(key, v);
    else if (key == "t_final") c.t_final = parse_double(key, v);
    else if (key == "g") { c.g = parse_double(key, v); have_g = true; }
    else if (key == "c1") {
      const double c1 = parse_double(key, v);
      if (c1 < 0.0) throw ConfigError("config key 'c1': must be non-negative");
      c.g = std::sqrt(4.0 * std::numbers::pi * c1);
      have_c1 = true;
    }
    else if (key == "family") c.data.family = parse_choice<DataFamily>(key, v, {{"gaussian", DataFamily::gaussian}, {"random", DataFamily::random_smooth}});
    else if (key == "width") c.data.width = parse_double(key, v);
    else if (key == "k0") c.data.k0 = detail::parse_vec3(key, v);
    else if (key == "center") c.data.center = detail::parse_vec3(key, v);
    else if (key == "branch") c.data.branch = parse_choice<BranchContent>(key, v, {{"plus", BranchContent::plus}, {"minus", BranchContent::minus}, {"both", BranchContent::both}});
    else if (key == "spinor") {
      const auto l = detail::parse_list(key, v);
      if (l.size() != 8) throw ConfigError("config key 'spinor': expected 8 entries (re, im) x 4");
      for (int i = 0; i < 4; ++i) c.data.spinor[static_cast<std::size_t>(i)] = cplx(l[2 * i], l[2 * i + 1]);
    }
    else if (key == "seed") c.data.seed = static_cast<std::uint64_t>(parse_integer(key, v));
    else if (key == "snapshot_times") c.snapshot_times = detail::parse_list(key, v);
    else if (key == "snapshot_every") c.snapshot_every = parse_double(key, v);
    else if (key == "hk_order") c.hk_order = static_cast<int>(parse_integer(key, v));
    else if (key == "coulomb") c.coulomb = parse_choice<CoulombMode>(key, v, {{"periodic", CoulombMode::periodic}, {"free_space", CoulombMode::free_space}});
    else if (key == "dealias") c.dealias = parse_bool(key, v);
    else if (key == "gauge") c.gauge = parse_choice<GaugeConvention>(key, v, {{"zero_mode_dropped", GaugeConvention::zero_mode_dropped}, {"mean_field_shift", GaugeConvention::mean_field_shift}});
    else if (key == "gauge_lambda") c.gauge_lambda = parse_double(key, v);
    else if (key == "hartree_diagnostic") c.hartree_diagnostic = parse_bool(key, v);
    else if (key == "instability_threshold") c.instability_threshold = parse_double(key, v);
    else if (key == "kernel_sign") c.phase.kernel_sign = parse_choice<KernelSign>(key, v, {{"theorem", KernelSign::theorem_minus}, {"section6", KernelSign::section6_plus}});
    else if (key == "cutoff_exponent") c.phase.cutoff_exponent = parse_double(key, v);
    else if (key == "correction_sign") c.phase.correction_sign = parse_choice<CorrectionSign>(key, v, {{"dynamics", CorrectionSign::dynamics}, {"literal", CorrectionSign::literal}});
    else if (key == "profile_time") c.phase.profile_time = parse_choice<ProfileTime>(key, v, {{"evolving", ProfileTime::evolving}, {"frozen", ProfileTime::frozen}});
    else if (key == "weight_power") c.phase.weight_power = parse_double(key, v);
    else if (key == "kernel_method") c.phase.kernel_method = parse_choice<KernelMethod>(key, v, {{"direct", KernelMethod::direct}, {"velocity_grid", KernelMethod::velocity_grid}});
    else if (key == "velocity_grid_n") c.phase.velocity_grid_n = static_cast<int>(parse_integer(key, v));
    else throw ConfigError("unknown config key '" + key + "' (" + source + ":" + std::to_string(lineno) + ")");
  }
  if (have_g && have_c1) throw ConfigError("config keys 'g' and 'c1' are mutually exclusive");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

/// Complete, re-runnable config text with every default spelled out.
inline std::string format_config(const RunConfig& c) {
  using detail::fmt;
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  kv("n", std::to_string(c.n));
  kv("L", fmt(c.box_length));
  kv("eps0", fmt(c.data.eps0));
  kv("dt", fmt(c.dt));
  kv("t_final", fmt(c.t_final));
  kv("g", fmt(c.g));
  kv("family", c.data.family == DataFamily::gaussian ? "gaussian" : "random");
  kv("width", fmt(c.data.width));
  kv("k0", detail::fmt_list({c.data.k0[0], c.data.k0[1], c.data.k0[2]}));
  kv("center", detail::fmt_list({c.data.center[0], c.data.center[1], c.data.center[2]}));
  kv("branch", c.data.branch == BranchContent::plus ? "plus" : c.data.branch == BranchContent::minus ? "minus" : "both");
  std::vector<double> sp;
  for (const auto& z : c.data.spinor) {
    sp.push_back(z.real());
    sp.push_back(z.imag());
  }
  kv("spinor", detail::fmt_list(sp));
  kv("seed", std::to_string(c.data.seed));
  if (c.snapshot_times.empty()) kv("snapshot_every", fmt(c.snapshot_every));
  else kv("snapshot_times", detail::fmt_list(c.snapshot_times));
  kv("hk_order", std::to_string(c.hk_order));
  kv("coulomb", to_string(c.coulomb));
  kv("dealias", c.dealias ? "true" : "false");
  kv("gauge", to_string(c.gauge));
  kv("gauge_lambda", fmt(c.gauge_lambda));
  kv("hartree_diagnostic", c.hartree_diagnostic ? "true" : "false");
  kv("instability_threshold", fmt(c.instability_threshold));
  kv("kernel_sign", to_string(c.phase.kernel_sign));
  kv("cutoff_exponent", fmt(c.phase.cutoff_exponent));
  kv("correction_sign", to_string(c.phase.correction_sign));
  kv("profile_time", to_string(c.phase.profile_time));
  kv("weight_power", fmt(c.phase.weight_power));
  kv("kernel_method", c.phase.kernel_method == KernelMethod::direct ? "direct" : "velocity_grid");
  kv("velocity_grid_n", std::to_string(c.phase.velocity_grid_n));
  return o.str();
}

// ---------------------------------------------------------------- checkpoints

inline constexpr char kCheckpointMagic[8] = {'D', 'I', 'R', 'S', 'C', 'A', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 40;

enum class CheckpointContent : std::uint32_t { full = 0, profile_plus = 1, profile_minus = 2 };

struct Checkpoint {
  double time = 0.0;
  CheckpointContent content = CheckpointContent::full;
  SpinorField field;
};

namespace detail {

template <class T>
void put_le(std::string& buf, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

/// Writes `data` to `path` through a temporary file and rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& c) {
  const FourierGrid& g = c.field.grid();
  std::string buf;
  buf.reserve(kCheckpointHeaderBytes + 16 * c.field.raw().size());
  buf.append(kCheckpointMagic, 8);
  detail::put_le<std::uint32_t>(buf, kCheckpointVersion);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.n()));
  detail::put_le<double>(buf, g.box_length());
  detail::put_le<double>(buf, c.time);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(c.content));
  detail::put_le<std::uint32_t>(buf, c.field.is_spectral() ? 1u : 0u);
  for (const auto& z : c.field.raw()) {
    detail::put_le<double>(buf, z.real());
    detail::put_le<double>(buf, z.imag());
  }
  return buf;
}

inline Checkpoint decode_checkpoint(const std::string& buf, const std::string& source = "checkpoint") {
  if (buf.size() < kCheckpointHeaderBytes) throw FormatError(source + ": truncated header");
  if (std::memcmp(buf.data(), kCheckpointMagic, 8) != 0) throw FormatError(source + ": bad magic (not a DIRSCAT1 checkpoint)");
  const auto version = detail::get_le<std::uint32_t>(buf.data() + 8);
  if (version != kCheckpointVersion)
    throw FormatError(source + ": unsupported checkpoint version " + std::to_string(version));
  const auto n = detail::get_le<std::uint32_t>(buf.data() + 12);
  const double length = detail::get_le<double>(buf.data() + 16);
  const double time = detail::get_le<double>(buf.data() + 24);
  const auto content = detail::get_le<std::uint32_t>(buf.data() + 32);
  const auto rep = detail::get_le<std::uint32_t>(buf.data() + 36);
  if (content > 2) throw FormatError(source + ": invalid content flag " + std::to_string(content));
  if (rep > 1) throw FormatError(source + ": invalid representation flag " + std::to_string(rep));
  GridPtr grid;
  try {
    grid = make_grid(static_cast<int>(n), length);
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": invalid grid in header: " + e.what());
  }
  const std::size_t values = 4 * grid->size();
  const std::size_t expected = kCheckpointHeaderBytes + 16 * values;
  if (buf.size() < expected) throw FormatError(source + ": truncated payload");
  if (buf.size() > expected) throw FormatError(source + ": trailing bytes after payload");
  Checkpoint c;
  c.time = time;
  c.content = static_cast<CheckpointContent>(content);
  c.field = SpinorField(grid, rep == 1 ? Representation::spectral : Representation::physical);
  const char* p = buf.data() + kCheckpointHeaderBytes;
  for (std::size_t i = 0; i < values; ++i, p += 16)
    c.field.raw()[i] = cplx(detail::get_le<double>(p), detail::get_le<double>(p + 8));
  return c;
}

inline void write_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  detail::atomic_write(path, encode_checkpoint(c));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str(), path.string());
}

// ---------------------------------------------------------------- tables

inline const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{
      "time",         "mass",          "mass_drift",    "linf",          "hk",
      "wh2_a1_plus",  "wh2_a1_minus",  "wh2_a2_plus",   "wh2_a2_minus",  "xiw_sup_plus",
      "xiw_sup_minus", "hartree_w2inf"};
  return cols;
}

inline std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
  std::string out;
  const auto& cols = diagnostics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : rows) {
    const double v[] = {r.time,          r.mass,          r.mass_drift,       r.linf,
                        r.hk,            r.weighted_a1_plus, r.weighted_a1_minus, r.weighted_a2_plus,
                        r.weighted_a2_minus, r.xi_sup_plus, r.xi_sup_minus,   r.hartree_w2inf};
    for (std::size_t i = 0; i < std::size(v); ++i) out += (i ? "," : "") + detail::fmt(v[i]);
    out += "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) { detail::atomic_write(path, text); }

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  detail::atomic_write(path, j.dump(2) + "\n");
}

}  // namespace dirscat
