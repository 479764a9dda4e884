#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/linear_decay.hpp"
#include "nsp/thermo.hpp"

namespace nsp {

/// Renders a double with 17 significant digits so it parses back bit-exactly.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One linear-decay query of the experiment: which norm and which target index.
struct DecaySpec {
  Component component = Component::density;
  double ell = 0.0;
  double q = 2.0;
  bool operator==(const DecaySpec&) const = default;
};

/// Everything one experiment needs. Text form (see README):
///
///   # comment
///   [section]
///   key = value
///
/// Sections: run, grid, fluid, doping, steady, initial, evolve, decay.
/// Every key may appear at most once except decay.query, which repeats.
struct ExperimentConfig {
  // [run]
  std::vector<std::string> stages{"steady", "evolve"};
  std::uint64_t seed = 1;
  std::string output = "out";
  // [grid]
  int dim = 3;
  int n = 32;
  double length = 2.0 * 3.141592653589793;
  // [fluid]
  std::string law = "gamma:2";
  double mu = 0.5;
  double mu_prime = 0.0;
  // [doping]
  std::string doping = "gaussian-bump";  ///< flat | gaussian-bump | cosine | file
  double doping_base = 1.0;
  double doping_amplitude = 0.1;
  std::vector<double> doping_center{};    ///< empty: centre of the box
  double doping_sigma = 1.0;
  std::vector<int> doping_mode{1, 0, 0};
  std::string doping_path{};
  // [steady]
  double steady_tol = 1e-12;
  int steady_max_iter = 200;
  double steady_relaxation = 1.0;
  std::string steady_method = "picard";   ///< picard | newton
  // [initial]
  std::string initial = "random-smooth";  ///< zero | mode | random-smooth
  std::vector<int> initial_mode{1, 0, 0};
  double initial_amplitude = 1e-3;
  int initial_band = 4;
  // [evolve]
  double t_end = 1.0;
  double dt = 0.0;                        ///< 0: chosen from the stability heuristic
  double report_every = 0.1;
  double cfl = 0.4;
  std::string scheme = "exponential";     ///< exponential | explicit
  std::string form = "constant";          ///< constant | variable
  double sobolev_k = 4.0;
  double zeta_p = 1.0;
  double zeta_r = 1.25;
  bool snapshots = false;
  double energy_factor = 50.0;
  double bootstrap_growth = 10.0;
  // [decay]
  double decay_p = 1.0;
  std::string decay_profile = "gaussian";
  double decay_t_min = 1e2;
  double decay_t_max = 1e4;
  int decay_samples = 60;
  double decay_tolerance = 0.05;
  std::vector<DecaySpec> queries{};

  bool operator==(const ExperimentConfig&) const = default;

  bool has_stage(const std::string& s) const {
    for (const auto& x : stages)
      if (x == s) return true;
    return false;
  }

  /// Throws DomainError naming the first invalid entry.
  void validate() const {
    auto fail = [](const std::string& m) { throw DomainError("config: " + m); };
    if (stages.empty()) fail("run.stages is empty");
    for (const auto& s : stages)
      if (s != "steady" && s != "evolve" && s != "decay") fail("unknown stage '" + s + "'");
    if (output.empty()) fail("run.output is empty");
    if (dim < 1 || dim > 3) fail("grid.dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0) fail("grid.n must be a power of two >= 8");
    if (!(length > 0.0)) fail("grid.length must be positive");
    try {
      (void)parse_pressure_law(law);
    } catch (const Error& e) {
      fail(std::string("fluid.law: ") + e.what());
    }
    if (!(mu > 0.0)) fail("fluid.mu must be positive");
    if (!(mu_prime + 2.0 * mu / 3.0 >= 0.0)) fail("fluid.mu_prime violates mu' + 2 mu / 3 >= 0");
    if (doping != "flat" && doping != "gaussian-bump" && doping != "cosine" && doping != "file")
      fail("unknown doping preset '" + doping + "'");
    if (!(doping_base > 0.0)) fail("doping.base must be positive");
    if (!doping_center.empty() && doping_center.size() != 3) fail("doping.center needs three coordinates");
    if (doping_mode.size() != 3) fail("doping.mode needs three integers");
    if (!(doping_sigma > 0.0)) fail("doping.sigma must be positive");
    if (doping == "file" && doping_path.empty()) fail("doping.path is required for the file preset");
    if (!(steady_tol > 0.0)) fail("steady.tol must be positive");
    if (steady_max_iter < 1) fail("steady.max_iter must be positive");
    if (!(steady_relaxation > 0.0 && steady_relaxation <= 1.0)) fail("steady.relaxation must lie in (0, 1]");
    if (steady_method != "picard" && steady_method != "newton") fail("unknown steady.method '" + steady_method + "'");
    if (initial != "zero" && initial != "mode" && initial != "random-smooth")
      fail("unknown initial preset '" + initial + "'");
    if (initial_mode.size() != 3) fail("initial.mode needs three integers");
    if (!(initial_amplitude >= 0.0)) fail("initial.amplitude must be nonnegative");
    if (initial_band < 1 || initial_band > n / 3) fail("initial.band must lie in [1, n/3]");
    if (!(t_end > 0.0)) fail("evolve.t_end must be positive");
    if (!(dt >= 0.0)) fail("evolve.dt must be nonnegative");
    if (!(report_every > 0.0)) fail("evolve.report_every must be positive");
    if (!(cfl > 0.0)) fail("evolve.cfl must be positive");
    if (scheme != "exponential" && scheme != "explicit") fail("unknown evolve.scheme '" + scheme + "'");
    if (form != "constant" && form != "variable") fail("unknown evolve.form '" + form + "'");
    if (scheme == "exponential" && form != "constant") fail("the exponential scheme requires form = constant");
    if (!(sobolev_k >= 0.0)) fail("evolve.sobolev_k must be nonnegative");
    if (!(energy_factor > 0.0) || !(bootstrap_growth > 0.0)) fail("evolve gates must be positive");
    if (!(decay_p >= 1.0 && decay_p < 2.0)) fail("decay.p must lie in [1, 2)");
    if (!(decay_t_min > 0.0 && decay_t_max > decay_t_min)) fail("decay time window is empty");
    if (decay_samples < 10) fail("decay.samples must be at least 10");
    if (!(decay_tolerance > 0.0)) fail("decay.tolerance must be positive");
    SpectralProfile{decay_p, decay_profile}.validate();
    if (has_stage("decay") && queries.empty()) fail("the decay stage needs at least one decay.query");
    for (const auto& q : queries)
      if (!(q.ell >= 0.0) || !(q.q == 2.0 || std::isinf(q.q))) fail("decay.query needs ell >= 0 and q in {2, inf}");
  }

  std::string serialize() const {
    std::ostringstream os;
    auto d = format_double;
    auto list = [](const auto& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, double>)
          s += format_double(v[i]);
        else if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, int>)
          s += std::to_string(v[i]);
        else
          s += v[i];
      }
      return s;
    };
    os << "[run]\nstages = " << list(stages) << "\nseed = " << seed << "\noutput = " << output << "\n\n";
    os << "[grid]\ndim = " << dim << "\nn = " << n << "\nlength = " << d(length) << "\n\n";
    os << "[fluid]\nlaw = " << law << "\nmu = " << d(mu) << "\nmu_prime = " << d(mu_prime) << "\n\n";
    os << "[doping]\npreset = " << doping << "\nbase = " << d(doping_base) << "\namplitude = " << d(doping_amplitude)
       << "\ncenter = " << (doping_center.empty() ? std::string("auto") : list(doping_center))
       << "\nsigma = " << d(doping_sigma) << "\nmode = " << list(doping_mode) << "\n";
    if (!doping_path.empty()) os << "path = " << doping_path << "\n";
    os << "\n[steady]\ntol = " << d(steady_tol) << "\nmax_iter = " << steady_max_iter
       << "\nrelaxation = " << d(steady_relaxation) << "\nmethod = " << steady_method << "\n\n";
    os << "[initial]\npreset = " << initial << "\nmode = " << list(initial_mode) << "\namplitude = "
       << d(initial_amplitude) << "\nband = " << initial_band << "\n\n";
    os << "[evolve]\nt_end = " << d(t_end) << "\ndt = " << d(dt) << "\nreport_every = " << d(report_every)
       << "\ncfl = " << d(cfl) << "\nscheme = " << scheme << "\nform = " << form << "\nsobolev_k = " << d(sobolev_k)
       << "\nzeta_p = " << d(zeta_p) << "\nzeta_r = " << d(zeta_r) << "\nsnapshots = " << (snapshots ? "true" : "false")
       << "\nenergy_factor = " << d(energy_factor) << "\nbootstrap_growth = " << d(bootstrap_growth) << "\n\n";
    os << "[decay]\np = " << d(decay_p) << "\nprofile = " << decay_profile << "\nt_min = " << d(decay_t_min)
       << "\nt_max = " << d(decay_t_max) << "\nsamples = " << decay_samples << "\ntolerance = " << d(decay_tolerance)
       << "\n";
    for (const auto& q : queries)
      os << "query = " << to_string(q.component) << " " << d(q.ell) << " " << d(q.q) << "\n";
    return os.str();
  }

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw DomainError(where + ": expected a number, got '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw DomainError(where + ": expected an integer, got '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw DomainError(where + ": expected true or false, got '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  bool queries_seen = false;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw DomainError(at + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(at + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    const std::string where = at + " (" + full + ")";
    if (full != "decay.query" && seen[full]++ > 0) throw DomainError(where + ": duplicate key");

    auto num = [&] { return detail::parse_double(val, where); };
    auto integer = [&] { return static_cast<int>(detail::parse_int(val, where)); };
    auto ints3 = [&] {
      std::vector<int> v;
      for (const auto& s : detail::split(val, ", ")) v.push_back(static_cast<int>(detail::parse_int(s, where)));
      if (v.size() != 3) throw DomainError(where + ": expected three integers");
      return v;
    };

    if (full == "run.stages") c.stages = detail::split(val, ", ");
    else if (full == "run.seed") c.seed = static_cast<std::uint64_t>(detail::parse_int(val, where));
    else if (full == "run.output") c.output = val;
    else if (full == "grid.dim") c.dim = integer();
    else if (full == "grid.n") c.n = integer();
    else if (full == "grid.length") c.length = num();
    else if (full == "fluid.law") c.law = val;
    else if (full == "fluid.mu") c.mu = num();
    else if (full == "fluid.mu_prime") c.mu_prime = num();
    else if (full == "doping.preset") c.doping = val;
    else if (full == "doping.base") c.doping_base = num();
    else if (full == "doping.amplitude") c.doping_amplitude = num();
    else if (full == "doping.center") {
      c.doping_center.clear();
      if (val != "auto")
        for (const auto& s : detail::split(val, ", ")) c.doping_center.push_back(detail::parse_double(s, where));
    } else if (full == "doping.sigma") c.doping_sigma = num();
    else if (full == "doping.mode") c.doping_mode = ints3();
    else if (full == "doping.path") c.doping_path = val;
    else if (full == "steady.tol") c.steady_tol = num();
    else if (full == "steady.max_iter") c.steady_max_iter = integer();
    else if (full == "steady.relaxation") c.steady_relaxation = num();
    else if (full == "steady.method") c.steady_method = val;
    else if (full == "initial.preset") c.initial = val;
    else if (full == "initial.mode") c.initial_mode = ints3();
    else if (full == "initial.amplitude") c.initial_amplitude = num();
    else if (full == "initial.band") c.initial_band = integer();
    else if (full == "evolve.t_end") c.t_end = num();
    else if (full == "evolve.dt") c.dt = num();
    else if (full == "evolve.report_every") c.report_every = num();
    else if (full == "evolve.cfl") c.cfl = num();
    else if (full == "evolve.scheme") c.scheme = val;
    else if (full == "evolve.form") c.form = val;
    else if (full == "evolve.sobolev_k") c.sobolev_k = num();
    else if (full == "evolve.zeta_p") c.zeta_p = num();
    else if (full == "evolve.zeta_r") c.zeta_r = num();
    else if (full == "evolve.snapshots") c.snapshots = detail::parse_bool(val, where);
    else if (full == "evolve.energy_factor") c.energy_factor = num();
    else if (full == "evolve.bootstrap_growth") c.bootstrap_growth = num();
    else if (full == "decay.p") c.decay_p = num();
    else if (full == "decay.profile") c.decay_profile = val;
    else if (full == "decay.t_min") c.decay_t_min = num();
    else if (full == "decay.t_max") c.decay_t_max = num();
    else if (full == "decay.samples") c.decay_samples = integer();
    else if (full == "decay.tolerance") c.decay_tolerance = num();
    else if (full == "decay.query") {
      const auto parts = detail::split(val, ", ");
      if (parts.size() != 3) throw DomainError(where + ": expected 'component ell q'");
      if (!queries_seen) c.queries.clear();
      queries_seen = true;
      c.queries.push_back({parse_component(parts[0]), detail::parse_double(parts[1], where),
                           detail::parse_double(parts[2], where)});
    } else {
      throw DomainError(where + ": unknown key");
    }
  }
  c.validate();
  return c;
}

/// A preset call "name(arg, [a, b, c], ...)" split into its name and
/// top-level arguments; a bare "name" has no arguments.
struct PresetCall {
  std::string name;
  std::vector<std::string> args;
};

inline PresetCall parse_preset(const std::string& text) {
  const std::string t = detail::trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos) return {t, {}};
  if (t.back() != ')') throw DomainError("preset '" + t + "' is missing ')'");
  PresetCall call{detail::trim(t.substr(0, open)), {}};
  std::string cur;
  int depth = 0;
  for (char c : t.substr(open + 1, t.size() - open - 2)) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      call.args.push_back(detail::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!detail::trim(cur).empty()) call.args.push_back(detail::trim(cur));
  return call;
}

namespace detail {

inline std::vector<double> parse_vector(const std::string& s, const std::string& where) {
  std::string body = trim(s);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw DomainError(where + ": unbalanced brackets");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  for (const auto& part : split(body, ", ")) out.push_back(parse_double(part, where));
  return out;
}

inline std::vector<int> parse_mode(const std::string& s, const std::string& where) {
  std::vector<int> m;
  for (double v : parse_vector(s, where)) {
    if (v != std::floor(v)) throw DomainError(where + ": mode entries must be integers");
    m.push_back(static_cast<int>(v));
  }
  while (m.size() < 3) m.push_back(0);
  if (m.size() != 3) throw DomainError(where + ": a mode has at most three entries");
  return m;
}

}  // namespace detail

/// Applies a doping preset: flat[(base)], gaussian-bump(amplitude, center|auto, sigma),
/// cosine(amplitude, [m1, m2, m3]) or file(path).
inline void apply_doping_preset(ExperimentConfig& c, const std::string& text) {
  const PresetCall call = parse_preset(text);
  const std::string where = "doping preset '" + text + "'";
  auto need = [&](std::size_t n) {
    if (call.args.size() != n) throw DomainError(where + ": expected " + std::to_string(n) + " arguments");
  };
  if (call.name == "flat") {
    if (call.args.size() > 1) throw DomainError(where + ": expected at most one argument");
    if (call.args.size() == 1) c.doping_base = detail::parse_double(call.args[0], where);
  } else if (call.name == "gaussian-bump") {
    need(3);
    c.doping_amplitude = detail::parse_double(call.args[0], where);
    c.doping_center.clear();
    if (call.args[1] != "auto") {
      c.doping_center = detail::parse_vector(call.args[1], where);
      while (c.doping_center.size() < 3) c.doping_center.push_back(0.0);
    }
    c.doping_sigma = detail::parse_double(call.args[2], where);
  } else if (call.name == "cosine") {
    need(2);
    c.doping_amplitude = detail::parse_double(call.args[0], where);
    c.doping_mode = detail::parse_mode(call.args[1], where);
  } else if (call.name == "file") {
    need(1);
    c.doping_path = call.args[0];
  } else {
    throw DomainError("unknown doping preset '" + call.name + "'");
  }
  c.doping = call.name;
}

/// Applies an initial-data preset: zero, mode([m1, m2, m3], amplitude) or
/// random-smooth(seed, amplitude, band).
inline void apply_initial_preset(ExperimentConfig& c, const std::string& text) {
  const PresetCall call = parse_preset(text);
  const std::string where = "initial preset '" + text + "'";
  if (call.name == "zero") {
    if (!call.args.empty()) throw DomainError(where + ": takes no arguments");
  } else if (call.name == "mode") {
    if (call.args.size() != 2) throw DomainError(where + ": expected 2 arguments");
    c.initial_mode = detail::parse_mode(call.args[0], where);
    c.initial_amplitude = detail::parse_double(call.args[1], where);
  } else if (call.name == "random-smooth") {
    if (call.args.size() != 3) throw DomainError(where + ": expected 3 arguments");
    c.seed = static_cast<std::uint64_t>(detail::parse_int(call.args[0], where));
    c.initial_amplitude = detail::parse_double(call.args[1], where);
    c.initial_band = static_cast<int>(detail::parse_int(call.args[2], where));
  } else {
    throw DomainError("unknown initial preset '" + call.name + "'");
  }
  c.initial = call.name;
}

inline ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace nsp
