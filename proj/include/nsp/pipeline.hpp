#pragma once

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsp/config.hpp"
#include "nsp/doping.hpp"
#include "nsp/evolution.hpp"
#include "nsp/field_io.hpp"
#include "nsp/linear_decay.hpp"
#include "nsp/steady_state.hpp"
#include "nsp/targets.hpp"

namespace nsp {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Building blocks from a configuration

inline Grid make_grid(const ExperimentConfig& c) { return Grid(c.dim, c.n, c.length); }

inline FluidParams make_params(const ExperimentConfig& c) {
  FluidParams p;
  p.law = parse_pressure_law(c.law);
  p.mu = c.mu;
  p.mu_prime = c.mu_prime;
  return p;
}

inline DopingProfile make_doping(const ExperimentConfig& c, const Grid& g) {
  if (c.doping == "flat") return DopingProfile::flat(g, c.doping_base);
  if (c.doping == "gaussian-bump") {
    Point center{0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a)
      center[a] = c.doping_center.empty() ? (a < g.dim() ? 0.5 * g.length() : 0.0) : c.doping_center[a];
    return DopingProfile::gaussian_bump(g, c.doping_base, c.doping_amplitude, center, c.doping_sigma);
  }
  if (c.doping == "cosine")
    return DopingProfile::cosine(g, c.doping_base, c.doping_amplitude,
                                 {c.doping_mode[0], c.doping_mode[1], c.doping_mode[2]});
  if (c.doping == "file") {
    std::vector<Field> comps = io::read(c.doping_path);
    if (comps.size() != 1) throw DomainError("doping file must hold exactly one component");
    if (!(comps[0].grid() == g)) throw DomainError("doping file grid differs from the configured grid");
    return DopingProfile::gridded(std::move(comps[0]), c.doping_path);
  }
  throw DomainError("unknown doping preset '" + c.doping + "'");
}

inline SteadyOptions make_steady_options(const ExperimentConfig& c) {
  SteadyOptions o;
  o.tol = c.steady_tol;
  o.max_iter = c.steady_max_iter;
  o.relaxation = c.steady_relaxation;
  o.newton = c.steady_method == "newton";
  return o;
}

inline PerturbationState make_initial(const ExperimentConfig& c, const Grid& g) {
  if (c.initial == "zero") return PerturbationState::zero(g);
  if (c.initial == "mode")
    return mode_data(g, {c.initial_mode[0], c.initial_mode[1], c.initial_mode[2]}, c.initial_amplitude);
  if (c.initial == "random-smooth")
    return random_smooth_data(g, c.seed, c.initial_amplitude, c.initial_band, c.sobolev_k);
  throw DomainError("unknown initial preset '" + c.initial + "'");
}

inline EvolveOptions make_evolve_options(const ExperimentConfig& c) {
  EvolveOptions o;
  o.t_end = c.t_end;
  o.dt = c.dt;
  o.cfl = c.cfl;
  o.report_interval = c.report_every;
  o.scheme = c.scheme == "explicit" ? TimeScheme::explicit_midpoint : TimeScheme::exponential_midpoint;
  o.form = c.form == "variable" ? RhsForm::variable : RhsForm::constant;
  o.sobolev_k = c.sobolev_k;
  o.zeta_p = c.zeta_p;
  o.zeta_r = c.zeta_r;
  o.keep_snapshots = c.snapshots;
  return o;
}

// ---------------------------------------------------------------------------
// Gates and reports

/// One pass/fail check with the measured value and its threshold.
struct Gate {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

inline json to_json(const Gate& g) {
  return {{"name", g.name}, {"value", g.value}, {"limit", g.limit}, {"pass", g.pass}};
}

/// Fitted decay of one linear query against its closed-form target.
struct DecayReport {
  DecaySpec query;
  double p = 1.0;
  std::string profile = "gaussian";
  double t_min = 0.0, t_max = 0.0;
  int samples = 0;
  ExponentFit fit;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string curve;  ///< file holding the raw (t, norm) curve
  std::vector<DecayPoint> points;
};

inline json to_json(const DecayReport& r) {
  return {{"component", to_string(r.query.component)},
          {"ell", r.query.ell},
          {"p", r.p},
          {"q", std::isinf(r.query.q) ? json("inf") : json(r.query.q)},
          {"profile", r.profile},
          {"t_min", r.t_min},
          {"t_max", r.t_max},
          {"samples", r.samples},
          {"slope", r.fit.slope},
          {"uncertainty", r.fit.uncertainty},
          {"rms_residual", r.fit.rms_residual},
          {"power_law", r.fit.power_law},
          {"target", r.target},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"curve", r.curve}};
}

/// Computes the curve, fits its exponent over the whole window and compares
/// with the closed-form linear target.
inline DecayReport decay_report(const LinearCoefficients& coeffs, const DecaySpec& spec, double p,
                                const std::string& profile, double t_min, double t_max, int samples,
                                double tolerance) {
  DecayReport r;
  r.query = spec;
  r.p = p;
  r.profile = profile;
  r.t_min = t_min;
  r.t_max = t_max;
  r.samples = samples;
  r.tolerance = tolerance;
  LinearDecayQuery q{spec.ell, spec.q, spec.component, SpectralProfile{p, profile}};
  r.points = decay_curve(coeffs, q, log_times(t_min, t_max, samples));
  r.fit = fit_exponent(r.points, t_min, t_max);
  r.target = lemma_exponent(spec.component, spec.ell, p, spec.q);
  r.pass = std::abs(r.fit.slope - r.target) <= tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// Output helpers

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string() + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// Tracks every file the run writes so the manifest can list it.
class OutputDir {
public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }

  const std::filesystem::path& root() const noexcept { return root_; }

  void write_text(const std::string& rel, const std::string& text) {
    const auto path = prepare(rel);
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write " + path.string());
  }

  void write_json(const std::string& rel, const json& j) { write_text(rel, j.dump(2) + "\n"); }

  void write_fields(const std::string& rel, const std::vector<Field>& comps) { io::write(prepare(rel), comps); }

  const std::vector<std::string>& files() const noexcept { return files_; }

  json manifest_entries() const {
    json arr = json::array();
    for (const auto& rel : files_) {
      const auto path = root_ / rel;
      arr.push_back({{"path", rel},
                     {"bytes", static_cast<std::uint64_t>(std::filesystem::file_size(path))},
                     {"sha256", sha256_file(path)}});
    }
    return arr;
  }

private:
  std::filesystem::path prepare(const std::string& rel) {
    const auto path = root_ / rel;
    std::filesystem::create_directories(path.parent_path());
    if (std::find(files_.begin(), files_.end(), rel) == files_.end()) files_.push_back(rel);
    return path;
  }

  std::filesystem::path root_;
  std::vector<std::string> files_;
};

/// CSV header of the energy report table.
inline const char* kEnergyCsvHeader =
    "t,rho_hk,u_hk,grad_phi_l2,dissipation,energy_lhs,energy_ratio,weighted_energy,functional_half,"
    "functional_three_halves,bootstrap_L,bootstrap_M,bootstrap_N,bootstrap_H,bootstrap_J,bootstrap_K,mass,"
    "poisson_residual,min_total_density";

inline std::string energy_csv(const std::vector<EnergyReport>& reports) {
  std::string out = std::string(kEnergyCsvHeader) + "\n";
  for (const auto& r : reports) {
    const double row[] = {r.t,
                          r.rho_hk,
                          r.u_hk,
                          r.grad_phi_l2,
                          r.dissipation,
                          r.energy_lhs,
                          r.energy_ratio,
                          r.weighted_energy,
                          r.functional_half,
                          r.functional_three_halves,
                          r.bootstrap_L,
                          r.bootstrap_M,
                          r.bootstrap_N,
                          r.bootstrap_H,
                          r.bootstrap_J,
                          r.bootstrap_K,
                          r.mass,
                          r.poisson_residual,
                          r.min_total_density};
    bool first = true;
    for (double v : row) {
      if (!first) out += ",";
      out += format_double(v);
      first = false;
    }
    out += "\n";
  }
  return out;
}

inline std::string decay_csv(const std::vector<DecayPoint>& pts) {
  std::string out = "t,norm\n";
  for (const auto& p : pts) out += format_double(p.t) + "," + format_double(p.norm) + "\n";
  return out;
}

inline std::string decay_file_name(const DecaySpec& s) {
  char ell[32];
  std::snprintf(ell, sizeof ell, "%g", s.ell);
  return "decay/" + to_string(s.component) + "_ell" + ell + "_q" + (std::isinf(s.q) ? std::string("inf") : format_double(s.q)) +
         ".csv";
}

// ---------------------------------------------------------------------------
// Stage gates

/// Gates of a computed steady state: residual, pointwise bounds, mean.
inline std::vector<Gate> steady_gates(const SteadyReport& rep) {
  return {
      {"steady.residual_l2", rep.residual_l2, 1e-10, rep.residual_l2 < 1e-10},
      {"steady.bounds", rep.bounds_hold ? 0.0 : 1.0, 0.0, rep.bounds_hold},
      {"steady.mean_gap", rep.mean_gap, 1e-10, rep.mean_gap < 1e-10},
  };
}

/// Gates of an evolution: completion, mass, Poisson consistency, energy
/// inequality surrogate, bootstrap growth, monotone dissipation.
inline std::vector<Gate> evolve_gates(const EvolveResult& res, double energy_factor, double bootstrap_growth) {
  double mass = 0.0, poisson = 0.0, ratio = 0.0;
  bool monotone = true, nonnegative = true;
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    const EnergyReport& r = res.reports[i];
    mass = std::max(mass, std::abs(r.mass));
    poisson = std::max(poisson, r.poisson_residual);
    ratio = std::max(ratio, r.energy_ratio);
    if (i > 0 && r.dissipation < res.reports[i - 1].dissipation) monotone = false;
    for (double v : {r.rho_hk, r.u_hk, r.grad_phi_l2, r.dissipation, r.energy_lhs, r.bootstrap_N, r.bootstrap_K})
      if (!(v >= 0.0)) nonnegative = false;
  }
  double growth = 0.0;
  if (!res.reports.empty() && res.reports.front().bootstrap_N > 0.0)
    growth = res.reports.back().bootstrap_N / res.reports.front().bootstrap_N;
  return {
      {"evolve.completed", res.completed ? 0.0 : 1.0, 0.0, res.completed},
      {"evolve.mass", mass, 1e-12, mass < 1e-12},
      {"evolve.poisson_residual", poisson, 1e-10, poisson < 1e-10},
      {"evolve.energy_ratio", ratio, energy_factor, ratio <= energy_factor},
      {"evolve.bootstrap_growth", growth, bootstrap_growth, std::isfinite(growth) && growth < bootstrap_growth},
      {"evolve.dissipation_monotone", monotone ? 0.0 : 1.0, 0.0, monotone},
      {"evolve.nonnegative", nonnegative ? 0.0 : 1.0, 0.0, nonnegative},
  };
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineSummary {
  std::filesystem::path output;
  std::vector<Gate> gates;
  std::vector<DecayReport> decay;
  bool ok = false;
  std::string failure;  ///< first stage error, if any
};

/// Output directory of a run: NSP_OUTPUT_DIR overrides the configured one.
inline std::filesystem::path resolve_output(const ExperimentConfig& c) {
  if (const char* env = std::getenv("NSP_OUTPUT_DIR"); env && *env) return env;
  return c.output;
}

inline json fluid_json(const ExperimentConfig& c) {
  return {{"law", c.law}, {"mu", c.mu}, {"mu_prime", c.mu_prime}};
}

/// Runs the configured stages in order (steady, evolve, decay), writes every
/// artifact under the output directory and finishes with manifest.json.
/// A failing stage stops the run; the manifest still lists what was written
/// together with the failure cause.
inline PipelineSummary run_pipeline(const ExperimentConfig& config) {
  config.validate();
  PipelineSummary sum;
  sum.output = resolve_output(config);
  OutputDir out(sum.output);
  out.write_text("config.cfg", config.serialize());

  try {
    const Grid g = make_grid(config);
    FluidParams params = make_params(config);
    const DopingProfile doping = make_doping(config, g);
    params.rho_ref = doping.mean();
    params.validate(std::min(doping.inf(), params.rho_ref) * 0.5, doping.sup() * 1.5);

    std::optional<SteadyState> ss;
    if (config.has_stage("steady") || config.has_stage("evolve")) {
      ss = solve_steady(params, doping, make_steady_options(config));
      const SteadyReport rep = verify_steady(*ss, doping, params);
      out.write_fields("steady/rho.nspf", {ss->rho});
      out.write_fields("steady/phi.nspf", {ss->phi});
      out.write_json("steady/steady.json",
                     {{"grid", g.describe()},
                      {"fluid", fluid_json(config)},
                      {"doping", doping.descriptor()},
                      {"rho_ref", ss->rho_ref},
                      {"iterations", ss->iterations},
                      {"residual_l2", ss->residual_l2},
                      {"final_relaxation", ss->final_relaxation},
                      {"update_history", ss->update_history},
                      {"min_rho", rep.min_rho},
                      {"max_rho", rep.max_rho},
                      {"inf_b", rep.inf_b},
                      {"sup_b", rep.sup_b},
                      {"grad_rho_h2", rep.grad_rho_hk},
                      {"potential_residual_l2", rep.potential_residual_l2},
                      {"mean_gap", rep.mean_gap}});
      for (const Gate& gate : steady_gates(rep)) sum.gates.push_back(gate);
    }

    if (config.has_stage("evolve")) {
      const PerturbationState init = make_initial(config, g);
      const EvolveResult res = evolve(init, *ss, params, make_evolve_options(config));
      out.write_text("evolve/energy.csv", energy_csv(res.reports));
      for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        const PerturbationState& s = res.snapshots[i];
        std::vector<Field> comps{s.rho};
        for (const Field& c : s.u) comps.push_back(c);
        comps.push_back(s.phi);
        char name[64];
        std::snprintf(name, sizeof name, "evolve/snapshots/state_%05zu.nspf", i);
        out.write_fields(name, comps);
      }
      const std::vector<Gate> gates = evolve_gates(res, config.energy_factor, config.bootstrap_growth);
      json jg = json::array();
      for (const Gate& gate : gates) jg.push_back(to_json(gate));
      out.write_json("evolve/evolve.json", {{"dt", res.dt},
                                            {"steps", res.steps},
                                            {"completed", res.completed},
                                            {"failure", res.failure},
                                            {"k0", res.k0},
                                            {"zeta", res.zeta},
                                            {"max_weighted_increase", res.max_weighted_increase},
                                            {"final_bootstrap_N", res.reports.empty() ? 0.0 : res.reports.back().bootstrap_N},
                                            {"calibrated", "energy_factor is an artifact calibration, not a derived constant"},
                                            {"gates", jg}});
      for (const Gate& gate : gates) sum.gates.push_back(gate);
      if (!res.completed) throw Error("evolution stopped early: " + res.failure);
    }

    if (config.has_stage("decay")) {
      const LinearCoefficients coeffs = LinearCoefficients::from(params);
      json reports = json::array();
      for (const DecaySpec& spec : config.queries) {
        DecayReport r = decay_report(coeffs, spec, config.decay_p, config.decay_profile, config.decay_t_min,
                                     config.decay_t_max, config.decay_samples, config.decay_tolerance);
        r.curve = decay_file_name(spec);
        out.write_text(r.curve, decay_csv(r.points));
        reports.push_back(to_json(r));
        sum.gates.push_back({"decay." + to_string(spec.component) + ".ell=" + format_double(spec.ell),
                             std::abs(r.fit.slope - r.target), r.tolerance, r.pass});
        sum.decay.push_back(std::move(r));
      }
      out.write_json("decay/decay.json", {{"rho_ref", coeffs.rho_ref},
                                          {"h_prime", coeffs.h_prime},
                                          {"nu", coeffs.nu()},
                                          {"reports", reports}});
    }
  } catch (const std::exception& e) {
    sum.failure = e.what();
  }

  sum.ok = sum.failure.empty();
  json gates = json::array();
  for (const Gate& g : sum.gates) {
    gates.push_back(to_json(g));
    sum.ok = sum.ok && g.pass;
  }
  json manifest = {{"status", sum.failure.empty() ? "complete" : "failed"},
                   {"failure", sum.failure},
                   {"all_gates_pass", sum.ok},
                   {"gates", gates},
                   {"files", out.manifest_entries()}};
  out.write_text("manifest.json", manifest.dump(2) + "\n");
  return sum;
}

}  // namespace nsp
