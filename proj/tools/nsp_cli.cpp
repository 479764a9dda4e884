// nsp: command-line front end of the Navier-Stokes-Poisson laboratory.
//
//   nsp steady       solve for the steady state of a doping profile
//   nsp evolve       steady state + nonlinear perturbation evolution
//   nsp linear-decay linear decay curve of one norm and its fitted exponent
//   nsp fit          fit a power law to a (t, value) CSV
//   nsp run          full pipeline from a configuration file
//   nsp verify       acceptance suite
//
// Exit status is 0 only when every pass/fail gate of the command passes.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nsp/nsp.hpp"

namespace {

using nsp::ExperimentConfig;
using nsp::json;

/// Options shared by the steady and evolve subcommands; unset ones keep the
/// values of the configuration file (or the built-in defaults).
struct SetupFlags {
  std::string config;
  std::optional<int> dim, n;
  std::optional<double> length, mu, mu_prime;
  std::optional<std::string> law, doping, out;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "experiment configuration file")->check(CLI::ExistingFile);
    app->add_option("--dim", dim, "spatial dimension (1, 2, 3)");
    app->add_option("--n", n, "grid points per axis (power of two)");
    app->add_option("--length", length, "box side length");
    app->add_option("--law", law, "pressure law, e.g. gamma:2 or poly:0,1,0.5");
    app->add_option("--mu", mu, "shear viscosity");
    app->add_option("--mu-prime", mu_prime, "second viscosity");
    app->add_option("--doping", doping, "flat, gaussian-bump(amplitude, center|auto, sigma), cosine(amplitude, [m]), file(path)");
    app->add_option("--out", out, "output directory");
  }

  ExperimentConfig build() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig{} : ExperimentConfig::load(config);
    if (dim) c.dim = *dim;
    if (n) c.n = *n;
    if (length) c.length = *length;
    if (law) c.law = *law;
    if (mu) c.mu = *mu;
    if (mu_prime) c.mu_prime = *mu_prime;
    if (doping) nsp::apply_doping_preset(c, *doping);
    if (out) c.output = *out;
    return c;
  }
};

int report(const nsp::PipelineSummary& s) {
  for (const auto& g : s.gates)
    std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << " = " << nsp::format_double(g.value) << " (limit "
              << nsp::format_double(g.limit) << ")\n";
  if (!s.failure.empty()) std::cout << "FAILED: " << s.failure << "\n";
  std::cout << "artifacts: " << (s.output / "manifest.json").string() << "\n";
  return s.ok ? 0 : 1;
}

double parse_q(const std::string& q) {
  if (q == "inf" || q == "infinity") return std::numeric_limits<double>::infinity();
  return std::stod(q);
}

std::vector<nsp::DecayPoint> read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nsp::Error("cannot open " + path);
  std::vector<nsp::DecayPoint> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '.' || line[0] == '-'))
      continue;  // header or blank
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw nsp::Error("malformed CSV row: " + line);
    pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return pts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressible Navier-Stokes-Poisson numerical laboratory"};
  app.require_subcommand(1);

  // steady ------------------------------------------------------------------
  SetupFlags steady_flags;
  std::string steady_method;
  auto* steady = app.add_subcommand("steady", "solve the steady state of a doping profile");
  steady_flags.attach(steady);
  steady->add_option("--method", steady_method, "picard or newton");

  // evolve ------------------------------------------------------------------
  SetupFlags evolve_flags;
  std::optional<std::string> initial, scheme, form;
  std::optional<double> dt, t_end, report_every;
  bool snapshots = false;
  auto* evolve = app.add_subcommand("evolve", "evolve a perturbation around the steady state");
  evolve_flags.attach(evolve);
  evolve->add_option("--initial", initial, "zero, mode([m1,m2,m3], amplitude), random-smooth(seed, amplitude, band)");
  evolve->add_option("--dt", dt, "time step (0: stability heuristic)");
  evolve->add_option("--t-end", t_end, "final time");
  evolve->add_option("--report-every", report_every, "report cadence in time units");
  evolve->add_option("--scheme", scheme, "exponential or explicit");
  evolve->add_option("--form", form, "constant or variable right-hand side");
  evolve->add_flag("--snapshots", snapshots, "write a state snapshot at every report");

  // linear-decay ------------------------------------------------------------
  double ld_p = 1.0, ld_ell = 0.0, ld_tmin = 1e2, ld_tmax = 1e4, ld_tol = 0.05;
  double ld_rho = 1.0, ld_mu = 1.0, ld_mu_prime = 0.0;
  std::string ld_q = "2", ld_component = "density", ld_profile = "gaussian", ld_law = "gamma:2", ld_out = ".";
  int ld_samples = 60;
  auto* linear = app.add_subcommand("linear-decay", "decay curve of the linearized flow and its exponent");
  linear->add_option("--p", ld_p, "integrability index of the data, 1 <= p < 2");
  linear->add_option("--q", ld_q, "target norm index: 2 or inf");
  linear->add_option("--ell", ld_ell, "derivative order");
  linear->add_option("--component", ld_component, "density, velocity, velocity-compressible, velocity-incompressible");
  linear->add_option("--t-min", ld_tmin, "first time");
  linear->add_option("--t-max", ld_tmax, "last time");
  linear->add_option("--samples", ld_samples, "log-spaced sample times");
  linear->add_option("--profile", ld_profile, "gaussian, density, compressible, incompressible");
  linear->add_option("--law", ld_law, "pressure law");
  linear->add_option("--rho-ref", ld_rho, "reference density");
  linear->add_option("--mu", ld_mu, "shear viscosity");
  linear->add_option("--mu-prime", ld_mu_prime, "second viscosity");
  linear->add_option("--tolerance", ld_tol, "pass band around the target exponent");
  linear->add_option("--out", ld_out, "output directory for linear_decay.csv and linear_decay.json");

  // fit ---------------------------------------------------------------------
  std::string fit_csv;
  std::optional<double> fit_begin, fit_end, fit_target;
  double fit_tol = 0.05;
  auto* fit = app.add_subcommand("fit", "least-squares power-law fit of a (t, value) CSV");
  fit->add_option("csv", fit_csv, "CSV with t in the first column and the value in the second")->required();
  fit->add_option("--t-begin", fit_begin, "start of the fit window");
  fit->add_option("--t-end", fit_end, "end of the fit window");
  fit->add_option("--target", fit_target, "expected exponent; enables the pass/fail gate");
  fit->add_option("--tolerance", fit_tol, "pass band around the target");

  // run ---------------------------------------------------------------------
  std::string run_config;
  auto* run = app.add_subcommand("run", "run the full pipeline of a configuration file");
  run->add_option("config", run_config, "experiment configuration file")->required()->check(CLI::ExistingFile);

  // verify ------------------------------------------------------------------
  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite, one line per criterion");
  verify->add_option("--only", only, "criterion numbers to run (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (steady->parsed()) {
      ExperimentConfig c = steady_flags.build();
      if (!steady_method.empty()) c.steady_method = steady_method;
      c.stages = {"steady"};
      return report(nsp::run_pipeline(c));
    }
    if (evolve->parsed()) {
      ExperimentConfig c = evolve_flags.build();
      if (initial) nsp::apply_initial_preset(c, *initial);
      if (dt) c.dt = *dt;
      if (t_end) c.t_end = *t_end;
      if (report_every) c.report_every = *report_every;
      if (scheme) c.scheme = *scheme;
      if (form) c.form = *form;
      if (snapshots) c.snapshots = true;
      c.stages = {"steady", "evolve"};
      return report(nsp::run_pipeline(c));
    }
    if (linear->parsed()) {
      nsp::FluidParams params;
      params.law = nsp::parse_pressure_law(ld_law);
      params.mu = ld_mu;
      params.mu_prime = ld_mu_prime;
      params.rho_ref = ld_rho;
      const nsp::DecaySpec spec{nsp::parse_component(ld_component), ld_ell, parse_q(ld_q)};
      nsp::DecayReport r = nsp::decay_report(nsp::LinearCoefficients::from(params), spec, ld_p, ld_profile, ld_tmin,
                                             ld_tmax, ld_samples, ld_tol);
      nsp::OutputDir out(ld_out);
      r.curve = "linear_decay.csv";
      out.write_text(r.curve, nsp::decay_csv(r.points));
      const json summary = nsp::to_json(r);
      out.write_json("linear_decay.json", summary);
      std::cout << summary.dump(2) << "\n";
      return r.pass ? 0 : 1;
    }
    if (fit->parsed()) {
      const auto pts = read_curve(fit_csv);
      if (pts.empty()) throw nsp::Error("no data rows in " + fit_csv);
      const nsp::ExponentFit f =
          nsp::fit_exponent(pts, fit_begin.value_or(pts.front().t), fit_end.value_or(pts.back().t));
      json j = {{"slope", f.slope},       {"uncertainty", f.uncertainty}, {"intercept", f.intercept},
                {"rms_residual", f.rms_residual}, {"samples", f.samples},   {"power_law", f.power_law}};
      bool ok = true;
      if (fit_target) {
        ok = std::abs(f.slope - *fit_target) <= fit_tol;
        j["target"] = *fit_target;
        j["tolerance"] = fit_tol;
        j["pass"] = ok;
      }
      std::cout << j.dump(2) << "\n";
      return ok ? 0 : 1;
    }
    if (run->parsed()) return report(nsp::run_pipeline(ExperimentConfig::load(run_config)));
    if (verify->parsed()) {
      const auto results = nsp::acceptance::run_all(&std::cout, only);
      bool ok = !results.empty();
      for (const auto& r : results) ok = ok && r.pass();
      std::cout << (ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
