#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsp/pipeline.hpp"

using namespace nsp;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nsp_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig small_run(const fs::path& out) {
  ExperimentConfig c;
  c.dim = 2;
  c.n = 16;
  c.output = out.string();
  c.t_end = 0.2;
  c.report_every = 0.1;
  c.initial_band = 3;
  return c;
}

}  // namespace

TEST_CASE("config serialization round-trips", "[config]") {
  ExperimentConfig c;
  c.stages = {"steady", "evolve", "decay"};
  c.seed = 42;
  c.length = 0.1 + 0.2;  // not exactly representable in short decimal
  c.mu = 1.0 / 3.0;
  c.doping = "cosine";
  c.doping_center = {1.0, 2.5, 3.141592653589793};
  c.doping_mode = {2, -1, 0};
  c.t_end = 4.0;
  c.snapshots = true;
  c.queries = {{Component::density, 0.5, 2.0}, {Component::velocity, 0.0, std::numeric_limits<double>::infinity()}};
  const ExperimentConfig back = ExperimentConfig::parse(c.serialize());
  CHECK(back == c);
  CHECK(back.serialize() == c.serialize());
  CHECK(ExperimentConfig::parse(ExperimentConfig{}.serialize()) == ExperimentConfig{});
}

TEST_CASE("config parser reports unknown and duplicate keys", "[config]") {
  CHECK_THROWS_WITH(ExperimentConfig::parse("[grid]\nsize = 4\n"), ContainsSubstring("line 2") && ContainsSubstring("unknown key"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[grid]\nn = 16\nn = 32\n"), ContainsSubstring("duplicate key"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[grid]\nn = sixteen\n"), ContainsSubstring("grid.n"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[grid]\nn = 24\n"), ContainsSubstring("power of two"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[grid\n"), ContainsSubstring("section header"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[run]\nstages = decay\n"), ContainsSubstring("decay.query"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[evolve]\nform = variable\n"), ContainsSubstring("form = constant"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[fluid]\nmu = 1\nmu_prime = -1\n"), ContainsSubstring("mu_prime"));
  CHECK_THROWS_WITH(ExperimentConfig::parse("[fluid]\nlaw = steam:1\n"), ContainsSubstring("fluid.law"));
  const ExperimentConfig ok = ExperimentConfig::parse("# comment\n[grid]\nn = 16   # inline\n");
  CHECK(ok.n == 16);
}

TEST_CASE("command-line presets", "[config]") {
  ExperimentConfig c;
  apply_doping_preset(c, "gaussian-bump(0.2, [1, 2, 3], 0.5)");
  CHECK(c.doping == "gaussian-bump");
  CHECK(c.doping_amplitude == 0.2);
  CHECK(c.doping_center == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(c.doping_sigma == 0.5);
  apply_doping_preset(c, "gaussian-bump(0.1, auto, 1)");
  CHECK(c.doping_center.empty());
  apply_doping_preset(c, "cosine(0.3, [2, 0, 1])");
  CHECK(c.doping_mode == std::vector<int>{2, 0, 1});
  apply_doping_preset(c, "flat(1.5)");
  CHECK(c.doping == "flat");
  CHECK(c.doping_base == 1.5);
  apply_initial_preset(c, "random-smooth(7, 1e-4, 2)");
  CHECK(c.initial == "random-smooth");
  CHECK(c.seed == 7);
  CHECK(c.initial_amplitude == 1e-4);
  CHECK(c.initial_band == 2);
  apply_initial_preset(c, "mode([1, 1], 0.01)");
  CHECK(c.initial_mode == std::vector<int>{1, 1, 0});
  CHECK_THROWS_AS(apply_doping_preset(c, "cosine(0.3"), DomainError);
  CHECK_THROWS_AS(apply_doping_preset(c, "wave(1)"), DomainError);
  CHECK_THROWS_AS(apply_initial_preset(c, "zero(1)"), DomainError);
}

TEST_CASE("flat doping with zero data gives an all-zero run", "[pipeline]") {
  const fs::path out = scratch("zero");
  ExperimentConfig c = small_run(out);
  c.doping = "flat";
  c.initial = "zero";
  const PipelineSummary s = run_pipeline(c);
  CHECK(s.failure.empty());
  CHECK(s.ok);
  const std::string csv = slurp(out / "evolve" / "energy.csv");
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == kEnergyCsvHeader);
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    std::istringstream cells(row);
    std::string cell;
    std::getline(cells, cell, ',');  // t
    for (int col = 1; col <= 6; ++col) {
      std::getline(cells, cell, ',');
      CHECK(std::stod(cell) == 0.0);
    }
  }
  CHECK(rows == 3);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest["all_gates_pass"] == true);
  const auto steady = io::read(out / "steady" / "rho.nspf");
  REQUIRE(steady.size() == 1);
  CHECK_THAT(steady[0].min(), WithinAbs(1.0, 1e-15));
  fs::remove_all(out);
}

TEST_CASE("manifest hashes describe the written files", "[pipeline]") {
  const fs::path out = scratch("manifest");
  ExperimentConfig c = small_run(out);
  c.snapshots = true;
  REQUIRE(run_pipeline(c).ok);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  const std::vector<std::string> expected{"config.cfg",        "steady/rho.nspf",  "steady/phi.nspf",
                                          "steady/steady.json", "evolve/energy.csv", "evolve/evolve.json",
                                          "evolve/snapshots/state_00000.nspf", "evolve/snapshots/state_00002.nspf"};
  std::vector<std::string> listed;
  for (const auto& f : manifest["files"]) {
    const std::string rel = f["path"].get<std::string>();
    listed.push_back(rel);
    CHECK(f["bytes"].get<std::uintmax_t>() == fs::file_size(out / rel));
    CHECK(f["sha256"].get<std::string>() == sha256_file(out / rel));
  }
  for (const auto& e : expected) CHECK(std::find(listed.begin(), listed.end(), e) != listed.end());
  // the configuration written by the run reproduces the run
  CHECK(ExperimentConfig::load((out / "config.cfg").string()) == c);
  fs::remove_all(out);
}

TEST_CASE("the same seed reproduces identical artifacts", "[pipeline][property]") {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  ExperimentConfig ca = small_run(a), cb = small_run(b);
  ca.seed = cb.seed = 99;
  REQUIRE(run_pipeline(ca).ok);
  REQUIRE(run_pipeline(cb).ok);
  const json ma = json::parse(slurp(a / "manifest.json")), mb = json::parse(slurp(b / "manifest.json"));
  REQUIRE(ma["files"].size() == mb["files"].size());
  for (std::size_t i = 0; i < ma["files"].size(); ++i) {
    if (ma["files"][i]["path"] == "config.cfg") continue;  // holds the output path
    CHECK(ma["files"][i]["sha256"] == mb["files"][i]["sha256"]);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("output directory can be overridden from the environment", "[pipeline]") {
  const fs::path out = scratch("env");
  ExperimentConfig c = small_run("never_written");
  c.stages = {"steady"};
  ::setenv("NSP_OUTPUT_DIR", out.string().c_str(), 1);
  const PipelineSummary s = run_pipeline(c);
  ::unsetenv("NSP_OUTPUT_DIR");
  CHECK(s.output == out);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK_FALSE(fs::exists("never_written"));
  fs::remove_all(out);
}

TEST_CASE("shipped linear decay configuration meets its targets", "[pipeline][decay]") {
  ExperimentConfig c = ExperimentConfig::load(std::string(NSP_SOURCE_DIR) + "/configs/linear_decay_p1.cfg");
  const fs::path out = scratch("decay");
  c.output = out.string();
  const PipelineSummary s = run_pipeline(c);
  REQUIRE(s.decay.size() == 2);
  CHECK(s.decay[0].target == -1.25);
  CHECK(s.decay[1].target == -0.75);
  CHECK_THAT(s.decay[0].fit.slope, WithinAbs(-1.25, 0.05));
  CHECK_THAT(s.decay[1].fit.slope, WithinAbs(-0.75, 0.05));
  CHECK(s.ok);
  CHECK(fs::exists(out / "decay" / "density_ell0_q2.csv"));
  CHECK(fs::exists(out / "decay" / "velocity_ell0_q2.csv"));
  fs::remove_all(out);
}

TEST_CASE("a failing stage is recorded in the manifest", "[pipeline]") {
  const fs::path out = scratch("fail");
  ExperimentConfig c = small_run(out);
  c.doping = "file";
  c.doping_path = (out / "missing.nspf").string();
  const PipelineSummary s = run_pipeline(c);
  CHECK_FALSE(s.ok);
  CHECK_FALSE(s.failure.empty());
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["all_gates_pass"] == false);
  fs::remove_all(out);
}

TEST_CASE("command-line front end", "[cli]") {
  const char* cli = std::getenv("NSP_CLI");
  if (!cli) SKIP("NSP_CLI is not set");
  const fs::path out = scratch("cli");
  fs::create_directories(out);
  const std::string cmd = std::string(cli) + " linear-decay --component velocity --samples 30 --out " + out.string() +
                          " > " + (out / "stdout.json").string();
  CHECK(std::system(cmd.c_str()) == 0);
  const json j = json::parse(slurp(out / "linear_decay.json"));
  CHECK(j["pass"] == true);
  CHECK(fs::exists(out / "linear_decay.csv"));

  const std::string fit = std::string(cli) + " fit " + (out / "linear_decay.csv").string() +
                          " --target -0.75 --tolerance 0.05 > /dev/null";
  CHECK(std::system(fit.c_str()) == 0);
  const std::string bad = std::string(cli) + " fit " + (out / "linear_decay.csv").string() +
                          " --target -2 --tolerance 0.05 > /dev/null";
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == 1);
  const std::string broken = std::string(cli) + " steady --law steam:1 --out " + out.string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(broken.c_str())) == 2);
  fs::remove_all(out);
}
