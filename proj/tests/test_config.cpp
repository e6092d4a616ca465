#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blochpert/config.hpp"

using namespace blochpert;

namespace {

std::string minimal_config() {
  return R"({
    "lattice": {"basis": [[6.283185307179586, 0.0], [0.0, 6.283185307179586]]},
    "potential": {"entries": [{"gamma": [1, 0], "re": 0.05},
                              {"gamma": [0, 1], "re": 0.05}]},
    "rho": 15.0,
    "seed": 7
  })";
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config parses with defaults filled") {
  ExperimentConfig cfg = parse_config(minimal_config());
  CHECK(cfg.rho == 15.0);
  CHECK(cfg.seed == 7);
  CHECK(cfg.mode == ParamMode::Paper);
  CHECK(cfg.format == "json");
  AsymptoticParams pr = cfg.params();
  CHECK(pr.c4 == 1.0);
  CHECK(pr.kappa == Catch::Approx(13.0));
  // conjugates were auto-completed with a note
  CHECK(cfg.potential.size() == 4);
  CHECK(cfg.notes.size() == 2);
  FourierPotential q = cfg.fourier_potential();
  CHECK(std::abs(q.value({-1, 0}) - cplx(0.05, 0)) < 1e-15);
}

TEST_CASE("inconsistent conjugate pair is rejected") {
  std::string text = R"({
    "lattice": {"basis": [[6.283185307179586, 0.0], [0.0, 6.283185307179586]]},
    "potential": {"entries": [{"gamma": [1, 0], "re": 0.05, "im": 0.01},
                              {"gamma": [-1, 0], "re": 0.05, "im": 0.01}]}
  })";
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("singular lattice is rejected with the rows echoed") {
  std::string text = R"({"lattice": {"basis": [[1.0, 2.0], [2.0, 4.0]]}})";
  try {
    parse_config(text);
    FAIL("expected InvalidLattice");
  } catch (const InvalidLattice& e) {
    std::string msg = e.what();
    CHECK(msg.find("(1,2)") != std::string::npos);
    CHECK(msg.find("(2,4)") != std::string::npos);
  }
}

TEST_CASE("parse errors carry line positions") {
  try {
    parse_config("{\n  \"lattice\": [,]\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
  }
}

TEST_CASE("serialize-parse round trip is the identity") {
  ExperimentConfig cfg = parse_config(minimal_config());
  cfg.overrides.thresholds = {0.5, 2.0};
  cfg.overrides.dir_radius = 3.3;
  cfg.oracle_cutoff = 17.0;
  cfg.out_path = "artifact";
  json j1 = serialize_config(cfg);
  ExperimentConfig back = parse_config(j1.dump());
  json j2 = serialize_config(back);
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("manifest hashes the canonical config") {
  ExperimentConfig cfg = parse_config(minimal_config());
  json m1 = make_manifest(cfg, "measure", {"-n", "100"});
  json m2 = make_manifest(cfg, "measure", {"-n", "100"});
  CHECK(m1["config_hash"] == m2["config_hash"]);
  CHECK(m1["command"] == "measure");
  CHECK(m1.contains("version"));
  cfg.seed = 8;
  json m3 = make_manifest(cfg, "measure", {});
  CHECK(m1["config_hash"] != m3["config_hash"]);
}

#ifdef BLOCHPERT_BIN
TEST_CASE("CLI artifacts are byte-identical under a fixed seed") {
  std::string dir = "cli_artifacts";
  std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
  {
    std::ofstream f(dir + "/cfg.json");
    f << R"({
      "lattice": {"basis": [[6.283185307179586, 0.0], [0.0, 6.283185307179586]]},
      "potential": {"entries": [{"gamma": [1, 0], "re": 0.05},
                                {"gamma": [0, 1], "re": 0.05}]},
      "rho": 15.0,
      "overrides": {"thresholds": [0.5, 2.0], "dir_radius": 3.3,
                     "known_order": 3, "block_b_radius": 2.5, "block_a_radius": 2.5}
    })";
  }
  std::string bin = BLOCHPERT_BIN;
  auto run = [&](const std::string& out) {
    std::string cmd = bin + " --config " + dir + "/cfg.json --seed 7 --out " + dir +
                      "/" + out + " measure --region U -n 500 > /dev/null";
    return std::system(cmd.c_str());
  };
  std::string cfg_before = slurp(dir + "/cfg.json");
  REQUIRE(run("a") == 0);
  REQUIRE(run("b") == 0);
  CHECK(slurp(dir + "/a.json") == slurp(dir + "/b.json"));
  CHECK(!slurp(dir + "/a.json").empty());
  CHECK(slurp(dir + "/cfg.json") == cfg_before);  // commands never touch the config
  // selfcheck exercises the parameter report path
  std::string cmd = bin + " --config " + dir + "/cfg.json --out " + dir +
                    "/sc selfcheck > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(!slurp(dir + "/sc.json").empty());
  // domain errors exit with code 2
  std::string bad = bin + " --config " + dir + "/missing.json --out " + dir +
                    "/x selfcheck 2> /dev/null";
  int rc = std::system(bad.c_str());
  CHECK(WEXITSTATUS(rc) == 2);
}
#endif
