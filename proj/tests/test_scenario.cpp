#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sweepsim/commands.hpp"
#include "sweepsim/csv.hpp"
#include "sweepsim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sweepsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("sweepsim_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("scenario: builtins parse, build, and enumerate") {
  REQUIRE(builtin_scenario_names().size() == 4);
  for (const auto& name : builtin_scenario_names()) {
    CHECK(is_builtin_scenario(name));
    Scenario s = builtin_scenario(name);
    CHECK(s.name == name);
    if (!s.has_sampler()) {
      auto problem = s.build_problem();
      CHECK(problem.family.dim() == 2);
      CHECK(s.oracle_fn().has_value());
    }
  }
  CHECK_FALSE(is_builtin_scenario("example9"));
  CHECK_THROWS_AS(builtin_scenario("example9"), ScenarioError);
}

TEST_CASE("scenario: round-trip is field-identical") {
  for (const auto& name : builtin_scenario_names()) {
    Scenario s = builtin_scenario(name);
    json out = scenario_to_json(s);
    Scenario again = scenario_from_json(out);
    CHECK(scenario_to_json(again) == out);
  }
  // A fully decorated custom scenario round-trips too.
  json j = scenario_to_json(builtin_scenario("example3"));
  j["outputs"] = {"trajectory", "residuals"};
  j["family"]["rho"] = 2.5;
  Scenario s = scenario_from_json(j);
  CHECK(scenario_to_json(s) == j);
}

TEST_CASE("scenario: unknown keys are rejected at every level") {
  json j = scenario_to_json(builtin_scenario("example1"));
  json bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
  bad = j;
  bad["family"]["rr"] = 1;
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
  bad = j;
  bad["family"]["constraints"][0]["typo"] = 1;
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
  bad = j;
  bad["solver"]["steps"] = 10;
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
  bad = j;
  bad["x0"] = {{"point", {0.0, 0.0}}, {"sampler", {{"count", 3}}}};
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
  bad = j;
  bad["oracle"] = "example7";
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
}

TEST_CASE("scenario: rho accepts numbers and \"inf\" only") {
  json j = scenario_to_json(builtin_scenario("example1"));
  j["family"]["rho"] = "infinite";
  CHECK_THROWS_AS(scenario_from_json(j), ScenarioError);
  j["family"]["rho"] = 1.25;
  CHECK(scenario_from_json(j).family.rho == doctest::Approx(1.25));
  j["family"]["rho"] = "inf";
  CHECK(std::isinf(scenario_from_json(j).family.rho));
}

TEST_CASE("format_double: shortest round-trip representation") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("cmd_solve: example1 writes the (t, 0, t) trajectory") {
  auto dir = temp_dir("solve1");
  std::ostringstream out, err;
  CommandOverrides ov;
  ov.n_steps = 100;
  const int code = cmd_solve("example1", dir.string(), ov, out, err);
  CHECK(code == kExitOk);
  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.rfind("t,x1,x2\n", 0) == 0);
  CHECK(csv.find("\n0.03,0,0.03\n") != std::string::npos);
  CHECK(csv.find("\n3,0,3\n") != std::string::npos);
  CHECK(fs::exists(dir / "residuals.csv"));
  CHECK(fs::exists(dir / "metadata.json"));
  const json meta = json::parse(slurp(dir / "metadata.json"));
  CHECK(meta["endpoint"][0].get<double>() == doctest::Approx(0.0));
  CHECK(meta["endpoint"][1].get<double>() == doctest::Approx(3.0));
  CHECK(meta["flagged_steps"].empty());
}

TEST_CASE("cmd_solve: byte-identical outputs for identical scenario and seed") {
  auto dir_a = temp_dir("det_a");
  auto dir_b = temp_dir("det_b");
  std::ostringstream out, err;
  CommandOverrides ov;
  ov.n_steps = 200;
  REQUIRE(cmd_solve("example3", dir_a.string(), ov, out, err) == kExitOk);
  REQUIRE(cmd_solve("example3", dir_b.string(), ov, out, err) == kExitOk);
  CHECK(slurp(dir_a / "trajectory.csv") == slurp(dir_b / "trajectory.csv"));
  CHECK(slurp(dir_a / "residuals.csv") == slurp(dir_b / "residuals.csv"));
}

TEST_CASE("cmd_solve: infeasible x0 beyond healing exits 2 naming the constraint") {
  json j = scenario_to_json(builtin_scenario("example1"));
  j["name"] = "bad-start";
  j["x0"] = {{"point", {0.0, -5.0}}};
  j["family"]["rho"] = 0.5;  // healing radius min(rho, mu/gamma) = 0.5 < 5
  j["family"]["gamma"] = 1.0;
  auto dir = temp_dir("badstart");
  const fs::path file = dir / "scenario.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out, err;
  const int code = cmd_solve(file.string(), dir.string(), {}, out, err);
  CHECK(code == kExitValidation);
  CHECK(err.str().find("constraint 1") != std::string::npos);
}

TEST_CASE("cmd_solve: unreadable scenario exits 2") {
  std::ostringstream out, err;
  CHECK(cmd_solve("nonexistent.json", temp_dir("none").string(), {}, out, err) ==
        kExitValidation);
}

TEST_CASE("cmd_certify: builtins pass, shell scenario refutes with exit 4") {
  std::ostringstream out, err;
  CommandOverrides ov;
  ov.samples = 1500;
  CHECK(cmd_certify("example1", ov, out, err) == kExitOk);
  CHECK(out.str().find("no violation found") != std::string::npos);
  CHECK(out.str().find("r = min(rho, mu/gamma)") != std::string::npos);

  json j;
  j["name"] = "shell";
  j["family"] = {{"dim", 2},
                 {"horizon", 1.0},
                 {"rho", 0.5},
                 {"gamma", 1.0},
                 {"box", {{"lo", {-3.0, -3.0}}, {"hi", {3.0, 3.0}}}},
                 {"constraints",
                  {{{"kind", "ball_complement"}, {"center", {0.0, 0.0}}, {"radius", 1.0}}}}};
  j["perturbation"] = {{"kind", "zero"}};
  j["x0"] = {{"point", {1.5, 0.0}}};
  auto dir = temp_dir("shell");
  const fs::path file = dir / "shell.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out2, err2;
  CHECK(cmd_certify(file.string(), ov, out2, err2) == kExitRefuted);
  CHECK(out2.str().find("violation [A3]") != std::string::npos);
}

TEST_CASE("cmd_certify: static convex scenario reports L1 = 0") {
  json j;
  j["name"] = "static-box";
  j["family"] = {{"dim", 2},
                 {"horizon", 1.0},
                 {"rho", "inf"},
                 {"gamma", 1e-6},
                 {"box", {{"lo", {-1.0, -1.0}}, {"hi", {2.0, 2.0}}}},
                 {"constraints",
                  {{{"kind", "affine"}, {"a", {1.0, 0.0}}, {"time_slope", 0.0}, {"offset", -1.0}},
                   {{"kind", "affine"}, {"a", {-1.0, 0.0}}, {"time_slope", 0.0}, {"offset", 0.0}},
                   {{"kind", "affine"}, {"a", {0.0, 1.0}}, {"time_slope", 0.0}, {"offset", -1.0}},
                   {{"kind", "affine"}, {"a", {0.0, -1.0}}, {"time_slope", 0.0}, {"offset", 0.0}}}}};
  j["perturbation"] = {{"kind", "zero"}};
  j["x0"] = {{"point", {0.5, 0.5}}};
  auto dir = temp_dir("staticbox");
  const fs::path file = dir / "static.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out, err;
  CommandOverrides ov;
  ov.samples = 800;
  CHECK(cmd_certify(file.string(), ov, out, err) == kExitOk);
  CHECK(out.str().find("L1 = 0") != std::string::npos);
}

TEST_CASE("cmd_converge: validation paths") {
  std::ostringstream out, err;
  // fewer than 3 grid sizes
  CHECK(cmd_converge("example3", {100}, temp_dir("cv1").string(), {}, out, err) ==
        kExitValidation);
  // no registered oracle
  json j = scenario_to_json(builtin_scenario("example1"));
  j["oracle"] = "none";
  auto dir = temp_dir("cv2");
  const fs::path file = dir / "no_oracle.json";
  std::ofstream(file) << j.dump(2);
  CHECK(cmd_converge(file.string(), {100, 200, 400}, dir.string(), {}, out, err) ==
        kExitValidation);
}

TEST_CASE("cmd_converge: exact scheme reports the floor notice and exits 0") {
  auto dir = temp_dir("cv3");
  std::ostringstream out, err;
  const int code = cmd_converge("example1", {100, 200, 400}, dir.string(), {}, out, err);
  CHECK(code == kExitOk);
  CHECK(out.str().find("floor") != std::string::npos);
  CHECK(fs::exists(dir / "convergence.csv"));
}

TEST_CASE("cmd_reach: fixed-x0 scenario requires --samples") {
  std::ostringstream out, err;
  CHECK(cmd_reach("example1", temp_dir("r1").string(), {}, out, err) == kExitValidation);
  CommandOverrides ov;
  ov.samples = 5;
  ov.n_steps = 150;
  auto dir = temp_dir("r2");
  std::ostringstream out2, err2;
  CHECK(cmd_reach("example1", dir.string(), ov, out2, err2) == kExitOk);
  CHECK(fs::exists(dir / "endpoints.csv"));
}

TEST_CASE("cmd_solve: outputs list filters the written artifacts") {
  json j = scenario_to_json(builtin_scenario("example1"));
  j["name"] = "traj-only";
  j["outputs"] = {"trajectory"};
  j["solver"]["n_steps"] = 50;
  auto dir = temp_dir("outputs");
  const fs::path file = dir / "s.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out, err;
  REQUIRE(cmd_solve(file.string(), dir.string(), {}, out, err) == kExitOk);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK_FALSE(fs::exists(dir / "residuals.csv"));
  CHECK_FALSE(fs::exists(dir / "metadata.json"));

  json bad = j;
  bad["outputs"] = {"plots"};
  CHECK_THROWS_AS(scenario_from_json(bad), ScenarioError);
}

TEST_CASE("cmd_solve: sampler scenarios write the endpoint cloud") {
  auto dir = temp_dir("sampled");
  std::ostringstream out, err;
  CommandOverrides ov;
  ov.samples = 6;
  ov.n_steps = 300;
  REQUIRE(cmd_solve("example4", dir.string(), ov, out, err) == kExitOk);
  const std::string csv = slurp(dir / "endpoints.csv");
  CHECK(csv.rfind("sample,x0_1,x0_2,xT_1,xT_2\n", 0) == 0);
  // Every endpoint row ends at (0, 3) up to solver tolerance.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto last_comma = line.rfind(',');
    const auto prev_comma = line.rfind(',', last_comma - 1);
    const double xT1 = std::stod(line.substr(prev_comma + 1, last_comma - prev_comma - 1));
    const double xT2 = std::stod(line.substr(last_comma + 1));
    CHECK(std::abs(xT1 - 0.0) <= 1e-9);
    CHECK(std::abs(xT2 - 3.0) <= 1e-9);
    ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("cmd_solve: solver failures exit 3") {
  json j;
  j["name"] = "emptying";
  j["family"] = {{"dim", 2},
                 {"horizon", 1.0},
                 {"rho", "inf"},
                 {"gamma", 1e-6},
                 {"box", {{"lo", {-1.0, -1.0}}, {"hi", {1.0, 1.0}}}},
                 {"constraints",
                  {{{"kind", "affine"}, {"a", {1.0, 0.0}}, {"time_slope", 1.0}, {"offset", -0.5}},
                   {{"kind", "affine"}, {"a", {-1.0, 0.0}}, {"time_slope", 0.0}, {"offset", 0.0}}}}};
  j["perturbation"] = {{"kind", "zero"}};
  j["x0"] = {{"point", {0.1, 0.0}}};
  j["solver"] = {{"n_steps", 20}, {"tol", 1e-9}, {"seed", 1}};
  auto dir = temp_dir("empties");
  const fs::path file = dir / "s.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out, err;
  CHECK(cmd_solve(file.string(), dir.string(), {}, out, err) == kExitSolverFailure);
  CHECK(err.str().find("solver failure") != std::string::npos);
}

TEST_CASE("cmd_converge: a mismatched oracle fails the order gate with exit 5") {
  // Gravity dynamics measured against the zero-force closed form: errors
  // do not scale with h, the fit collapses, exit code 5.
  json j = scenario_to_json(builtin_scenario("example3"));
  j["name"] = "mismatch";
  j["oracle"] = "example2";
  auto dir = temp_dir("cv5");
  const fs::path file = dir / "s.json";
  std::ofstream(file) << j.dump(2);
  std::ostringstream out, err;
  const int code = cmd_converge(file.string(), {100, 200, 400}, dir.string(), {}, out, err);
  CHECK(code == kExitOrderFailure);
  CHECK(err.str().find("below 0.9") != std::string::npos);
}

TEST_CASE("env_thread_cap: SWEEPSIM_THREADS wins when set") {
  setenv("SWEEPSIM_THREADS", "3", 1);
  CHECK(env_thread_cap() == 3);
  setenv("SWEEPSIM_THREADS", "0", 1);  // invalid: fall back to hardware default
  CHECK(env_thread_cap() >= 1);
  unsetenv("SWEEPSIM_THREADS");
  CHECK(env_thread_cap() >= 1);
}
