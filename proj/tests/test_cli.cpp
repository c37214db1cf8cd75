#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "experiments.hpp"

using namespace halfext;
namespace fs = std::filesystem;
using doctest::Approx;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("halfext-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

// exit status of the command-line binary
int cli(const std::string& args) {
  const std::string cmd = std::string(HALFEXT_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(cli("run verify-kernel --n 3 --out " + dir.string()) == 0);
  const auto s = summary(dir);
  CHECK(s["pass"] == true);
  CHECK(s["pt_l1_norm"].get<double>() == Approx(1.0).epsilon(1e-8));
  CHECK(s["config"]["n"] == 3);
  CHECK(s.contains("grid"));
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "profile.csv"));
  CHECK(fs::exists(dir / "metadata.json"));

  CHECK(cli("run no-such-experiment --out " + dir.string()) == 2);
  CHECK(cli("run verify-kernel --n 1 --out " + dir.string()) == 2);
  CHECK(cli("run verify-kernel --bogus-flag") == 2);
  CHECK(cli("") == 2);

  // an iteration budget of one cannot meet the solve-el checks
  const fs::path fail = scratch("fail");
  CHECK(cli("run solve-el --n 3 --p 4 --max-iters 1 --out " + fail.string()) == 1);
  const auto f = summary(fail);
  CHECK(f["pass"] == false);
  CHECK(f["checks"].is_array());
}

TEST_CASE("config file merge") {
  const fs::path dir = scratch("merge");
  {
    std::ofstream os(dir / "cfg.json");
    os << R"({"experiment": "verify-kernel", "n": 4, "quad_order": 96, "seed": 5})";
  }
  const fs::path out = dir / "out";
  CHECK(cli("run verify-kernel --config " + (dir / "cfg.json").string() + " --n 3 --out " + out.string()) == 0);
  const auto s = summary(out);
  CHECK(s["config"]["n"] == 3);          // flag wins
  CHECK(s["config"]["quad_order"] == 96);  // file value kept
  CHECK(s["config"]["seed"] == 5);

  {
    std::ofstream os(dir / "bad.json");
    os << R"({"n": 3, "colour": "red"})";
  }
  CHECK(cli("run verify-kernel --config " + (dir / "bad.json").string() + " --out " + out.string()) == 2);

  app::ExperimentConfig c;
  CHECK_THROWS_AS(app::merge_json(c, nlohmann::json::parse(R"({"n": "three"})")), app::UsageError);
  CHECK_THROWS_AS(app::merge_json(c, nlohmann::json::parse("[1, 2]")), app::UsageError);
  app::merge_json(c, nlohmann::json::parse(R"({"trials": 3, "p": 2.5})"));
  CHECK(c.trials == 3);
  CHECK(*c.p == 2.5);
  // the resolved config round-trips
  app::ExperimentConfig d;
  app::merge_json(d, app::to_json(c));
  CHECK(app::to_json(d) == app::to_json(c));
}

TEST_CASE("validation") {
  app::ExperimentConfig c;
  c.experiment = "solve-el";
  c.p = 0.5;
  CHECK_THROWS_AS(app::validate(c), app::UsageError);
  c.p = 4.0;
  c.init = "sideways";
  CHECK_THROWS_AS(app::validate(c), app::UsageError);
  c.init = "bump";
  CHECK_NOTHROW(app::validate(c));
  c.experiment = "nothing";
  CHECK_THROWS_AS(app::validate(c), app::UsageError);
  std::ostringstream log;
  CHECK(app::run(c, log) == 2);
}

TEST_CASE("reproducible runs are byte-identical") {
  app::ExperimentConfig c;
  c.experiment = "rearrange-demo";
  c.trials = 2;
  c.seed = 8;
  c.threads = 1;
  c.reproducible = true;
  const fs::path a = scratch("repro-a"), b = scratch("repro-b");
  std::ostringstream log;
  c.out = a.string();
  REQUIRE(app::run(c, log) == 0);
  c.out = b.string();
  REQUIRE(app::run(c, log) == 0);
  // out differs between the runs, so compare everything else
  auto sa = summary(a), sb = summary(b);
  sa["config"].erase("out");
  sb["config"].erase("out");
  CHECK(sa.dump() == sb.dump());
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));

  c.out = a.string();
  const std::string first = slurp(a / "summary.json");
  REQUIRE(app::run(c, log) == 0);
  CHECK(slurp(a / "summary.json") == first);
}

TEST_CASE("solve-el artifacts") {
  const fs::path dir = scratch("solve");
  CHECK(cli("run solve-el --n 3 --p 4 --init gaussian --out " + dir.string()) == 0);
  const auto s = summary(dir);
  CHECK(s["family_match_error"].get<double>() <= 1e-3);
  CHECK(slurp(dir / "trace.csv").rfind("iter,residual,rayleigh,lambda\n", 0) == 0);
  CHECK(slurp(dir / "profile.csv").rfind("r,value\n", 0) == 0);
}

TEST_CASE("estimate-constant") {
  const fs::path dir = scratch("estimate");
  CHECK(cli("run estimate-constant --n 3 --p 4 --trials 8 --out " + dir.string()) == 0);
  const auto s = summary(dir);
  CHECK(s["c_estimate"].get<double>() == Approx(0.6743).epsilon(0.005));
  CHECK(s["closed_form"].get<double>() == Approx(0.67435).epsilon(1e-5));
  CHECK(s["rel_err"].get<double>() <= 0.005);
}

}  // TEST_SUITE
