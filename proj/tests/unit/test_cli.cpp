#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "runner.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace nilflow::lab;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nilflow_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run(const std::string& kind, const json& cfg, const fs::path& out, int threads = 0) {
  RunOptions o;
  o.out_dir = out;
  o.threads = threads;
  o.quiet = true;
  std::ostringstream err;
  return run_experiment(kind, cfg, o, err);
}

}  // namespace

TEST_CASE("schema lists every experiment with defaults") {
  const json s = schema();
  for (const auto& k : experiment_kinds()) {
    REQUIRE(s["experiments"].contains(k));
    CHECK(s["experiments"][k]["keys"].contains("seed"));
  }
  CHECK(s["exit_codes"].contains("3"));
}

TEST_CASE("weyl-sum run is reproducible and thread independent") {
  const json cfg{{"J", 20000}, {"stride", 5000}, {"check_J", 20000}, {"z", 0.37}};
  const fs::path a = scratch("a"), b = scratch("b");
  REQUIRE(run("weyl-sum", cfg, a, 1) == kExitOk);
  REQUIRE(run("weyl-sum", cfg, b, 4) == kExitOk);
  CHECK(read_text(a / "partial_sums.csv") == read_text(b / "partial_sums.csv"));
  const json sa = read_json(a / "summary.json"), sb = read_json(b / "summary.json");
  CHECK(sa["result"] == sb["result"]);
  CHECK(sa["config_hash"] == sb["config_hash"]);
  CHECK(sa["config_hash"].get<std::string>().size() == 16);
  CHECK(sa["result"]["direct_check"]["pass"] == true);
  CHECK(fs::exists(a / "timing.json"));
  CHECK(read_text(a / "partial_sums.csv").rfind("j,re,im\n", 0) == 0);
}

TEST_CASE("explicit skew-shift parameters") {
  const fs::path p = scratch("ssp");
  json cfg{{"J", 1000}, {"stride", 500}, {"check_J", 1000}, {"skew_shift", {{"rho", 0.25}, {"sigma", 0.0}, {"y_sign", -1}}}};
  CHECK(run("weyl-sum", cfg, p) == kExitOk);
  CHECK(read_json(p / "summary.json")["result"]["rho"] == 0.25);
  cfg["skew_shift"].erase("rho");
  CHECK(run("weyl-sum", cfg, scratch("ssp2")) == kExitInvalid);
}

TEST_CASE("validation and guard exit codes") {
  CHECK(run("weyl-sum", json{{"bogus", 1}}, scratch("bad1")) == kExitInvalid);
  CHECK(run("no-such-kind", json::object(), scratch("bad2")) == kExitInvalid);
  CHECK(run("weyl-sum", json{{"label", {{"m", 0}, {"n", 0}}}}, scratch("bad3")) == kExitInvalid);
  const fs::path g = scratch("guard");
  CHECK(run("correlation", json{{"eps", 100.0}, {"N", 10}, {"stretch_t", json::array()}}, g) == kExitGuard);
  const json s = read_json(g / "summary.json");
  CHECK(s["guard"]["name"] == "NonPositiveAlpha");
}

TEST_CASE("seed override is recorded") {
  const fs::path p = scratch("seed");
  RunOptions o;
  o.out_dir = p;
  o.seed = 77;
  o.quiet = true;
  std::ostringstream err;
  REQUIRE(run_experiment("renorm-track", json{{"horizon", 2.0}}, o, err) == kExitOk);
  const json s = read_json(p / "summary.json");
  CHECK(s["seed"] == 77);
  CHECK(s["config"]["seed"] == 77);
  CHECK(s["result"]["partial_quotients"].size() > 0);
}

TEST_CASE("config files") {
  const fs::path dir = scratch("file");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"J": [10, 100]})";
  RunOptions o;
  o.out_dir = dir / "out";
  o.quiet = true;
  std::ostringstream err;
  CHECK(run_experiment_file("l2-identity", (dir / "cfg.json").string(), o, err) == kExitOk);
  CHECK(read_json(dir / "out" / "summary.json")["result"]["pass"] == true);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(run_experiment_file("l2-identity", (dir / "broken.json").string(), o, err) == kExitInvalid);
  CHECK(run_experiment_file("l2-identity", (dir / "missing.json").string(), o, err) == kExitInvalid);
}
