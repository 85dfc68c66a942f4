#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/harness.hpp"

using namespace lowrank;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lowrank_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Json reward_config() {
  return Json::parse(R"({"kind": "reward", "dimension_grid": [{"m": 8, "n": 6, "r": 2}],
                         "T_grid": [2000, 8000], "replicates": 3, "seed": 11})");
}

}  // namespace

TEST_CASE("one grid point and one replicate give one row") {
  for (const char* text :
       {R"({"kind": "reward", "dimension_grid": [{"m": 5, "n": 4, "r": 1}], "T_grid": [300], "replicates": 1, "seed": 1})",
        R"({"kind": "generative", "dimension_grid": [{"n": 5, "r": 1}], "T_grid": [300], "replicates": 1, "seed": 1})",
        R"({"kind": "forward", "dimension_grid": [{"n": 5, "r": 1}], "T_grid": [300], "replicates": 1, "seed": 1})",
        R"({"kind": "bandit", "dimension_grid": [{"m": 3, "n": 3, "r": 1}], "T_grid": [3000], "replicates": 1, "seed": 1, "constants": {"C": 0.0001}})",
        R"({"kind": "mdp", "dimension_grid": [{"n": 4, "A": 2, "r": 1}], "T_grid": [2000], "replicates": 1, "seed": 1, "reward_samples": 3})"}) {
    const SweepResult r = run_sweep(config_from_json(Json::parse(text)));
    CHECK_FALSE(r.error);
    CHECK(r.rows() == 1);
  }
}

TEST_CASE("row count equals grid size times replicates") {
  const SweepResult r = run_sweep(config_from_json(reward_config()));
  REQUIRE_FALSE(r.error);
  CHECK(r.estimation.size() == 6);
  CHECK(r.slopes.size() == 6);
  for (const EstimationRow& e : r.estimation) CHECK(e.panel.entry_max > 0.0);
}

TEST_CASE("results do not depend on the thread count and repeat bitwise") {
  ExperimentConfig cfg = config_from_json(reward_config());
  cfg.threads = 1;
  const fs::path a = scratch("threads_a");
  emit(run_sweep(cfg), a, OutputFormat::Csv);
  cfg.threads = 4;
  const fs::path b = scratch("threads_b");
  emit(run_sweep(cfg), b, OutputFormat::Csv);
  const fs::path c = scratch("threads_c");
  emit(run_sweep(cfg), c, OutputFormat::Csv);
  for (const char* f : {"results.csv", "summary.csv", "slopes.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(b / f) == slurp(c / f));
  }
}

TEST_CASE("fit_slope examples") {
  std::vector<std::pair<double, double>> pts;
  for (const double x : {1.0, 4.0, 9.0, 100.0}) pts.emplace_back(x, 1.0 / std::sqrt(x));
  CHECK(fit_slope(pts) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(fit_slope({{1.0, 3.0}, {5.0, 3.0}, {9.0, 3.0}}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(fit_slope({{1.0, 1.0}}), ParameterError);
  CHECK_THROWS_AS(fit_slope({{1.0, 1.0}, {1.0, 2.0}}), ParameterError);
  CHECK_THROWS_AS(fit_slope({{1.0, -1.0}, {2.0, 2.0}}), ParameterError);

  // Box-Muller noise with standard deviation 0.01 on the log scale.
  Rng rng(3);
  std::vector<std::pair<double, double>> noisy;
  for (int k = 1; k <= 20; ++k) {
    const double z = std::sqrt(-2.0 * std::log(1.0 - rng.uniform())) *
                     std::cos(2.0 * std::numbers::pi * rng.uniform());
    const double x = 1e3 * k;
    noisy.emplace_back(x, std::pow(x, -0.5) * std::exp(0.01 * z));
  }
  const double s = fit_slope(noisy);
  CHECK(s >= -0.55);
  CHECK(s <= -0.45);
}

TEST_CASE("mean_stderr is order independent") {
  std::vector<double> v{0.3, 1e-9, 7.5, 2.25, 1e8, -3.0, 0.1};
  const auto base = mean_stderr(v);
  std::sort(v.begin(), v.end());
  do {
    const auto other = mean_stderr(v);
    CHECK(other.first == base.first);
    CHECK(other.second == base.second);
  } while (std::next_permutation(v.begin(), v.begin() + 4));
  CHECK(mean_stderr({2.0}).second == 0.0);
  CHECK_THROWS_AS(mean_stderr({}), ParameterError);
}

TEST_CASE("empty result emits header-only files") {
  SweepResult empty;
  empty.config = config_from_json(reward_config());
  const fs::path dir = scratch("empty");
  emit(empty, dir, OutputFormat::Csv);
  CHECK(slurp(dir / "results.csv") == std::string(kEstimationHeader) + "\n");
  CHECK(slurp(dir / "summary.csv") == "m,n,A,r,T,metric,mean,stderr,count\n");
  CHECK(slurp(dir / "slopes.csv") == "m,n,A,r,metric,slope\n");
}

TEST_CASE("CSV schemas and round trip") {
  CHECK(std::string(kEstimationHeader) ==
        "kind,n,m,r,T,tau,replicate,spectral,two_to_inf,one_to_inf,entry_max,p_one_to_inf,"
        "p_entry_max,subspace_u,subspace_v");
  CHECK(std::string(kBanditHeader) == "n,m,r,delta,replicate,tau_stop,correct,regret_T");
  CHECK(std::string(kMdpHeader) == "n,A,r,gamma,T,replicate,max_l1inf_err,gamma_gap,theorem5_bound");

  const SweepResult r = run_sweep(config_from_json(Json::parse(
      R"({"kind": "generative", "dimension_grid": [{"n": 6, "r": 2}], "T_grid": [4000], "replicates": 2, "seed": 5})")));
  const fs::path dir = scratch("roundtrip");
  emit(r, dir, OutputFormat::Csv);
  const auto text = lines(slurp(dir / "results.csv"));
  REQUIRE(text.size() == 3);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto c = cells(text[k + 1]);
    REQUIRE(c.size() == 15);
    const EstimationRow& e = r.estimation[k];
    CHECK(c[0] == "generative");
    CHECK(std::stoi(c[1]) == 6);
    CHECK(std::stoull(c[4]) == e.T);
    CHECK(std::stoi(c[6]) == e.replicate);
    CHECK(std::stod(c[7]) == e.panel.spectral);
    CHECK(std::stod(c[10]) == e.panel.entry_max);
    CHECK(std::stod(c[11]) == *e.panel.p_one_to_inf);
    CHECK(std::stod(c[14]) == e.panel.subspace_v);
  }

  emit(r, dir / "jsonl", OutputFormat::JsonLines);
  const auto json_lines = lines(slurp(dir / "jsonl" / "results.jsonl"));
  REQUIRE(json_lines.size() == 2);
  const Json first = Json::parse(json_lines[0]);
  CHECK(first.at("p_one_to_inf").get<double>() == *r.estimation[0].panel.p_one_to_inf);
}

TEST_CASE("reward rows leave the transition cells empty") {
  const SweepResult r = run_sweep(config_from_json(Json::parse(
      R"({"kind": "reward", "dimension_grid": [{"m": 4, "n": 4, "r": 1}], "T_grid": [400], "replicates": 1, "seed": 2})")));
  const fs::path dir = scratch("reward_cells");
  emit(r, dir, OutputFormat::Csv);
  const auto c = cells(lines(slurp(dir / "results.csv"))[1]);
  REQUIRE(c.size() == 15);
  CHECK(c[11].empty());
  CHECK(c[12].empty());
}

TEST_CASE("manifest reproduces the rows") {
  const SweepResult r = run_sweep(config_from_json(reward_config()));
  const fs::path dir = scratch("manifest");
  emit(r, dir, OutputFormat::Csv);
  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("seed").get<std::uint64_t>() == 11);
  CHECK(manifest.at("rows").get<std::size_t>() == 6);
  CHECK(manifest.at("error").is_null());
  CHECK_FALSE(manifest.at("git_describe").get<std::string>().empty());
  const fs::path again = scratch("manifest_again");
  emit(run_sweep(config_from_json(manifest.at("config"))), again, OutputFormat::Csv);
  CHECK(slurp(dir / "results.csv") == slurp(again / "results.csv"));
}

TEST_CASE("config parsing is strict") {
  Json extra = reward_config();
  extra["unexpected"] = 1;
  CHECK_THROWS_AS(config_from_json(extra), InputError);
  Json missing = reward_config();
  missing.erase("seed");
  CHECK_THROWS_AS(config_from_json(missing), InputError);
  Json no_m = reward_config();
  no_m["dimension_grid"][0].erase("m");
  CHECK_THROWS_AS(config_from_json(no_m), InputError);
  Json zero = reward_config();
  zero["replicates"] = 0;
  CHECK_THROWS_AS(config_from_json(zero), ParameterError);
  Json empty = reward_config();
  empty["T_grid"] = Json::array();
  CHECK_THROWS_AS(config_from_json(empty), ParameterError);
  Json bad_policy = reward_config();
  bad_policy["policies"] = {"ucb"};
  CHECK_THROWS_AS(config_from_json(bad_policy), ParameterError);
  CHECK_THROWS_AS(parse_kind("video"), InputError);

  const ExperimentConfig cfg = config_from_json(reward_config());
  CHECK(to_json(config_from_json(to_json(cfg))) == to_json(cfg));
}

TEST_CASE("a failing task is reported with the completed prefix") {
  // A trajectory of 3 states cannot be split for the mixing-based tau.
  const SweepResult r = run_sweep(config_from_json(Json::parse(
      R"({"kind": "forward", "dimension_grid": [{"n": 5, "r": 1}], "T_grid": [3], "replicates": 2, "seed": 1})")));
  REQUIRE(r.error);
  CHECK(r.rows() == 0);
  const fs::path dir = scratch("failure");
  emit(r, dir, OutputFormat::Csv);
  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("error").is_string());
}

TEST_CASE("emit reports the failing path") {
  const fs::path file = scratch("not_a_dir");
  std::ofstream(file) << "x";
  SweepResult empty;
  empty.config = config_from_json(reward_config());
  CHECK_THROWS_AS(emit(empty, file / "sub", OutputFormat::Csv), IoError);
}

TEST_CASE("command line output repeats byte for byte") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const fs::path cfg = dir / "bandit.json";
  std::ofstream(cfg) << R"({"kind": "bandit", "dimension_grid": [{"m": 4, "n": 4, "r": 1}],
                            "T_grid": [5000], "replicates": 2, "seed": 3,
                            "constants": {"C": 0.0001}, "policies": ["sme_ae", "etc"]})";
  const std::string cli = LOWRANK_CLI_PATH;
  for (const char* out : {"a", "b"}) {
    const std::string cmd = cli + " bandit --config " + cfg.string() + " --out " +
                            (dir / out).string() + " > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
  }
  for (const char* f : {"results.csv", "summary.csv", "bandit_trace.jsonl",
                        "regret_etc_4x4_r1_T5000.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const std::string wrong = cli + " mdp-reward-free --config " + cfg.string() + " --out " +
                            (dir / "c").string() + " > /dev/null 2>&1";
  CHECK(std::system(wrong.c_str()) != 0);
}
