#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lowrank/bandit.hpp"
#include "lowrank/data_gen.hpp"
#include "lowrank/mdp.hpp"
#include "lowrank/metrics.hpp"
#include "lowrank/serialization.hpp"

namespace lowrank {

enum class ExperimentKind { Reward, Generative, Forward, Bandit, Mdp };

std::string to_string(ExperimentKind kind);
/// Accepts reward, generative, forward, bandit, mdp.
ExperimentKind parse_kind(const std::string& s);

/// One entry of the dimension grid. Matrix kinds read m, n, r; chain kinds
/// n, r; mdp reads n, A, r.
struct GridPoint {
  int m = 0;
  int n = 0;
  int r = 1;
  int A = 0;
};

struct Constants {
  /// Epoch-schedule constant of SME-AE.
  double C = 0.01;
  /// Constant of the psi and regret-bound calculators.
  double c = 1.0;
  /// Value-iteration tolerance.
  double tol = 1e-8;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Reward;
  std::vector<GridPoint> dimension_grid;
  std::vector<std::uint64_t> T_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
  NoiseSpec noise;
  Constants constants;

  /// Confidence level of SME-AE; 0 means 1 / T^2.
  double delta = 0.0;
  double gamma = 0.9;
  /// Bandit instances are redrawn until Delta_min reaches this value.
  double min_gap = 0.0;
  /// Chain start / reset law: "stationary" or "uniform".
  std::string nu0 = "stationary";
  /// Chain generator for generative, forward and mdp kinds: "dirichlet" or "homogeneous".
  std::string chain_style = "dirichlet";
  /// Forward-model subset count; 0 means choose_tau.
  int tau = 0;
  /// Random reward tables per mdp replicate, on top of the indicator rewards.
  int reward_samples = 50;
  /// Bandit policies run per replicate; sme_ae always runs. Subset of
  /// {sme_ae, etc, uniform}.
  std::vector<std::string> policies{"sme_ae"};
  /// Worker threads; 0 means hardware concurrency.
  int threads = 0;
};

/// Throws InputError on missing, unknown or ill-typed fields and
/// ParameterError on invalid values.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct EstimationRow {
  int point = 0;
  int m = 0, n = 0, r = 0;
  std::uint64_t T = 0;
  int tau = 0;
  int replicate = 0;
  ErrorPanel panel;
};

struct BanditRow {
  int point = 0;
  int m = 0, n = 0, r = 0;
  std::uint64_t T = 0;
  double delta = 0.0;
  int replicate = 0;
  std::uint64_t tau_stop = 0;
  bool correct = false;
  double regret_T = 0.0;
  SmeAeTrace trace;
  /// Final pseudo-regret of each extra policy, in config order.
  std::vector<std::pair<std::string, double>> baseline_regret;
};

struct MdpRow {
  int point = 0;
  int n = 0, A = 0, r = 0;
  double gamma = 0.0;
  std::uint64_t T = 0;
  int replicate = 0;
  GammaGapResult result;
};

/// Mean cumulative pseudo-regret over replicates at about 1000 checkpoints.
struct RegretCurve {
  std::string policy;
  int dims = 0;
  std::uint64_t T = 0;
  std::vector<std::uint64_t> rounds;
  std::vector<double> mean_cumulative;
};

struct SummaryRow {
  int dims = 0;
  std::uint64_t T = 0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

struct SlopeRow {
  int dims = 0;
  std::string metric;
  double slope = 0.0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<EstimationRow> estimation;
  std::vector<BanditRow> bandit;
  std::vector<MdpRow> mdp;
  std::vector<RegretCurve> curves;
  std::vector<SummaryRow> summary;
  std::vector<SlopeRow> slopes;
  /// First failure; rows hold the tasks completed before it.
  std::optional<std::string> error;

  std::size_t rows() const { return estimation.size() + bandit.size() + mdp.size(); }
};

/// Runs every grid point (dims x T) times replicates. Replicate k of point g
/// draws its data from derive_seed(seed, g, k); the ground-truth instance for
/// dims index d is shared across T and replicates. Results are index-ordered,
/// so the thread count does not affect them.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Ground truth of bandit grid point d: homogeneous draws from the instance
/// stream until one has a unique maximum and Delta_min >= cfg.min_gap.
LowRankMatrix bandit_instance(const ExperimentConfig& cfg, int d);

/// Least-squares slope of ln y on ln x. Needs two points with distinct x,
/// all coordinates positive.
double fit_slope(const std::vector<std::pair<double, double>>& points);

/// Mean and standard error (sample stddev / sqrt(count); 0 for one value).
std::pair<double, double> mean_stderr(const std::vector<double>& values);

enum class OutputFormat { Csv, JsonLines };

/// Writes results.csv or results.jsonl, summary.csv, slopes.csv and
/// manifest.json into `dir` (created if missing), plus bandit_trace.jsonl and
/// regret_*.csv for bandit runs and mdp_results.jsonl for mdp runs. Throws
/// IoError naming the path on failure.
void emit(const SweepResult& result, const std::filesystem::path& dir, OutputFormat format);

extern const char* const kEstimationHeader;
extern const char* const kBanditHeader;
extern const char* const kMdpHeader;

/// Version string recorded in manifests.
const char* git_describe();

}  // namespace lowrank
