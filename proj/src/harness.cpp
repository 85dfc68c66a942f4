#include "lowrank/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <variant>

#include "lowrank/errors.hpp"

#ifndef LOWRANK_GIT_DESCRIBE
#define LOWRANK_GIT_DESCRIBE "unknown"
#endif

namespace lowrank {

const char* const kEstimationHeader =
    "kind,n,m,r,T,tau,replicate,spectral,two_to_inf,one_to_inf,entry_max,p_one_to_inf,"
    "p_entry_max,subspace_u,subspace_v";
const char* const kBanditHeader = "n,m,r,delta,replicate,tau_stop,correct,regret_T";
const char* const kMdpHeader =
    "n,A,r,gamma,T,replicate,max_l1inf_err,gamma_gap,theorem5_bound";

const char* git_describe() { return LOWRANK_GIT_DESCRIBE; }

namespace {

// Stream index of the ground-truth instances; replicate indices stay far below it.
constexpr std::uint64_t kInstanceStream = 0xffffffff00000000ULL;
constexpr int kInstanceDraws = 10000;
constexpr std::size_t kCheckpoints = 1000;

const std::set<std::string> kPolicies{"sme_ae", "etc", "uniform"};

std::string noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::UniformBounded:
      return "uniform";
    case NoiseKind::ScaledRademacher:
      return "rademacher";
  }
  return "none";
}

NoiseKind parse_noise(const std::string& s) {
  if (s == "none") return NoiseKind::None;
  if (s == "uniform") return NoiseKind::UniformBounded;
  if (s == "rademacher") return NoiseKind::ScaledRademacher;
  throw InputError("config: unknown noise kind '" + s + "'");
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InputError("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw InputError("config: unknown field '" + key + "' in " + where);
}

std::uint64_t as_count(const Json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw InputError("config: " + what + " must be a nonnegative integer");
}

bool uses_chain(ExperimentKind k) { return k == ExperimentKind::Generative || k == ExperimentKind::Forward; }

ChainStyle chain_style(const ExperimentConfig& cfg) {
  return cfg.chain_style == "homogeneous" ? ChainStyle::Homogeneous : ChainStyle::DirichletFlat;
}

// Ground truth for one entry of the dimension grid.
struct Instance {
  LowRankMatrix matrix;
  MarkovChain chain;
  std::vector<double> nu0;
  MdpModel mdp;
};

}  // namespace

LowRankMatrix bandit_instance(const ExperimentConfig& cfg, int d) {
  const GridPoint& g = cfg.dimension_grid.at(static_cast<std::size_t>(d));
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(d), kInstanceStream));
  for (int draw = 0; draw < kInstanceDraws; ++draw) {
    LowRankMatrix candidate = make_low_rank_matrix(g.m, g.n, g.r, MatrixStyle::Homogeneous, rng);
    try {
      if (gap_stats(candidate.matrix).delta_min >= cfg.min_gap) return candidate;
    } catch (const TieError&) {
    }
  }
  throw GenerationError("run_sweep: no bandit instance with Delta_min >= " + std::to_string(cfg.min_gap) +
                        " in " + std::to_string(kInstanceDraws) + " draws");
}

namespace {

Instance make_instance(const ExperimentConfig& cfg, int d) {
  const GridPoint& g = cfg.dimension_grid[static_cast<std::size_t>(d)];
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(d), kInstanceStream));
  Instance inst;
  switch (cfg.kind) {
    case ExperimentKind::Reward:
      inst.matrix = make_low_rank_matrix(g.m, g.n, g.r, MatrixStyle::Homogeneous, rng);
      break;
    case ExperimentKind::Generative:
    case ExperimentKind::Forward: {
      inst.chain = make_low_rank_chain(g.n, g.r, rng, chain_style(cfg));
      if (cfg.nu0 == "uniform") {
        inst.nu0.assign(static_cast<std::size_t>(g.n), 1.0 / g.n);
      } else {
        inst.nu0.assign(inst.chain.nu.data(), inst.chain.nu.data() + inst.chain.nu.size());
      }
      break;
    }
    case ExperimentKind::Bandit:
      inst.matrix = bandit_instance(cfg, d);
      break;
    case ExperimentKind::Mdp:
      inst.mdp = make_low_rank_mdp(g.n, g.A, g.r, cfg.gamma, rng, chain_style(cfg));
      break;
  }
  return inst;
}

struct CurveSample {
  std::string policy;
  std::vector<std::uint64_t> rounds;
  std::vector<double> values;
};

struct BanditTask {
  BanditRow row;
  std::vector<CurveSample> curves;
};

using TaskResult = std::variant<EstimationRow, BanditTask, MdpRow>;

CurveSample checkpoints(const std::string& policy, const std::vector<double>& cumulative) {
  CurveSample c;
  c.policy = policy;
  const std::uint64_t T = cumulative.size();
  std::uint64_t last = 0;
  for (std::size_t k = 1; k <= kCheckpoints; ++k) {
    const std::uint64_t round = (k * T + kCheckpoints - 1) / kCheckpoints;
    if (round == last || round == 0) continue;
    c.rounds.push_back(round);
    c.values.push_back(cumulative[round - 1]);
    last = round;
  }
  return c;
}

TaskResult run_task(const ExperimentConfig& cfg, const Instance& inst, int d, int t, int k) {
  const GridPoint& g = cfg.dimension_grid[static_cast<std::size_t>(d)];
  const std::uint64_t T = cfg.T_grid[static_cast<std::size_t>(t)];
  const int point = d * static_cast<int>(cfg.T_grid.size()) + t;
  const std::uint64_t seed =
      derive_seed(cfg.seed, static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(k));
  Rng rng(seed);

  switch (cfg.kind) {
    case ExperimentKind::Reward: {
      const ObservationBatch batch = sample_model1(inst.matrix, T, cfg.noise, rng);
      EstimationRow row{point, g.m, g.n, g.r, T, 0, k, {}};
      row.panel = error_panel(inst.matrix, estimate_reward(batch, g.r));
      return row;
    }
    case ExperimentKind::Generative: {
      const ObservationBatch batch = sample_generative(inst.chain, inst.nu0, T, rng);
      const FrequencyEstimate est = estimate_generative(batch, g.r);
      const Eigen::Map<const Vector> nu0(inst.nu0.data(), static_cast<Eigen::Index>(inst.nu0.size()));
      const Matrix target = nu0.asDiagonal() * inst.chain.P;
      EstimationRow row{point, g.n, g.n, g.r, T, 0, k, {}};
      row.panel = error_panel(target, inst.chain.P, est);
      return row;
    }
    case ExperimentKind::Forward: {
      int tau = cfg.tau;
      if (tau == 0) {
        if (!inst.chain.tau_star) throw NonMixingError("run_sweep: chain has no mixing time");
        tau = choose_tau(*inst.chain.tau_star, static_cast<double>(T), inst.chain.nu_min());
      }
      const ObservationBatch traj = sample_trajectory(inst.chain, inst.nu0, T, rng);
      EstimationRow row{point, g.n, g.n, g.r, T, tau, k, {}};
      row.panel = error_panel(inst.chain, estimate_forward(traj, g.r, tau));
      return row;
    }
    case ExperimentKind::Bandit: {
      BanditTask task;
      BanditRow& row = task.row;
      row.point = point;
      row.m = g.m;
      row.n = g.n;
      row.r = g.r;
      row.T = T;
      row.replicate = k;
      row.delta = cfg.delta > 0.0 ? cfg.delta : 1.0 / (static_cast<double>(T) * T);
      BanditEnv env(inst.matrix, cfg.noise, seed);
      RegretTrace rt = run_regret(env, policy::SmeAeCommit{row.delta, cfg.constants.C, g.r}, T);
      row.tau_stop = rt.tau;
      row.correct = rt.sme_ae && rt.sme_ae->correct;
      row.regret_T = rt.pseudo_regret;
      row.trace = std::move(*rt.sme_ae);
      task.curves.push_back(checkpoints("sme_ae", rt.cumulative));
      for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        const std::string& name = cfg.policies[p];
        if (name == "sme_ae") continue;
        BanditEnv other(inst.matrix, cfg.noise, derive_seed(seed, p + 1, 0));
        const Policy chosen = name == "etc" ? Policy{policy::Etc{0, g.r}} : Policy{policy::UniformRandom{}};
        const RegretTrace base = run_regret(other, chosen, T);
        row.baseline_regret.emplace_back(name, base.pseudo_regret);
        task.curves.push_back(checkpoints(name, base.cumulative));
      }
      return task;
    }
    case ExperimentKind::Mdp: {
      const std::vector<ObservationBatch> data = collect_reward_free(inst.mdp, T, rng);
      const std::vector<int> taus =
          cfg.tau > 0 ? std::vector<int>(static_cast<std::size_t>(g.A), cfg.tau)
                      : exploration_taus(inst.mdp, T);
      const std::vector<FrequencyEstimate> est = estimate_mdp(data, g.r, taus);
      std::vector<Matrix> p_hat;
      for (const FrequencyEstimate& e : est) p_hat.push_back(e.P_hat);
      std::vector<RewardFn> rewards;
      for (int s = 0; s < cfg.reward_samples; ++s) rewards.push_back(random_reward(g.n, g.A, rng));
      for (RewardFn& R : indicator_rewards(g.n, g.A)) rewards.push_back(std::move(R));
      MdpRow row{point, g.n, g.A, g.r, cfg.gamma, T, k, {}};
      row.result = gamma_gap(inst.mdp, p_hat, rewards, cfg.gamma, cfg.constants.tol);
      return row;
    }
  }
  throw InvariantError("run_sweep: unhandled experiment kind");
}

std::vector<std::pair<std::string, double>> row_metrics(const TaskResult& r) {
  std::vector<std::pair<std::string, double>> out;
  if (const auto* e = std::get_if<EstimationRow>(&r)) {
    const ErrorPanel& p = e->panel;
    out = {{"spectral", p.spectral},     {"two_to_inf", p.two_to_inf},
           {"one_to_inf", p.one_to_inf}, {"entry_max", p.entry_max}};
    if (p.p_one_to_inf) out.emplace_back("p_one_to_inf", *p.p_one_to_inf);
    if (p.p_entry_max) out.emplace_back("p_entry_max", *p.p_entry_max);
    out.emplace_back("subspace_u", p.subspace_u);
    out.emplace_back("subspace_v", p.subspace_v);
  } else if (const auto* b = std::get_if<BanditTask>(&r)) {
    out = {{"tau_stop", static_cast<double>(b->row.tau_stop)},
           {"correct", b->row.correct ? 1.0 : 0.0},
           {"regret_T", b->row.regret_T}};
    for (const auto& [name, value] : b->row.baseline_regret) out.emplace_back("regret_" + name, value);
  } else {
    const MdpRow& m = std::get<MdpRow>(r);
    out = {{"max_l1inf_err", m.result.max_l1inf_err},
           {"gamma_gap", m.result.max_gap},
           {"theorem5_bound", m.result.theorem5_bound}};
  }
  return out;
}

void aggregate(SweepResult& res, const std::vector<TaskResult>& done, const std::vector<int>& dims_of,
               const std::vector<int>& t_of) {
  const ExperimentConfig& cfg = res.config;
  // (dims, T index) -> metric -> values, metrics in first-seen order.
  std::map<std::pair<int, int>, std::vector<std::pair<std::string, std::vector<double>>>> groups;
  for (std::size_t i = 0; i < done.size(); ++i) {
    auto& slot = groups[{dims_of[i], t_of[i]}];
    for (const auto& [name, value] : row_metrics(done[i])) {
      auto it = std::find_if(slot.begin(), slot.end(), [&](const auto& s) { return s.first == name; });
      if (it == slot.end()) {
        slot.emplace_back(name, std::vector<double>{});
        it = std::prev(slot.end());
      }
      it->second.push_back(value);
    }
  }
  for (const auto& [key, metrics] : groups)
    for (const auto& [name, values] : metrics) {
      const auto [mean, se] = mean_stderr(values);
      res.summary.push_back({key.first, cfg.T_grid[static_cast<std::size_t>(key.second)], name, mean,
                             se, static_cast<int>(values.size())});
    }

  std::map<int, std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>> series;
  for (const SummaryRow& s : res.summary) {
    auto& slot = series[s.dims];
    auto it = std::find_if(slot.begin(), slot.end(), [&](const auto& e) { return e.first == s.metric; });
    if (it == slot.end()) {
      slot.emplace_back(s.metric, std::vector<std::pair<double, double>>{});
      it = std::prev(slot.end());
    }
    it->second.emplace_back(static_cast<double>(s.T), s.mean);
  }
  for (const auto& [dims, metrics] : series)
    for (const auto& [name, pts] : metrics) {
      const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
      if (pts.size() < 2 || !positive) continue;
      res.slopes.push_back({dims, name, fit_slope(pts)});
    }
}

void build_curves(SweepResult& res, const std::vector<BanditTask*>& tasks, const std::vector<int>& dims_of) {
  std::map<std::tuple<int, std::uint64_t, std::string>, std::pair<CurveSample, int>> sums;
  std::vector<std::tuple<int, std::uint64_t, std::string>> order;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    for (const CurveSample& c : tasks[i]->curves) {
      const auto key = std::make_tuple(dims_of[i], tasks[i]->row.T, c.policy);
      auto it = sums.find(key);
      if (it == sums.end()) {
        sums.emplace(key, std::make_pair(c, 1));
        order.push_back(key);
      } else {
        for (std::size_t j = 0; j < c.values.size(); ++j) it->second.first.values[j] += c.values[j];
        ++it->second.second;
      }
    }
  for (const auto& key : order) {
    const auto& [sample, count] = sums.at(key);
    RegretCurve curve;
    curve.dims = std::get<0>(key);
    curve.T = std::get<1>(key);
    curve.policy = std::get<2>(key);
    curve.rounds = sample.rounds;
    for (double v : sample.values) curve.mean_cumulative.push_back(v / count);
    res.curves.push_back(std::move(curve));
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string dims_cells(const GridPoint& g) {
  return std::to_string(g.m) + ',' + std::to_string(g.n) + ',' + std::to_string(g.A) + ',' +
         std::to_string(g.r);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Reward:
      return "reward";
    case ExperimentKind::Generative:
      return "generative";
    case ExperimentKind::Forward:
      return "forward";
    case ExperimentKind::Bandit:
      return "bandit";
    case ExperimentKind::Mdp:
      return "mdp";
  }
  return "reward";
}

ExperimentKind parse_kind(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::Reward, ExperimentKind::Generative, ExperimentKind::Forward,
                           ExperimentKind::Bandit, ExperimentKind::Mdp})
    if (to_string(k) == s) return k;
  throw InputError("config: unknown experiment kind '" + s + "'");
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  try {
    reject_unknown(j,
                   {"kind", "dimension_grid", "T_grid", "replicates", "seed", "noise", "constants",
                    "delta", "gamma", "min_gap", "nu0", "chain_style", "tau", "reward_samples", "policies", "threads"},
                   "the top level");
    cfg.kind = parse_kind(j.at("kind").get<std::string>());
    for (const Json& g : j.at("dimension_grid")) {
      reject_unknown(g, {"m", "n", "r", "A"}, "dimension_grid");
      GridPoint p;
      p.n = g.at("n").get<int>();
      p.m = g.value("m", uses_chain(cfg.kind) || cfg.kind == ExperimentKind::Mdp ? p.n : 0);
      if (!g.contains("m") && !uses_chain(cfg.kind) && cfg.kind != ExperimentKind::Mdp)
        throw InputError("config: dimension_grid entries need m for kind " + to_string(cfg.kind));
      p.r = g.at("r").get<int>();
      p.A = g.value("A", 0);
      if (cfg.kind == ExperimentKind::Mdp && !g.contains("A"))
        throw InputError("config: dimension_grid entries need A for kind mdp");
      cfg.dimension_grid.push_back(p);
    }
    for (const Json& t : j.at("T_grid")) cfg.T_grid.push_back(as_count(t, "T_grid entries"));
    cfg.replicates = j.at("replicates").get<int>();
    cfg.seed = as_count(j.at("seed"), "seed");
    if (j.contains("noise")) {
      const Json& nz = j.at("noise");
      reject_unknown(nz, {"kind", "c1"}, "noise");
      if (nz.contains("kind")) cfg.noise.kind = parse_noise(nz.at("kind").get<std::string>());
      cfg.noise.c1 = nz.value("c1", cfg.noise.c1);
    }
    if (j.contains("constants")) {
      const Json& c = j.at("constants");
      reject_unknown(c, {"C", "c", "tol"}, "constants");
      cfg.constants.C = c.value("C", cfg.constants.C);
      cfg.constants.c = c.value("c", cfg.constants.c);
      cfg.constants.tol = c.value("tol", cfg.constants.tol);
    }
    cfg.delta = j.value("delta", cfg.delta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.min_gap = j.value("min_gap", cfg.min_gap);
    cfg.nu0 = j.value("nu0", cfg.nu0);
    cfg.chain_style = j.value("chain_style", cfg.chain_style);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.reward_samples = j.value("reward_samples", cfg.reward_samples);
    if (j.contains("policies")) cfg.policies = j.at("policies").get<std::vector<std::string>>();
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const Json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  if (cfg.dimension_grid.empty()) throw ParameterError("config: dimension_grid is empty");
  if (cfg.T_grid.empty()) throw ParameterError("config: T_grid is empty");
  if (cfg.replicates < 1) throw ParameterError("config: replicates must be at least 1");
  for (const GridPoint& g : cfg.dimension_grid) {
    const bool needs_m = cfg.kind == ExperimentKind::Reward || cfg.kind == ExperimentKind::Bandit;
    if (g.n < 1 || g.r < 1 || (needs_m && g.m < 1))
      throw ParameterError("config: dimensions must be positive");
    if (cfg.kind == ExperimentKind::Mdp && g.A < 1) throw ParameterError("config: A must be positive");
  }
  for (std::uint64_t T : cfg.T_grid)
    if (T == 0) throw ParameterError("config: T_grid entries must be positive");
  if (cfg.nu0 != "stationary" && cfg.nu0 != "uniform")
    throw ParameterError("config: nu0 must be 'stationary' or 'uniform'");
  if (cfg.chain_style != "dirichlet" && cfg.chain_style != "homogeneous")
    throw ParameterError("config: chain_style must be 'dirichlet' or 'homogeneous'");
  if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) throw ParameterError("config: delta must lie in [0, 1)");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ParameterError("config: gamma must lie in (0, 1)");
  if (cfg.tau < 0 || cfg.reward_samples < 0 || cfg.threads < 0)
    throw ParameterError("config: tau, reward_samples and threads must be nonnegative");
  if (!(cfg.constants.C > 0.0 && cfg.constants.c > 0.0 && cfg.constants.tol > 0.0))
    throw ParameterError("config: constants must be positive");
  for (const std::string& p : cfg.policies)
    if (!kPolicies.count(p)) throw ParameterError("config: unknown policy '" + p + "'");
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  Json grid = Json::array();
  for (const GridPoint& g : cfg.dimension_grid) {
    Json p{{"n", g.n}, {"r", g.r}};
    if (cfg.kind == ExperimentKind::Reward || cfg.kind == ExperimentKind::Bandit) p["m"] = g.m;
    if (cfg.kind == ExperimentKind::Mdp) p["A"] = g.A;
    grid.push_back(std::move(p));
  }
  return Json{{"kind", to_string(cfg.kind)},
              {"dimension_grid", grid},
              {"T_grid", cfg.T_grid},
              {"replicates", cfg.replicates},
              {"seed", cfg.seed},
              {"noise", {{"kind", noise_name(cfg.noise.kind)}, {"c1", cfg.noise.c1}}},
              {"constants", {{"C", cfg.constants.C}, {"c", cfg.constants.c}, {"tol", cfg.constants.tol}}},
              {"delta", cfg.delta},
              {"gamma", cfg.gamma},
              {"min_gap", cfg.min_gap},
              {"nu0", cfg.nu0},
              {"chain_style", cfg.chain_style},
              {"tau", cfg.tau},
              {"reward_samples", cfg.reward_samples},
              {"policies", cfg.policies},
              {"threads", cfg.threads}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  SweepResult res;
  res.config = cfg;
  const int dims = static_cast<int>(cfg.dimension_grid.size());
  const int Ts = static_cast<int>(cfg.T_grid.size());
  const std::size_t n_tasks = static_cast<std::size_t>(dims) * Ts * cfg.replicates;

  std::vector<Instance> instances;
  try {
    for (int d = 0; d < dims; ++d) instances.push_back(make_instance(cfg, d));
  } catch (const std::exception& e) {
    res.error = e.what();
    return res;
  }

  std::vector<std::optional<TaskResult>> slots(n_tasks);
  std::vector<std::optional<std::string>> failures(n_tasks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks || stop.load()) return;
      const int k = static_cast<int>(i % static_cast<std::size_t>(cfg.replicates));
      const int point = static_cast<int>(i / static_cast<std::size_t>(cfg.replicates));
      const int d = point / Ts;
      const int t = point % Ts;
      try {
        slots[i] = run_task(cfg, instances[static_cast<std::size_t>(d)], d, t, k);
      } catch (const std::exception& e) {
        failures[i] = e.what();
        stop.store(true);
      }
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_tasks, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // Keep the prefix of tasks completed before the first failure.
  std::vector<TaskResult> done;
  std::vector<int> dims_of;
  std::vector<int> t_of;
  for (std::size_t i = 0; i < n_tasks; ++i) {
    if (failures[i]) {
      res.error = "task " + std::to_string(i) + ": " + *failures[i];
      break;
    }
    if (!slots[i]) break;
    const int point = static_cast<int>(i / static_cast<std::size_t>(cfg.replicates));
    done.push_back(std::move(*slots[i]));
    dims_of.push_back(point / Ts);
    t_of.push_back(point % Ts);
  }
  if (!res.error && done.size() < n_tasks) res.error = "sweep stopped before completing all tasks";

  std::vector<BanditTask*> bandit_tasks;
  std::vector<int> bandit_dims;
  for (std::size_t i = 0; i < done.size(); ++i) {
    if (auto* e = std::get_if<EstimationRow>(&done[i])) res.estimation.push_back(*e);
    if (auto* b = std::get_if<BanditTask>(&done[i])) {
      res.bandit.push_back(b->row);
      bandit_tasks.push_back(b);
      bandit_dims.push_back(dims_of[i]);
    }
    if (auto* m = std::get_if<MdpRow>(&done[i])) res.mdp.push_back(*m);
  }
  build_curves(res, bandit_tasks, bandit_dims);
  aggregate(res, done, dims_of, t_of);
  return res;
}

double fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ParameterError("fit_slope: needs at least two points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw ParameterError("fit_slope: coordinates must be positive");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double count = static_cast<double>(points.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit_slope: x values must not all coincide");
  return sxy / sxx;
}

std::pair<double, double> mean_stderr(const std::vector<double>& values) {
  if (values.empty()) throw ParameterError("mean_stderr: no values");
  // Sorted summation makes the result independent of replicate order.
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

void emit(const SweepResult& result, const std::filesystem::path& dir, OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const ExperimentConfig& cfg = result.config;
  const ExperimentKind kind = cfg.kind;
  const bool csv = format == OutputFormat::Csv;

  const std::filesystem::path results_path = dir / (csv ? "results.csv" : "results.jsonl");
  std::ofstream out = open_out(results_path);
  if (kind == ExperimentKind::Bandit) {
    if (csv) out << kBanditHeader << '\n';
    for (const BanditRow& b : result.bandit) {
      if (csv) {
        out << b.n << ',' << b.m << ',' << b.r << ',' << format_double(b.delta) << ',' << b.replicate
            << ',' << b.tau_stop << ',' << (b.correct ? 1 : 0) << ',' << format_double(b.regret_T)
            << '\n';
      } else {
        out << Json{{"n", b.n}, {"m", b.m}, {"r", b.r}, {"delta", b.delta}, {"replicate", b.replicate},
                    {"tau_stop", b.tau_stop}, {"correct", b.correct}, {"regret_T", b.regret_T}}
                   .dump()
            << '\n';
      }
    }
  } else if (kind == ExperimentKind::Mdp) {
    if (csv) out << kMdpHeader << '\n';
    for (const MdpRow& m : result.mdp) {
      if (csv) {
        out << m.n << ',' << m.A << ',' << m.r << ',' << format_double(m.gamma) << ',' << m.T << ','
            << m.replicate << ',' << format_double(m.result.max_l1inf_err) << ','
            << format_double(m.result.max_gap) << ',' << format_double(m.result.theorem5_bound) << '\n';
      } else {
        out << Json{{"n", m.n}, {"A", m.A}, {"r", m.r}, {"gamma", m.gamma}, {"T", m.T},
                    {"replicate", m.replicate}, {"max_l1inf_err", m.result.max_l1inf_err},
                    {"gamma_gap", m.result.max_gap}, {"theorem5_bound", m.result.theorem5_bound}}
                   .dump()
            << '\n';
      }
    }
  } else {
    if (csv) out << kEstimationHeader << '\n';
    for (const EstimationRow& e : result.estimation) {
      if (csv) {
        out << to_string(kind) << ',' << e.n << ',' << e.m << ',' << e.r << ',' << e.T << ',' << e.tau
            << ',' << e.replicate << ',' << error_panel_csv_cells(e.panel) << '\n';
      } else {
        Json j{{"kind", to_string(kind)}, {"n", e.n}, {"m", e.m}, {"r", e.r}, {"T", e.T},
               {"tau", e.tau}, {"replicate", e.replicate}};
        j.update(to_json(e.panel));
        out << j.dump() << '\n';
      }
    }
  }
  finish(out, results_path);

  const std::filesystem::path summary_path = dir / "summary.csv";
  std::ofstream summary = open_out(summary_path);
  summary << "m,n,A,r,T,metric,mean,stderr,count\n";
  for (const SummaryRow& s : result.summary)
    summary << dims_cells(cfg.dimension_grid[static_cast<std::size_t>(s.dims)]) << ',' << s.T << ','
            << s.metric << ',' << format_double(s.mean) << ',' << format_double(s.stderr_) << ','
            << s.count << '\n';
  finish(summary, summary_path);

  const std::filesystem::path slopes_path = dir / "slopes.csv";
  std::ofstream slopes = open_out(slopes_path);
  slopes << "m,n,A,r,metric,slope\n";
  for (const SlopeRow& s : result.slopes)
    slopes << dims_cells(cfg.dimension_grid[static_cast<std::size_t>(s.dims)]) << ',' << s.metric << ','
           << format_double(s.slope) << '\n';
  finish(slopes, slopes_path);

  if (kind == ExperimentKind::Bandit) {
    const std::filesystem::path trace_path = dir / "bandit_trace.jsonl";
    std::ofstream trace = open_out(trace_path);
    for (const BanditRow& b : result.bandit)
      for (const SmeAeEpoch& e : b.trace.epochs)
        trace << Json{{"m", b.m}, {"n", b.n}, {"r", b.r}, {"T", b.T}, {"delta", b.delta},
                      {"replicate", b.replicate}, {"l", e.l}, {"delta_l", e.delta_l}, {"T_l", e.T_l},
                      {"active_before", e.active_before}, {"active_after", e.active_after},
                      {"m_hat_max", e.m_hat_max},
                      {"m_hat_argmax", {e.m_hat_argmax.first, e.m_hat_argmax.second}},
                      {"estimate_error", e.estimate_error}, {"good_event", e.good_event},
                      {"fallback", e.fallback}, {"truncated", b.trace.truncated}}
                     .dump()
              << '\n';
    finish(trace, trace_path);

    for (const RegretCurve& c : result.curves) {
      const GridPoint& g = cfg.dimension_grid[static_cast<std::size_t>(c.dims)];
      const std::filesystem::path curve_path =
          dir / ("regret_" + c.policy + "_" + std::to_string(g.m) + "x" + std::to_string(g.n) + "_r" +
                 std::to_string(g.r) + "_T" + std::to_string(c.T) + ".csv");
      std::ofstream curve = open_out(curve_path);
      curve << "round,cumulative_regret\n";
      for (std::size_t i = 0; i < c.rounds.size(); ++i)
        curve << c.rounds[i] << ',' << format_double(c.mean_cumulative[i]) << '\n';
      finish(curve, curve_path);
    }
  }

  if (kind == ExperimentKind::Mdp) {
    const std::filesystem::path mdp_path = dir / "mdp_results.jsonl";
    std::ofstream mdp = open_out(mdp_path);
    for (const MdpRow& m : result.mdp)
      mdp << Json{{"n", m.n}, {"A", m.A}, {"r", m.r}, {"gamma", m.gamma}, {"T", m.T},
                  {"replicate", m.replicate}, {"per_action_errors", m.result.per_action_errors},
                  {"gamma_gap", m.result.max_gap}, {"theorem5_bound", m.result.theorem5_bound}}
                 .dump()
          << '\n';
    finish(mdp, mdp_path);
  }

  const std::filesystem::path manifest_path = dir / "manifest.json";
  std::ofstream manifest = open_out(manifest_path);
  Json m{{"config", to_json(cfg)},
         {"git_describe", git_describe()},
         {"seed", cfg.seed},
         {"format", csv ? "csv" : "jsonl"},
         {"rows", result.rows()},
         {"error", nullptr}};
  if (result.error) m["error"] = *result.error;
  manifest << m.dump(2) << '\n';
  finish(manifest, manifest_path);
}

}  // namespace lowrank
