#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specnet/bandit.hpp"
#include "specnet/macsim.hpp"
#include "specnet/reward.hpp"
#include "specnet/scenario.hpp"

namespace specnet {

enum class AgentKind {
  kMab,    // Thompson sampling over the 28 arms
  kFixed,  // one arm for the whole run
  kDcf,    // legacy 802.11 defaults: binary exponential backoff 15..1023
};

struct AgentChoice {
  AgentKind kind = AgentKind::kMab;
  NetworkConfig fixed{0, true, false};

  static AgentChoice mab() { return {}; }
  static AgentChoice fixed_arm(const NetworkConfig& cfg) { return {AgentKind::kFixed, cfg}; }
  /// 802.11 defaults: aggregation on, RTS/CTS off, exponential backoff.
  static AgentChoice dcf_baseline() { return {AgentKind::kDcf, NetworkConfig{0, true, false}}; }
};

std::string to_string(const AgentChoice& agent);

struct PeriodRecord {
  std::int64_t period = 0;
  NetworkConfig config;
  MetricsSnapshot snapshot;
  ComponentRewards components;
  double reward = 0.0;
  prefs::ObjectiveWeights weights;
  bool converged = false;
  bool epoch_start = false;  // stations were added and the agent reset
  std::size_t n_stations = 0;
};

/// Means over a window of control periods. Latency and fairness skip periods
/// without traffic.
struct SteadyStats {
  double throughput_bps = 0.0;
  double mean_latency_s = 0.0;
  double p90_latency_s = 0.0;
  double jain = 0.0;
  double reward = 0.0;
  int periods = 0;
};

SteadyStats steady_stats(std::span<const PeriodRecord> window);

/// Derived seeds for the independent random streams of one run.
std::uint64_t agent_seed_for(std::uint64_t run_seed);

/// One world plus one agent, advanced one control period at a time.
class ControlLoop {
 public:
  ControlLoop(ScenarioSpec spec, AgentChoice agent, std::uint64_t seed);

  /// select -> simulate one period -> reward -> update.
  PeriodRecord step();

  /// Takes effect from the next step().
  void set_weights(const prefs::ObjectiveWeights& w);
  const prefs::ObjectiveWeights& weights() const { return weights_; }

  /// Rebuilds the world and the agent from the original seed.
  void reset();

  const ScenarioSpec& spec() const { return spec_; }
  const AgentChoice& agent_choice() const { return agent_choice_; }
  const ThompsonAgent& agent() const { return agent_; }
  const macsim::World& world() const { return world_; }
  std::int64_t period() const { return period_; }

 private:
  macsim::World make_world() const;

  ScenarioSpec spec_;
  AgentChoice agent_choice_;
  std::uint64_t seed_;
  prefs::ObjectiveWeights weights_;
  macsim::World world_;
  ThompsonAgent agent_;
  std::optional<macsim::DynamicSchedule> schedule_;
  std::int64_t period_ = 0;
};

struct EpochRecord {
  int start_period = 0;
  int end_period = 0;  // exclusive
  std::size_t n_stations = 0;
  int convergence_period = -1;  // absolute period index, -1 if never
  int steady_start = 0;
  NetworkConfig converged_config;
  SteadyStats steady;

  int periods_to_converge() const {
    return convergence_period < 0 ? -1 : convergence_period - start_period + 1;
  }
};

struct RunResult {
  int run = 0;
  std::uint64_t seed = 0;
  std::vector<PeriodRecord> periods;
  int convergence_period = -1;  // first period the heuristic fired, -1 if never
  int steady_start = 0;
  SteadyStats steady;
  std::vector<EpochRecord> epochs;  // one epoch unless a dynamic schedule is set
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)

  bool operator==(const MetricSummary&) const = default;
};

struct SummaryRow {
  std::string label;
  int n_runs = 0;
  MetricSummary throughput_bps;
  MetricSummary mean_latency_s;
  MetricSummary p90_latency_s;
  MetricSummary jain;
  MetricSummary reward;

  bool operator==(const SummaryRow&) const = default;
};

MetricSummary mean_and_std(std::span<const double> xs);

/// Mean and sample std per metric. Throws InsufficientRuns below two runs.
SummaryRow summarize(const std::string& label, std::span<const SteadyStats> runs);

struct ExperimentResult {
  std::string scenario;
  AgentChoice agent;
  std::vector<RunResult> runs;
  std::optional<SummaryRow> summary;  // present with two or more runs
};

/// Warm-up ends at the first period the convergence heuristic fires, or at
/// warmup_max; the steady window then covers the rest of the run but never
/// fewer than min_steady_periods.
int steady_window_start(int begin, int end, int convergence_period, int warmup_max, int min_steady);

RunResult run_scenario(const ScenarioSpec& spec, const AgentChoice& agent, std::uint64_t seed,
                       int run_index = 0);

/// Requires spec.dynamic. The agent is reset at every station addition and
/// each epoch gets its own convergence and steady-state accounting.
RunResult run_dynamic(const ScenarioSpec& spec, const AgentChoice& agent, std::uint64_t seed,
                      int run_index = 0);

/// spec.n_runs runs with seeds base_seed + i.
ExperimentResult run_experiment(const ScenarioSpec& spec, const AgentChoice& agent,
                                std::uint64_t base_seed);

struct SweepRow {
  NetworkConfig config;
  std::vector<SteadyStats> runs;
  SummaryRow summary;
};

struct SweepTable {
  std::string scenario;
  std::vector<SweepRow> rows;  // enumerate_arms() order
  std::size_t best_throughput = 0;
  std::size_t best_latency = 0;   // lowest p90
  std::size_t best_fairness = 0;
  std::size_t best_reward = 0;
};

/// Every arm as a fixed agent over the same seeds.
SweepTable sweep_fixed_configs(const ScenarioSpec& spec, std::span<const std::uint64_t> seeds);

std::vector<std::uint64_t> seed_range(std::uint64_t base_seed, int count);

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace specnet
