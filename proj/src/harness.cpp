#include "specnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "specnet/error.hpp"

namespace specnet {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int first_converged(std::span<const PeriodRecord> periods, int begin, int end) {
  for (int p = begin; p < end; ++p) {
    if (periods[static_cast<std::size_t>(p)].converged) return p;
  }
  return -1;
}

EpochRecord make_epoch(const ScenarioSpec& spec, std::span<const PeriodRecord> periods, int begin,
                       int end) {
  EpochRecord e;
  e.start_period = begin;
  e.end_period = end;
  e.n_stations = periods[static_cast<std::size_t>(begin)].n_stations;
  e.convergence_period = first_converged(periods, begin, end);
  e.steady_start = steady_window_start(begin, end, e.convergence_period, spec.warmup_max,
                                       spec.min_steady_periods);
  e.converged_config = periods[static_cast<std::size_t>(e.convergence_period >= 0 ? e.convergence_period
                                                                                  : end - 1)]
                           .config;
  e.steady = steady_stats(periods.subspan(static_cast<std::size_t>(e.steady_start),
                                          static_cast<std::size_t>(end - e.steady_start)));
  return e;
}

}  // namespace

std::string to_string(const AgentChoice& agent) {
  switch (agent.kind) {
    case AgentKind::kMab: return "mab";
    case AgentKind::kFixed: return "fixed:" + to_string(agent.fixed);
    case AgentKind::kDcf: return "dcf";
  }
  return "unknown";
}

std::uint64_t agent_seed_for(std::uint64_t run_seed) { return splitmix64(run_seed ^ 0xa6e47ULL); }

SteadyStats steady_stats(std::span<const PeriodRecord> window) {
  SteadyStats out;
  out.periods = static_cast<int>(window.size());
  if (window.empty()) return out;
  int with_traffic = 0;
  for (const auto& r : window) {
    out.throughput_bps += r.snapshot.aggregate_throughput_bps;
    out.reward += r.reward;
    if (r.snapshot.no_traffic) continue;
    ++with_traffic;
    out.mean_latency_s += r.snapshot.mean_latency_s;
    out.p90_latency_s += r.snapshot.p90_latency_s;
    out.jain += r.snapshot.jain_index;
  }
  const double n = static_cast<double>(window.size());
  out.throughput_bps /= n;
  out.reward /= n;
  if (with_traffic > 0) {
    out.mean_latency_s /= with_traffic;
    out.p90_latency_s /= with_traffic;
    out.jain /= with_traffic;
  }
  return out;
}

ControlLoop::ControlLoop(ScenarioSpec spec, AgentChoice agent, std::uint64_t seed)
    : spec_(std::move(spec)),
      agent_choice_(agent),
      seed_(seed),
      weights_(spec_.weights),
      world_(make_world()),
      agent_(AgentParams{agent_seed_for(seed), spec_.agent_decay, spec_.agent_evidence_weight,
                         kConvergenceWindow}) {
  spec_.validate();
  if (agent_choice_.kind != AgentKind::kMab) arm_index(agent_choice_.fixed);
  reset();
}

macsim::World ControlLoop::make_world() const {
  macsim::WorldConfig cfg;
  cfg.phy = spec_.phy;
  cfg.timings = spec_.timings;
  cfg.seed = seed_;
  cfg.mode = agent_choice_.kind == AgentKind::kDcf ? macsim::ContentionMode::kBinaryExponential
                                                   : macsim::ContentionMode::kFixed;
  macsim::World world(cfg);
  world.add_random_stations(spec_.n_stations, spec_.placement, spec_.traffic);
  return world;
}

void ControlLoop::reset() {
  world_ = make_world();
  agent_.reset();
  period_ = 0;
  schedule_.reset();
  if (spec_.dynamic) {
    schedule_.emplace(spec_.dynamic->interval_s, spec_.dynamic->stations_per_step, spec_.placement,
                      spec_.traffic);
  }
}

void ControlLoop::set_weights(const prefs::ObjectiveWeights& w) {
  prefs::validate(w);
  weights_ = w;
}

PeriodRecord ControlLoop::step() {
  PeriodRecord rec;
  rec.period = period_;
  if (schedule_ && schedule_->apply(world_, world_.now_s())) {
    agent_.reset();
    rec.epoch_start = true;
  }
  rec.n_stations = world_.station_count();
  rec.config = agent_choice_.kind == AgentKind::kMab ? agent_.select_arm() : agent_choice_.fixed;
  rec.snapshot = world_.run_control_period(rec.config, spec_.control_period_s);
  rec.weights = weights_;
  rec.components = component_rewards(rec.snapshot, spec_.reward_params);
  rec.reward = combine(rec.components, weights_);
  // Fixed agents still feed the history so the warm-up heuristic applies to them too.
  agent_.update(rec.config, rec.reward);
  rec.converged = agent_.has_converged();
  ++period_;
  return rec;
}

int steady_window_start(int begin, int end, int convergence_period, int warmup_max, int min_steady) {
  int start = begin + warmup_max;
  if (convergence_period >= begin && convergence_period < start) start = convergence_period + 1;
  if (end - start < min_steady) start = end - min_steady;
  return std::clamp(start, begin, end);
}

RunResult run_scenario(const ScenarioSpec& spec, const AgentChoice& agent, std::uint64_t seed,
                       int run_index) {
  ControlLoop loop(spec, agent, seed);
  RunResult out;
  out.run = run_index;
  out.seed = seed;
  out.periods.reserve(static_cast<std::size_t>(spec.duration_periods));
  for (int p = 0; p < spec.duration_periods; ++p) out.periods.push_back(loop.step());

  std::vector<int> boundaries{0};
  for (int p = 1; p < spec.duration_periods; ++p) {
    if (out.periods[static_cast<std::size_t>(p)].epoch_start) boundaries.push_back(p);
  }
  boundaries.push_back(spec.duration_periods);
  for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
    out.epochs.push_back(make_epoch(spec, out.periods, boundaries[i], boundaries[i + 1]));
  }
  out.convergence_period = out.epochs.front().convergence_period;
  out.steady_start = out.epochs.front().steady_start;
  out.steady = out.epochs.front().steady;
  if (out.epochs.size() > 1) {
    out.steady_start = steady_window_start(0, spec.duration_periods, out.convergence_period,
                                           spec.warmup_max, spec.min_steady_periods);
    out.steady = steady_stats(std::span(out.periods).subspan(static_cast<std::size_t>(out.steady_start)));
  }
  return out;
}

RunResult run_dynamic(const ScenarioSpec& spec, const AgentChoice& agent, std::uint64_t seed,
                      int run_index) {
  if (!spec.dynamic) throw Error(Errc::kInvalidArgument, "scenario has no dynamic schedule");
  return run_scenario(spec, agent, seed, run_index);
}

MetricSummary mean_and_std(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(Errc::kInsufficientRuns, "need at least two runs for a std");
  // Sorting first makes the result independent of run order down to the last bit.
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : sorted) sum += x;
  const double n = static_cast<double>(sorted.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

SummaryRow summarize(const std::string& label, std::span<const SteadyStats> runs) {
  if (runs.size() < 2) {
    throw Error(Errc::kInsufficientRuns, "summary needs at least two runs, got " +
                                             std::to_string(runs.size()));
  }
  auto column = [&](double SteadyStats::*field) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(r.*field);
    return mean_and_std(xs);
  };
  SummaryRow row;
  row.label = label;
  row.n_runs = static_cast<int>(runs.size());
  row.throughput_bps = column(&SteadyStats::throughput_bps);
  row.mean_latency_s = column(&SteadyStats::mean_latency_s);
  row.p90_latency_s = column(&SteadyStats::p90_latency_s);
  row.jain = column(&SteadyStats::jain);
  row.reward = column(&SteadyStats::reward);
  return row;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base_seed, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  return seeds;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

ExperimentResult run_experiment(const ScenarioSpec& spec, const AgentChoice& agent,
                                std::uint64_t base_seed) {
  ExperimentResult out;
  out.scenario = spec.name;
  out.agent = agent;
  out.runs.resize(static_cast<std::size_t>(spec.n_runs));
  parallel_for(out.runs.size(), [&](std::size_t i) {
    out.runs[i] = run_scenario(spec, agent, base_seed + i, static_cast<int>(i));
  });
  if (out.runs.size() >= 2) {
    std::vector<SteadyStats> stats;
    for (const auto& r : out.runs) stats.push_back(r.steady);
    out.summary = summarize(to_string(agent), stats);
  }
  return out;
}

SweepTable sweep_fixed_configs(const ScenarioSpec& spec, std::span<const std::uint64_t> seeds) {
  const auto arms = enumerate_arms();
  SweepTable table;
  table.scenario = spec.name;
  table.rows.resize(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) {
    table.rows[a].config = arms[a];
    table.rows[a].runs.resize(seeds.size());
  }
  parallel_for(arms.size() * seeds.size(), [&](std::size_t job) {
    const std::size_t a = job / seeds.size();
    const std::size_t s = job % seeds.size();
    table.rows[a].runs[s] =
        run_scenario(spec, AgentChoice::fixed_arm(arms[a]), seeds[s], static_cast<int>(s)).steady;
  });
  for (auto& row : table.rows) {
    row.summary = summarize(to_string(row.config), row.runs);
  }
  auto best_by = [&](auto key, bool maximize) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      const double v = key(table.rows[i].summary), b = key(table.rows[best].summary);
      if (maximize ? v > b : v < b) best = i;
    }
    return best;
  };
  table.best_throughput = best_by([](const SummaryRow& r) { return r.throughput_bps.mean; }, true);
  table.best_latency = best_by([](const SummaryRow& r) { return r.p90_latency_s.mean; }, false);
  table.best_fairness = best_by([](const SummaryRow& r) { return r.jain.mean; }, true);
  table.best_reward = best_by([](const SummaryRow& r) { return r.reward.mean; }, true);
  return table;
}

}  // namespace specnet
