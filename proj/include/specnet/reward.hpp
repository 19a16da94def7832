#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specnet/prefs.hpp"

namespace specnet {

/// Aggregate MAC statistics for one control period.
struct MetricsSnapshot {
  double aggregate_throughput_bps = 0.0;
  double mean_latency_s = 0.0;
  double p90_latency_s = 0.0;
  std::vector<double> per_station_throughput_bps;
  double jain_index = 0.0;
  std::int64_t control_period_index = 0;
  double sim_time_s = 0.0;  // end of the period
  // Set when no packet was acknowledged in the period. Latency and fairness
  // fields are zero in that case.
  bool no_traffic = true;
  std::int64_t delivered_packets = 0;
  std::int64_t dropped_packets = 0;
};

struct RewardParams {
  double alpha = 1.0;           // fairness sensitivity
  double beta_s = 0.005;        // latency at which the latency reward saturates
  double t_max_bps = 114.72e6;  // throughput ceiling

  void validate() const;
};

struct ComponentRewards {
  double fairness = 0.0;
  double throughput = 0.0;
  double latency = 0.0;
};

/// (sum x)^2 / (n * sum x^2). Throws EmptyInput, AllZero, or InvalidArgument
/// for negative entries.
double jain_index(std::span<const double> xs);

/// Each component clipped to [0, 1]. A NoTraffic snapshot scores zero on
/// every component; zero latency with traffic scores a full latency reward.
ComponentRewards component_rewards(const MetricsSnapshot& s, const RewardParams& p);

double combine(const ComponentRewards& r, const prefs::ObjectiveWeights& w);

double combined_reward(const MetricsSnapshot& s, const prefs::ObjectiveWeights& w,
                       const RewardParams& p);

}  // namespace specnet
