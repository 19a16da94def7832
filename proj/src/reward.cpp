#include "specnet/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specnet/error.hpp"

namespace specnet {
namespace {

double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

void RewardParams::validate() const {
  if (!(alpha > 0.0) || !(beta_s > 0.0) || !(t_max_bps > 0.0)) {
    throw Error(Errc::kInvalidArgument, "reward params alpha, beta and t_max must be positive");
  }
}

double jain_index(std::span<const double> xs) {
  if (xs.empty()) throw Error(Errc::kEmptyInput, "jain index of an empty vector");
  double sum = 0.0, sum_sq = 0.0;
  for (double x : xs) {
    if (!(x >= 0.0)) throw Error(Errc::kInvalidArgument, "negative or NaN throughput");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) throw Error(Errc::kAllZero, "jain index undefined for all-zero input");
  const double n = static_cast<double>(xs.size());
  // Rounding can push the ratio a few ulps past its bounds.
  return std::clamp(sum * sum / (n * sum_sq), 1.0 / n, 1.0);
}

ComponentRewards component_rewards(const MetricsSnapshot& s, const RewardParams& p) {
  p.validate();
  if (s.no_traffic) return {};
  ComponentRewards r;
  r.fairness = clip01(1.0 - p.alpha * (1.0 - s.jain_index));
  r.throughput = clip01(s.aggregate_throughput_bps / p.t_max_bps);
  r.latency = s.mean_latency_s > 0.0 ? clip01(p.beta_s / s.mean_latency_s) : 1.0;
  return r;
}

double combine(const ComponentRewards& r, const prefs::ObjectiveWeights& w) {
  prefs::validate(w);
  const double total =
      w.fairness * r.fairness + w.throughput * r.throughput + w.latency * r.latency;
  return clip01(total);
}

double combined_reward(const MetricsSnapshot& s, const prefs::ObjectiveWeights& w,
                       const RewardParams& p) {
  return combine(component_rewards(s, p), w);
}

}  // namespace specnet
