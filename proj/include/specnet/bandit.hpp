#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace specnet {

/// One agent action: the MAC settings applied to every station for a control
/// period. The contention window is 2^(cw_exponent + 4) - 1.
struct NetworkConfig {
  int cw_exponent = 0;
  bool ampdu_enabled = false;
  bool rtscts_enabled = false;

  int cw() const { return (1 << (cw_exponent + 4)) - 1; }
  bool operator==(const NetworkConfig&) const = default;
};

inline constexpr int kMinCwExponent = 0;
inline constexpr int kMaxCwExponent = 6;
inline constexpr std::size_t kArmCount = 28;

/// Ordered by cw exponent, then aggregation, then RTS/CTS (false before true).
std::vector<NetworkConfig> enumerate_arms();
std::size_t arm_index(const NetworkConfig& cfg);
NetworkConfig arm_at(std::size_t index);
/// Exponent for a CW value of the form 2^(n+4) - 1; throws InvalidArgument otherwise.
int cw_exponent_for(int cw);
std::string to_string(const NetworkConfig& cfg);

struct ArmPosterior {
  double a = 1.0;
  double b = 1.0;
  std::int64_t pull_count = 0;

  double mean() const { return a / (a + b); }
};

struct AgentParams {
  std::uint64_t seed = 0;
  double decay = 1.0;  // in (0, 1]; 1 disables forgetting
  // Pseudo-observations credited per update: a += w * r, b += w * (1 - r).
  // 1 treats each reward like one Bernoulli trial.
  double evidence_weight = 1.0;
  std::size_t history_capacity = 20;
};

inline constexpr std::size_t kConvergenceWindow = 20;
inline constexpr double kConvergenceShare = 0.9;
inline constexpr double kMassFloor = 1e-6;

/// Thompson sampling over the 28 MAC configurations with Beta posteriors and
/// fractional updates for rewards in [0, 1].
///
/// The agent owns its random stream, so copies replay identically.
class ThompsonAgent {
 public:
  explicit ThompsonAgent(AgentParams params = {});

  /// Draws one Beta sample per arm and returns the argmax (lowest index wins ties).
  NetworkConfig select_arm();

  /// Credits `reward` to `arm` and records it in the selection history.
  /// Throws RewardOutOfRange outside [0, 1].
  void update(const NetworkConfig& arm, double reward);

  /// True once the most frequent arm among the last 20 selections holds at
  /// least 90% of them.
  bool has_converged() const;

  /// Back to uniform Beta(1, 1) priors, empty history and the original seed.
  void reset();

  const std::array<ArmPosterior, kArmCount>& posteriors() const { return posteriors_; }
  const std::deque<std::size_t>& history() const { return history_; }
  const AgentParams& params() const { return params_; }
  /// Arm with the highest posterior mean.
  NetworkConfig best_mean_arm() const;

  /// Flat text table, one line per arm: arm_index a b pull_count.
  void dump_posteriors(std::ostream& os) const;
  /// Replaces posteriors from a dump; throws ParseError on malformed input.
  void restore_posteriors(std::istream& is);

 private:
  double sample_beta(double a, double b);

  AgentParams params_;
  std::array<ArmPosterior, kArmCount> posteriors_{};
  std::deque<std::size_t> history_;
  std::mt19937_64 rng_;
};

}  // namespace specnet
