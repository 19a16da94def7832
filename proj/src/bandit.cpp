#include "specnet/bandit.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "specnet/error.hpp"

namespace specnet {

std::vector<NetworkConfig> enumerate_arms() {
  std::vector<NetworkConfig> arms;
  arms.reserve(kArmCount);
  for (int n = kMinCwExponent; n <= kMaxCwExponent; ++n) {
    for (bool ampdu : {false, true}) {
      for (bool rts : {false, true}) arms.push_back({n, ampdu, rts});
    }
  }
  return arms;
}

std::size_t arm_index(const NetworkConfig& cfg) {
  if (cfg.cw_exponent < kMinCwExponent || cfg.cw_exponent > kMaxCwExponent) {
    throw Error(Errc::kInvalidArgument, "cw exponent out of range");
  }
  return static_cast<std::size_t>(cfg.cw_exponent) * 4 + (cfg.ampdu_enabled ? 2 : 0) +
         (cfg.rtscts_enabled ? 1 : 0);
}

NetworkConfig arm_at(std::size_t index) {
  if (index >= kArmCount) throw Error(Errc::kInvalidArgument, "arm index out of range");
  return {static_cast<int>(index / 4), (index & 2) != 0, (index & 1) != 0};
}

int cw_exponent_for(int cw) {
  for (int n = kMinCwExponent; n <= kMaxCwExponent; ++n) {
    if ((1 << (n + 4)) - 1 == cw) return n;
  }
  throw Error(Errc::kInvalidArgument,
              "CW must be one of 15, 31, 63, 127, 255, 511, 1023; got " + std::to_string(cw));
}

std::string to_string(const NetworkConfig& cfg) {
  std::ostringstream os;
  os << "CW" << cfg.cw() << (cfg.ampdu_enabled ? "+agg" : "") << (cfg.rtscts_enabled ? "+rts" : "");
  return os.str();
}

ThompsonAgent::ThompsonAgent(AgentParams params) : params_(params), rng_(params.seed) {
  if (!(params_.decay > 0.0 && params_.decay <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "decay must be in (0, 1]");
  }
  if (!(params_.evidence_weight > 0.0)) {
    throw Error(Errc::kInvalidArgument, "evidence weight must be positive");
  }
  if (params_.history_capacity < kConvergenceWindow) {
    throw Error(Errc::kInvalidArgument, "history must hold at least the convergence window");
  }
}

double ThompsonAgent::sample_beta(double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng_);
  const double y = gb(rng_);
  // Both draws can underflow for masses near the floor.
  if (x + y <= 0.0) return a / (a + b);
  return x / (x + y);
}

NetworkConfig ThompsonAgent::select_arm() {
  std::size_t best = 0;
  double best_sample = -1.0;
  for (std::size_t i = 0; i < kArmCount; ++i) {
    const double theta = sample_beta(posteriors_[i].a, posteriors_[i].b);
    if (theta > best_sample) {
      best_sample = theta;
      best = i;
    }
  }
  return arm_at(best);
}

void ThompsonAgent::update(const NetworkConfig& arm, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw Error(Errc::kRewardOutOfRange, "reward must be in [0, 1], got " + std::to_string(reward));
  }
  const std::size_t pulled = arm_index(arm);
  const double decay = params_.decay;
  if (decay < 1.0) {
    for (auto& p : posteriors_) {
      p.a = std::max(decay * p.a, kMassFloor);
      p.b = std::max(decay * p.b, kMassFloor);
    }
  }
  auto& p = posteriors_[pulled];
  p.a += params_.evidence_weight * reward;
  p.b += params_.evidence_weight * (1.0 - reward);
  ++p.pull_count;

  history_.push_back(pulled);
  while (history_.size() > params_.history_capacity) history_.pop_front();
}

bool ThompsonAgent::has_converged() const {
  if (history_.size() < kConvergenceWindow) return false;
  std::array<int, kArmCount> counts{};
  for (auto it = history_.end() - kConvergenceWindow; it != history_.end(); ++it) ++counts[*it];
  const int modal = *std::max_element(counts.begin(), counts.end());
  // 18 of 20 is exactly 0.9; compare in integers.
  return modal * 10 >= static_cast<int>(kConvergenceWindow) * 9;
}

void ThompsonAgent::reset() {
  posteriors_.fill(ArmPosterior{});
  history_.clear();
  rng_.seed(params_.seed);
}

NetworkConfig ThompsonAgent::best_mean_arm() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kArmCount; ++i) {
    if (posteriors_[i].mean() > posteriors_[best].mean()) best = i;
  }
  return arm_at(best);
}

void ThompsonAgent::dump_posteriors(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < kArmCount; ++i) {
    const auto& p = posteriors_[i];
    os << i << ' ' << p.a << ' ' << p.b << ' ' << p.pull_count << '\n';
  }
  os.precision(old_precision);
}

void ThompsonAgent::restore_posteriors(std::istream& is) {
  std::array<ArmPosterior, kArmCount> loaded{};
  std::array<bool, kArmCount> seen{};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream row(line);
    std::size_t index = 0;
    ArmPosterior p;
    if (!(row >> index >> p.a >> p.b >> p.pull_count) || index >= kArmCount || seen[index] ||
        !(p.a > 0.0) || !(p.b > 0.0) || p.pull_count < 0) {
      throw Error(Errc::kParseError, "bad posterior row: '" + line + "'");
    }
    loaded[index] = p;
    seen[index] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) != static_cast<long>(kArmCount)) {
    throw Error(Errc::kParseError, "posterior table must list all 28 arms");
  }
  posteriors_ = loaded;
}

}  // namespace specnet
