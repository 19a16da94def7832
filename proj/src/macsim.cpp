#include "specnet/macsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "specnet/error.hpp"

namespace specnet::macsim {
namespace {

constexpr Nanos kNever = std::numeric_limits<Nanos>::max();

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Nanos us_to_ns(double us) { return static_cast<Nanos>(std::llround(us * 1000.0)); }

Nanos seconds_to_ns(double s) { return static_cast<Nanos>(std::llround(s * kNanosPerSecond)); }

Nanos airtime_ns(std::int64_t bits, double rate_bps) {
  return static_cast<Nanos>(std::ceil(static_cast<double>(bits) * 1e9 / rate_bps));
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  const std::size_t idx = rank == 0 ? 0 : rank - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
  return values[idx];
}

}  // namespace

PhyProfile PhyProfile::mcs11() { return {}; }

PhyProfile PhyProfile::mcs0() {
  PhyProfile p;
  p.mcs_index = 0;
  p.phy_rate_bps = 8.6e6;
  p.sensitivity_dbm = -82.0;
  return p;
}

PhyProfile PhyProfile::for_mcs(int mcs) {
  if (mcs == 11) return mcs11();
  if (mcs == 0) return mcs0();
  throw Error(Errc::kInvalidArgument, "only MCS 0 and MCS 11 profiles are defined, got " +
                                          std::to_string(mcs));
}

void PhyProfile::validate() const {
  if (!(phy_rate_bps > 0.0) || !(preamble_us >= 0.0) || !(pathloss_exponent > 0.0)) {
    throw Error(Errc::kInvalidArgument, "invalid PHY profile");
  }
}

void MacTimings::validate() const {
  const bool positive = slot_us > 0 && sifs_us > 0 && difs_us > 0 && ack_us > 0 && rts_us > 0 &&
                        cts_us > 0 && mac_header_bytes > 0 && ampdu_limit_bytes > 0 &&
                        retry_limit > 0 && queue_limit_packets > 0 && max_ppdu_us > 0;
  if (!positive) throw Error(Errc::kInvalidArgument, "MAC timings must be positive");
  if (std::abs(difs_us - (sifs_us + 2.0 * slot_us)) > 1e-9) {
    throw Error(Errc::kInvalidArgument, "DIFS must equal SIFS + 2 slots");
  }
}

int packet_bytes(const Traffic& traffic) {
  return std::visit([](const auto& t) { return t.packet_bytes; }, traffic);
}

int max_aggregate(int payload_bytes, const PhyProfile& phy, const MacTimings& t) {
  const std::int64_t mpdu_bytes = payload_bytes + t.mac_header_bytes;
  int n = static_cast<int>(t.ampdu_limit_bytes / mpdu_bytes);
  const Nanos budget = us_to_ns(t.max_ppdu_us) - us_to_ns(phy.preamble_us);
  while (n > 1 && airtime_ns(8 * n * mpdu_bytes, phy.phy_rate_bps) > budget) --n;
  return std::max(1, n);
}

double frame_exchange_duration(int payload_bytes, int n_aggregated, const NetworkConfig& cfg,
                               const PhyProfile& phy, const MacTimings& t) {
  if (payload_bytes < 0 || n_aggregated < 1) {
    throw Error(Errc::kInvalidArgument, "payload must be >= 0 and at least one MPDU");
  }
  const std::int64_t mpdu_bytes = payload_bytes + t.mac_header_bytes;
  if (cfg.ampdu_enabled ? n_aggregated > max_aggregate(payload_bytes, phy, t) : n_aggregated != 1) {
    throw Error(Errc::kAggregationLimitExceeded,
                std::to_string(n_aggregated) + " MPDUs of " + std::to_string(mpdu_bytes) +
                    " B do not fit the aggregation settings");
  }
  Nanos total = us_to_ns(phy.preamble_us) + airtime_ns(8 * n_aggregated * mpdu_bytes, phy.phy_rate_bps) +
                us_to_ns(t.sifs_us) + us_to_ns(t.ack_us);
  if (cfg.rtscts_enabled) total += us_to_ns(t.rts_us) + us_to_ns(t.cts_us) + 2 * us_to_ns(t.sifs_us);
  return static_cast<double>(total) / kNanosPerSecond;
}

double received_power_dbm(const Position& tx, const Position& rx, const PhyProfile& phy) {
  const double distance = std::max(1.0, std::hypot(tx.x - rx.x, tx.y - rx.y));
  return phy.tx_power_dbm - phy.reference_loss_db -
         10.0 * phy.pathloss_exponent * std::log10(distance);
}

bool link_ok(const Position& tx, const Position& rx, const PhyProfile& phy) {
  return received_power_dbm(tx, rx, phy) >= phy.sensitivity_dbm;
}

Position Placement::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (topology == Topology::kDisc) {
    const double r = extent_m * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    return {r * std::cos(theta), r * std::sin(theta)};
  }
  const double half = extent_m / 2.0;
  const double x = -half + extent_m * unit(rng);
  const double y = -half + extent_m * unit(rng);
  return {x, y};
}

World::World(WorldConfig config)
    : config_(config),
      backoff_rng_(seeded_engine(config.seed, 0xb0ff)),
      topology_rng_(seeded_engine(config.seed, 0x7090)) {
  config_.phy.validate();
  config_.timings.validate();
  if (config_.cw_min < 1 || config_.cw_max < config_.cw_min) {
    throw Error(Errc::kInvalidArgument, "need 1 <= cw_min <= cw_max");
  }
  const auto& t = config_.timings;
  slot_ = us_to_ns(t.slot_us);
  sifs_ = us_to_ns(t.sifs_us);
  difs_ = us_to_ns(t.difs_us);
  ack_ = us_to_ns(t.ack_us);
  rts_ = us_to_ns(t.rts_us);
  cts_ = us_to_ns(t.cts_us);
  preamble_ = us_to_ns(config_.phy.preamble_us);
}

void World::add_station(const StationSpec& spec) {
  StationState s;
  s.spec = spec;
  s.reachable = link_ok(spec.position, config_.ap, config_.phy);
  s.cw = config_.cw_min;
  const Nanos now = std::max(period_start_, channel_free_);
  if (const auto* cbr = std::get_if<ConstantBitRate>(&spec.traffic)) {
    if (!(cbr->interval_s > 0.0) || cbr->packet_bytes <= 0) {
      throw Error(Errc::kInvalidArgument, "CBR traffic needs a positive interval and packet size");
    }
    s.interval = seconds_to_ns(cbr->interval_s);
    // Random phase so that periodic sources are not synchronised.
    std::uniform_int_distribution<Nanos> phase(0, s.interval - 1);
    s.next_arrival = period_start_ + phase(topology_rng_);
  } else {
    if (packet_bytes(spec.traffic) <= 0) throw Error(Errc::kInvalidArgument, "packet size must be positive");
    s.saturated = true;
    s.head_since = now;
    s.contending = true;
    s.backoff = std::uniform_int_distribution<int>(0, s.cw)(backoff_rng_);
    s.countdown_start = aligned_start(now);
  }
  stations_.push_back(std::move(s));
}

void World::add_random_stations(int count, const Placement& placement, const Traffic& traffic) {
  for (int i = 0; i < count; ++i) add_station({placement.sample(topology_rng_), traffic});
}

std::size_t World::reachable_station_count() const {
  return static_cast<std::size_t>(
      std::count_if(stations_.begin(), stations_.end(), [](const auto& s) { return s.reachable; }));
}

std::vector<Position> World::station_positions() const {
  std::vector<Position> out;
  out.reserve(stations_.size());
  for (const auto& s : stations_) out.push_back(s.spec.position);
  return out;
}

int World::current_cw(const StationState& s, const NetworkConfig& cfg) const {
  return config_.mode == ContentionMode::kFixed ? cfg.cw() : s.cw;
}

Nanos World::aligned_start(Nanos ready_at) const {
  const Nanos base = channel_free_ + difs_;
  if (ready_at <= base) return base;
  return base + (ready_at - base + slot_ - 1) / slot_ * slot_;
}

void World::start_contention(StationState& s, Nanos ready_at, const NetworkConfig& cfg) {
  s.contending = true;
  s.backoff = std::uniform_int_distribution<int>(0, current_cw(s, cfg))(backoff_rng_);
  s.countdown_start = aligned_start(ready_at);
}

void World::handle_arrival(StationState& s, const NetworkConfig& cfg) {
  const Nanos t = s.next_arrival;
  s.next_arrival += s.interval;
  if (static_cast<int>(s.queue.size()) >= config_.timings.queue_limit_packets) {
    ++period_dropped_;
    return;
  }
  s.queue.push_back(t);
  if (!s.contending) start_contention(s, t, cfg);
}

Nanos World::exchange_ns(int payload_bytes, int n, const NetworkConfig& cfg) const {
  const std::int64_t bits = 8LL * n * (payload_bytes + config_.timings.mac_header_bytes);
  Nanos total = preamble_ + airtime_ns(bits, config_.phy.phy_rate_bps) + sifs_ + ack_;
  if (cfg.rtscts_enabled) total += rts_ + sifs_ + cts_ + sifs_;
  return total;
}

// Without RTS/CTS the whole data frame and the ACK timeout are lost; with it
// only the RTS and the CTS timeout.
Nanos World::failed_exchange_ns(int payload_bytes, int n, const NetworkConfig& cfg) const {
  if (cfg.rtscts_enabled) return rts_ + sifs_ + cts_;
  return exchange_ns(payload_bytes, n, cfg);
}

int World::aggregate_size(const StationState& s, const NetworkConfig& cfg) const {
  if (!cfg.ampdu_enabled) return 1;
  const int limit = max_aggregate(packet_bytes(s.spec.traffic), config_.phy, config_.timings);
  if (s.saturated) return limit;
  return std::min(limit, static_cast<int>(s.queue.size()));
}

void World::handle_transmissions(Nanos when, const NetworkConfig& cfg) {
  std::vector<std::size_t> senders;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    const auto& s = stations_[i];
    if (s.contending && s.tx_time(slot_) == when) senders.push_back(i);
  }

  // Everyone else freezes their counter for the busy period.
  for (auto& s : stations_) {
    if (!s.contending || s.tx_time(slot_) == when) continue;
    if (s.countdown_start < when) s.backoff -= static_cast<int>((when - s.countdown_start) / slot_);
  }

  const bool success = senders.size() == 1 && stations_[senders.front()].reachable;
  Nanos busy = 0;
  for (std::size_t i : senders) {
    const auto& s = stations_[i];
    const int bytes = packet_bytes(s.spec.traffic);
    const int n = aggregate_size(s, cfg);
    busy = std::max(busy, success ? exchange_ns(bytes, n, cfg) : failed_exchange_ns(bytes, n, cfg));
  }
  channel_free_ = when + busy;

  for (std::size_t i : senders) {
    auto& s = stations_[i];
    const int bytes = packet_bytes(s.spec.traffic);
    const int n = aggregate_size(s, cfg);
    if (success) {
      for (int k = 0; k < n; ++k) {
        Nanos enqueued = s.head_since;
        if (!s.saturated) {
          enqueued = s.queue.front();
          s.queue.pop_front();
        }
        period_latencies_.push_back(static_cast<double>(channel_free_ - enqueued) / kNanosPerSecond);
      }
      if (s.saturated) s.head_since = channel_free_;
      s.period_bits += 8LL * n * bytes;
      s.retries = 0;
      s.cw = config_.cw_min;
    } else if (++s.retries > config_.timings.retry_limit) {
      if (s.saturated) {
        s.head_since = channel_free_;
      } else {
        s.queue.erase(s.queue.begin(), s.queue.begin() + n);
      }
      period_dropped_ += n;
      s.retries = 0;
      s.cw = config_.cw_min;
    } else {
      s.cw = std::min(2 * (s.cw + 1) - 1, config_.cw_max);
    }

    if (s.has_packets()) {
      start_contention(s, channel_free_, cfg);
    } else {
      s.contending = false;
    }
  }

  for (auto& s : stations_) {
    if (s.contending) s.countdown_start = std::max(s.countdown_start, channel_free_ + difs_);
  }
}

MetricsSnapshot World::run_control_period(const NetworkConfig& cfg, double duration_s) {
  arm_index(cfg);  // validates the exponent
  if (!(duration_s > 0.0)) throw Error(Errc::kInvalidArgument, "period duration must be positive");
  const Nanos duration = seconds_to_ns(duration_s);
  const Nanos period_end = period_start_ + duration;

  period_latencies_.clear();
  period_dropped_ = 0;
  for (auto& s : stations_) s.period_bits = 0;

  while (true) {
    Nanos next_tx = kNever;
    Nanos next_arrival = kNever;
    StationState* arriving = nullptr;
    for (auto& s : stations_) {
      if (s.contending) next_tx = std::min(next_tx, s.tx_time(slot_));
      if (!s.saturated && s.next_arrival < next_arrival) {
        next_arrival = s.next_arrival;
        arriving = &s;
      }
    }
    if (std::min(next_tx, next_arrival) >= period_end) break;
    if (next_arrival <= next_tx) {
      handle_arrival(*arriving, cfg);
    } else {
      handle_transmissions(next_tx, cfg);
    }
  }

  MetricsSnapshot snap;
  snap.control_period_index = period_index_;
  snap.sim_time_s = static_cast<double>(period_end) / kNanosPerSecond;
  snap.dropped_packets = period_dropped_;
  snap.delivered_packets = static_cast<std::int64_t>(period_latencies_.size());
  snap.per_station_throughput_bps.reserve(stations_.size());
  std::int64_t total_bits = 0;
  for (const auto& s : stations_) {
    snap.per_station_throughput_bps.push_back(static_cast<double>(s.period_bits) / duration_s);
    total_bits += s.period_bits;
  }
  snap.aggregate_throughput_bps = static_cast<double>(total_bits) / duration_s;
  snap.no_traffic = period_latencies_.empty();
  if (!snap.no_traffic) {
    double sum = 0.0;
    for (double l : period_latencies_) sum += l;
    snap.mean_latency_s = sum / static_cast<double>(period_latencies_.size());
    snap.p90_latency_s = percentile_nearest_rank(period_latencies_, 0.9);
    snap.jain_index = jain_index(snap.per_station_throughput_bps);
  }

  total_dropped_ += period_dropped_;
  period_start_ = period_end;
  ++period_index_;
  return snap;
}

DynamicSchedule::DynamicSchedule(double interval_s, int stations_per_step, Placement placement,
                                 Traffic traffic)
    : interval_s_(interval_s),
      stations_per_step_(stations_per_step),
      placement_(placement),
      traffic_(traffic) {
  if (!(interval_s > 0.0) || stations_per_step < 0) {
    throw Error(Errc::kInvalidArgument, "dynamic schedule needs a positive interval");
  }
}

bool DynamicSchedule::apply(World& world, double t_s) {
  bool crossed = false;
  while ((steps_applied_ + 1) * interval_s_ <= t_s + 1e-9) {
    world.add_random_stations(stations_per_step_, placement_, traffic_);
    ++steps_applied_;
    crossed = true;
  }
  return crossed;
}

}  // namespace specnet::macsim
