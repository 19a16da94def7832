#pragma once

// Discrete-event model of single-channel CSMA/CA uplink traffic towards one
// AP. All stations share one collision domain; the link budget only decides
// whether a frame can be received by the AP.
//
// Time is kept in integer nanoseconds so that slot boundaries compare exactly
// and replays are bit-identical.

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "specnet/bandit.hpp"
#include "specnet/reward.hpp"

namespace specnet::macsim {

using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

struct PhyProfile {
  int mcs_index = 11;
  double phy_rate_bps = 143.4e6;
  double sensitivity_dbm = -52.0;
  double tx_power_dbm = 20.0;
  double pathloss_exponent = 2.0;
  double reference_loss_db = 46.6777;  // 5 GHz free-space loss at 1 m
  double preamble_us = 44.0;

  static PhyProfile mcs11();
  static PhyProfile mcs0();
  static PhyProfile for_mcs(int mcs);
  void validate() const;
};

struct MacTimings {
  double slot_us = 9.0;
  double sifs_us = 16.0;
  double difs_us = 34.0;
  double ack_us = 32.0;
  double rts_us = 32.0;
  double cts_us = 32.0;
  int mac_header_bytes = 40;
  int ampdu_limit_bytes = 65536;
  double max_ppdu_us = 5484.0;  // longest PPDU, preamble included
  int retry_limit = 7;
  int queue_limit_packets = 500;

  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

/// Always backlogged with packets of the given size.
struct FullBuffer {
  int packet_bytes = 1500;
};

/// One packet every `interval_s`.
struct ConstantBitRate {
  int packet_bytes = 1500;
  double interval_s = 600e-6;

  double rate_bps() const { return packet_bytes * 8.0 / interval_s; }
  static ConstantBitRate from_rate(int packet_bytes, double rate_bps) {
    return {packet_bytes, packet_bytes * 8.0 / rate_bps};
  }
};

using Traffic = std::variant<FullBuffer, ConstantBitRate>;

int packet_bytes(const Traffic& traffic);

struct StationSpec {
  Position position;
  Traffic traffic = FullBuffer{};
};

enum class ContentionMode {
  kFixed,               // CWmin = CWmax = the configured CW
  kBinaryExponential,   // legacy DCF doubling between cw_min and cw_max
};

struct WorldConfig {
  PhyProfile phy;
  MacTimings timings;
  Position ap;
  ContentionMode mode = ContentionMode::kFixed;
  int cw_min = 15;
  int cw_max = 1023;
  std::uint64_t seed = 1;
};

/// Airtime of one (possibly aggregated) frame exchange including the optional
/// RTS/CTS handshake, preamble, payload and headers, SIFS and the (block) ACK.
/// Throws AggregationLimitExceeded when the aggregate does not fit.
double frame_exchange_duration(int payload_bytes, int n_aggregated, const NetworkConfig& cfg,
                               const PhyProfile& phy, const MacTimings& t);

/// Largest number of MPDUs of this size that fit in one A-MPDU, bounded by
/// both the byte limit and the PPDU duration limit.
int max_aggregate(int payload_bytes, const PhyProfile& phy, const MacTimings& t);

/// Log-distance received power; distances under 1 m are treated as 1 m.
double received_power_dbm(const Position& tx, const Position& rx, const PhyProfile& phy);
bool link_ok(const Position& tx, const Position& rx, const PhyProfile& phy);

enum class Topology { kDisc, kSquare };

struct Placement {
  Topology topology = Topology::kDisc;
  double extent_m = 10.0;  // disc radius or square side

  Position sample(std::mt19937_64& rng) const;
};

class World {
 public:
  explicit World(WorldConfig config);

  void add_station(const StationSpec& spec);
  /// Places `count` stations with `placement` drawn from the world's
  /// topology stream.
  void add_random_stations(int count, const Placement& placement, const Traffic& traffic);

  /// Advances exactly `duration_s` of simulated time under `cfg` and reports
  /// what was acknowledged within the period.
  MetricsSnapshot run_control_period(const NetworkConfig& cfg, double duration_s);

  /// Per-packet latencies (seconds) acknowledged in the last period.
  std::span<const double> last_period_latencies() const { return period_latencies_; }

  std::size_t station_count() const { return stations_.size(); }
  std::size_t reachable_station_count() const;
  std::vector<Position> station_positions() const;
  double now_s() const { return static_cast<double>(period_start_) / kNanosPerSecond; }
  std::int64_t periods_completed() const { return period_index_; }
  const WorldConfig& config() const { return config_; }
  std::int64_t total_dropped() const { return total_dropped_; }

 private:
  struct StationState {
    StationSpec spec;
    bool reachable = true;
    bool saturated = false;
    Nanos interval = 0;             // CBR inter-arrival time
    Nanos next_arrival = 0;         // CBR only
    std::deque<Nanos> queue;        // enqueue timestamps, CBR only
    Nanos head_since = 0;           // full buffer: when the next packet became ready
    bool contending = false;
    int backoff = 0;                // remaining slots
    Nanos countdown_start = 0;      // slot-aligned time the countdown (re)starts
    int retries = 0;
    int cw = 15;
    std::int64_t period_bits = 0;

    bool has_packets() const { return saturated || !queue.empty(); }
    Nanos tx_time(Nanos slot) const { return countdown_start + backoff * slot; }
  };

  int current_cw(const StationState& s, const NetworkConfig& cfg) const;
  void start_contention(StationState& s, Nanos ready_at, const NetworkConfig& cfg);
  Nanos aligned_start(Nanos ready_at) const;
  void handle_arrival(StationState& s, const NetworkConfig& cfg);
  void handle_transmissions(Nanos when, const NetworkConfig& cfg);
  Nanos exchange_ns(int payload_bytes, int n, const NetworkConfig& cfg) const;
  Nanos failed_exchange_ns(int payload_bytes, int n, const NetworkConfig& cfg) const;
  int aggregate_size(const StationState& s, const NetworkConfig& cfg) const;

  WorldConfig config_;
  Nanos slot_ = 0, sifs_ = 0, difs_ = 0, ack_ = 0, rts_ = 0, cts_ = 0, preamble_ = 0;
  std::vector<StationState> stations_;
  std::mt19937_64 backoff_rng_;
  std::mt19937_64 topology_rng_;
  Nanos period_start_ = 0;
  Nanos channel_free_ = 0;  // end of the last busy period
  std::int64_t period_index_ = 0;
  std::vector<double> period_latencies_;
  std::int64_t period_dropped_ = 0;
  std::int64_t total_dropped_ = 0;
};

/// Adds stations at fixed intervals and flags the agent reset that must
/// accompany each addition.
class DynamicSchedule {
 public:
  DynamicSchedule(double interval_s, int stations_per_step, Placement placement, Traffic traffic);

  /// Applies every boundary in (last applied, t]. Returns true if at least one
  /// boundary was crossed.
  bool apply(World& world, double t_s);

  int steps_applied() const { return steps_applied_; }
  double interval_s() const { return interval_s_; }

 private:
  double interval_s_;
  int stations_per_step_;
  Placement placement_;
  Traffic traffic_;
  int steps_applied_ = 0;
};

}  // namespace specnet::macsim
