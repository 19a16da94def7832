#include "specnet/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "specnet/error.hpp"

namespace specnet {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::kParseError, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw Error(Errc::kParseError, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

double nominal_t_max(const macsim::PhyProfile& phy) { return phy.phy_rate_bps; }

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::kInvalidArgument, msg); };
  if (n_stations < 0) fail("station count must be non-negative");
  if (!(placement.extent_m > 0.0)) fail("placement extent must be positive");
  if (macsim::packet_bytes(traffic) <= 0) fail("packet size must be positive");
  if (const auto* cbr = std::get_if<macsim::ConstantBitRate>(&traffic); cbr && !(cbr->interval_s > 0.0)) {
    fail("CBR interval must be positive");
  }
  phy.validate();
  timings.validate();
  if (!(control_period_s > 0.0)) fail("control period must be positive");
  if (n_runs < 1) fail("need at least one run");
  if (warmup_max < 0 || duration_periods < 1 || min_steady_periods < 1) fail("bad period counts");
  prefs::validate(weights);
  reward_params.validate();
  if (dynamic && (!(dynamic->interval_s > 0.0) || dynamic->stations_per_step < 0)) {
    fail("bad dynamic schedule");
  }
  if (!(agent_decay > 0.0 && agent_decay <= 1.0)) fail("agent decay must be in (0, 1]");
  if (!(agent_evidence_weight > 0.0)) fail("agent evidence weight must be positive");
}

ScenarioSpec scenario_preset(const std::string& name, bool full_scale) {
  ScenarioSpec s;
  s.name = name;
  if (name == "high_throughput") {
    s.n_stations = full_scale ? 50 : 20;
    s.placement = {macsim::Topology::kDisc, 10.0};
    s.traffic = macsim::FullBuffer{1500};
    s.phy = macsim::PhyProfile::mcs11();
    s.weights = {1.0, 0.0, 0.0};
  } else if (name == "low_latency") {
    s.n_stations = 4;
    s.placement = {macsim::Topology::kDisc, 10.0};
    s.traffic = macsim::ConstantBitRate::from_rate(1500, 20e6);
    s.phy = macsim::PhyProfile::mcs11();
    s.weights = {0.0, 1.0, 0.0};
  } else if (name == "massive") {
    s.n_stations = full_scale ? 250 : 50;
    s.placement = {macsim::Topology::kSquare, 500.0};
    // 50 stations at the full-scale 50 ms interval never contend hard enough
    // to separate the arms, so desk scale offers the same 256 B every 20 ms.
    s.traffic = macsim::ConstantBitRate{256, full_scale ? 0.050 : 0.020};
    s.phy = macsim::PhyProfile::mcs0();
    s.weights = {0.0, 0.0, 1.0};
  } else {
    throw Error(Errc::kInvalidArgument,
                "unknown scenario '" + name + "' (expected high_throughput, low_latency or massive)");
  }
  s.reward_params.t_max_bps = nominal_t_max(s.phy);
  return s;
}

ScenarioSpec apply_overrides(ScenarioSpec s, const json& o) {
  try {
    check_keys(o,
               {"name", "stations", "topology", "traffic", "mcs", "phy", "timings",
                "control_period_s", "runs", "warmup_max", "duration_periods",
                "min_steady_periods", "weights", "reward", "dynamic", "agent_decay",
                "agent_evidence_weight"},
               "scenario");
    if (o.contains("name")) {
      // A new name selects that preset as the base for the remaining keys.
      const auto name = o.at("name").get<std::string>();
      if (name != s.name) s = scenario_preset(name);
    }
    read_if(o, "stations", s.n_stations);
    if (o.contains("mcs")) {
      s.phy = macsim::PhyProfile::for_mcs(o.at("mcs").get<int>());
      s.reward_params.t_max_bps = nominal_t_max(s.phy);
    }
    if (o.contains("topology")) {
      const auto& t = o.at("topology");
      check_keys(t, {"kind", "extent_m"}, "topology");
      if (t.contains("kind")) {
        const auto kind = t.at("kind").get<std::string>();
        if (kind == "disc") s.placement.topology = macsim::Topology::kDisc;
        else if (kind == "square") s.placement.topology = macsim::Topology::kSquare;
        else throw Error(Errc::kParseError, "topology kind must be disc or square");
      }
      read_if(t, "extent_m", s.placement.extent_m);
    }
    if (o.contains("traffic")) {
      const auto& t = o.at("traffic");
      check_keys(t, {"kind", "packet_bytes", "rate_bps", "interval_s"}, "traffic");
      const auto kind = t.value("kind", std::string(std::holds_alternative<macsim::FullBuffer>(s.traffic)
                                                        ? "full_buffer"
                                                        : "cbr"));
      const int bytes = t.value("packet_bytes", macsim::packet_bytes(s.traffic));
      if (kind == "full_buffer") {
        s.traffic = macsim::FullBuffer{bytes};
      } else if (kind == "cbr") {
        macsim::ConstantBitRate cbr{bytes, 0.0};
        if (const auto* old = std::get_if<macsim::ConstantBitRate>(&s.traffic)) {
          cbr = macsim::ConstantBitRate::from_rate(bytes, old->rate_bps());
        }
        if (t.contains("rate_bps")) cbr = macsim::ConstantBitRate::from_rate(bytes, t.at("rate_bps").get<double>());
        if (t.contains("interval_s")) cbr.interval_s = t.at("interval_s").get<double>();
        s.traffic = cbr;
      } else {
        throw Error(Errc::kParseError, "traffic kind must be full_buffer or cbr");
      }
    }
    if (o.contains("phy")) {
      const auto& p = o.at("phy");
      check_keys(p, {"mcs_index", "phy_rate_bps", "sensitivity_dbm", "tx_power_dbm",
                     "pathloss_exponent", "reference_loss_db", "preamble_us"},
                 "phy");
      read_if(p, "mcs_index", s.phy.mcs_index);
      read_if(p, "phy_rate_bps", s.phy.phy_rate_bps);
      read_if(p, "sensitivity_dbm", s.phy.sensitivity_dbm);
      read_if(p, "tx_power_dbm", s.phy.tx_power_dbm);
      read_if(p, "pathloss_exponent", s.phy.pathloss_exponent);
      read_if(p, "reference_loss_db", s.phy.reference_loss_db);
      read_if(p, "preamble_us", s.phy.preamble_us);
      if (p.contains("phy_rate_bps") && !(o.contains("reward") && o.at("reward").contains("t_max_bps"))) {
        s.reward_params.t_max_bps = nominal_t_max(s.phy);
      }
    }
    if (o.contains("timings")) {
      const auto& t = o.at("timings");
      check_keys(t, {"slot_us", "sifs_us", "difs_us", "ack_us", "rts_us", "cts_us",
                     "mac_header_bytes", "ampdu_limit_bytes", "max_ppdu_us", "retry_limit",
                     "queue_limit_packets"},
                 "timings");
      read_if(t, "slot_us", s.timings.slot_us);
      read_if(t, "sifs_us", s.timings.sifs_us);
      read_if(t, "difs_us", s.timings.difs_us);
      read_if(t, "ack_us", s.timings.ack_us);
      read_if(t, "rts_us", s.timings.rts_us);
      read_if(t, "cts_us", s.timings.cts_us);
      read_if(t, "mac_header_bytes", s.timings.mac_header_bytes);
      read_if(t, "ampdu_limit_bytes", s.timings.ampdu_limit_bytes);
      read_if(t, "max_ppdu_us", s.timings.max_ppdu_us);
      read_if(t, "retry_limit", s.timings.retry_limit);
      read_if(t, "queue_limit_packets", s.timings.queue_limit_packets);
    }
    read_if(o, "control_period_s", s.control_period_s);
    read_if(o, "runs", s.n_runs);
    read_if(o, "warmup_max", s.warmup_max);
    read_if(o, "duration_periods", s.duration_periods);
    read_if(o, "min_steady_periods", s.min_steady_periods);
    read_if(o, "agent_decay", s.agent_decay);
    read_if(o, "agent_evidence_weight", s.agent_evidence_weight);
    if (o.contains("weights")) {
      const auto& w = o.at("weights");
      check_keys(w, {"t", "l", "f"}, "weights");
      s.weights = {w.at("t").get<double>(), w.at("l").get<double>(), w.at("f").get<double>()};
    }
    if (o.contains("reward")) {
      const auto& r = o.at("reward");
      check_keys(r, {"alpha", "beta_s", "t_max_bps"}, "reward");
      read_if(r, "alpha", s.reward_params.alpha);
      read_if(r, "beta_s", s.reward_params.beta_s);
      read_if(r, "t_max_bps", s.reward_params.t_max_bps);
    }
    if (o.contains("dynamic")) {
      const auto& d = o.at("dynamic");
      if (d.is_null()) {
        s.dynamic.reset();
      } else {
        check_keys(d, {"interval_s", "stations_per_step"}, "dynamic");
        DynamicSpec dyn = s.dynamic.value_or(DynamicSpec{});
        read_if(d, "interval_s", dyn.interval_s);
        read_if(d, "stations_per_step", dyn.stations_per_step);
        s.dynamic = dyn;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, e.what());
  }
  s.validate();
  return s;
}

ScenarioSpec load_scenario_file(const std::string& path, ScenarioSpec base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kParseError, "cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, path + ": " + e.what());
  }
  return apply_overrides(std::move(base), doc);
}

json to_json(const ScenarioSpec& s) {
  json traffic;
  if (const auto* cbr = std::get_if<macsim::ConstantBitRate>(&s.traffic)) {
    traffic = {{"kind", "cbr"}, {"packet_bytes", cbr->packet_bytes}, {"interval_s", cbr->interval_s}};
  } else {
    traffic = {{"kind", "full_buffer"}, {"packet_bytes", macsim::packet_bytes(s.traffic)}};
  }
  json out = {
      {"name", s.name},
      {"stations", s.n_stations},
      {"topology",
       {{"kind", s.placement.topology == macsim::Topology::kDisc ? "disc" : "square"},
        {"extent_m", s.placement.extent_m}}},
      {"traffic", traffic},
      {"phy",
       {{"mcs_index", s.phy.mcs_index},
        {"phy_rate_bps", s.phy.phy_rate_bps},
        {"sensitivity_dbm", s.phy.sensitivity_dbm},
        {"tx_power_dbm", s.phy.tx_power_dbm},
        {"pathloss_exponent", s.phy.pathloss_exponent},
        {"reference_loss_db", s.phy.reference_loss_db},
        {"preamble_us", s.phy.preamble_us}}},
      {"timings",
       {{"slot_us", s.timings.slot_us},
        {"sifs_us", s.timings.sifs_us},
        {"difs_us", s.timings.difs_us},
        {"ack_us", s.timings.ack_us},
        {"rts_us", s.timings.rts_us},
        {"cts_us", s.timings.cts_us},
        {"mac_header_bytes", s.timings.mac_header_bytes},
        {"ampdu_limit_bytes", s.timings.ampdu_limit_bytes},
        {"max_ppdu_us", s.timings.max_ppdu_us},
        {"retry_limit", s.timings.retry_limit},
        {"queue_limit_packets", s.timings.queue_limit_packets}}},
      {"control_period_s", s.control_period_s},
      {"runs", s.n_runs},
      {"warmup_max", s.warmup_max},
      {"duration_periods", s.duration_periods},
      {"min_steady_periods", s.min_steady_periods},
      {"weights", {{"t", s.weights.throughput}, {"l", s.weights.latency}, {"f", s.weights.fairness}}},
      {"reward",
       {{"alpha", s.reward_params.alpha},
        {"beta_s", s.reward_params.beta_s},
        {"t_max_bps", s.reward_params.t_max_bps}}},
      {"agent_decay", s.agent_decay},
      {"agent_evidence_weight", s.agent_evidence_weight},
  };
  out["dynamic"] = s.dynamic ? json{{"interval_s", s.dynamic->interval_s},
                                    {"stations_per_step", s.dynamic->stations_per_step}}
                             : json(nullptr);
  return out;
}

}  // namespace specnet
