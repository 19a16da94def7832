#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "specnet/macsim.hpp"
#include "specnet/prefs.hpp"
#include "specnet/reward.hpp"

namespace specnet {

struct DynamicSpec {
  double interval_s = 100.0;
  int stations_per_step = 5;
};

/// Everything needed to reproduce one experiment.
struct ScenarioSpec {
  std::string name = "high_throughput";
  int n_stations = 20;
  macsim::Placement placement;
  macsim::Traffic traffic = macsim::FullBuffer{1500};
  macsim::PhyProfile phy;
  macsim::MacTimings timings;
  double control_period_s = 0.5;
  int n_runs = 10;
  int warmup_max = 200;
  int duration_periods = 200;
  int min_steady_periods = 50;
  prefs::ObjectiveWeights weights{1.0, 0.0, 0.0};
  RewardParams reward_params;
  std::optional<DynamicSpec> dynamic;
  double agent_decay = 1.0;
  double agent_evidence_weight = 1.0;

  void validate() const;
};

/// Presets: "high_throughput", "low_latency", "massive". Desk scale shrinks
/// station counts; `full_scale` restores the original table sizes.
ScenarioSpec scenario_preset(const std::string& name, bool full_scale = false);

/// Throughput ceiling used by the presets: the PHY rate of the active MCS.
double nominal_t_max(const macsim::PhyProfile& phy);

/// Applies a JSON override document on top of `base`. Unknown keys are
/// rejected with ParseError. See README for the schema.
ScenarioSpec apply_overrides(ScenarioSpec base, const nlohmann::json& overrides);
ScenarioSpec load_scenario_file(const std::string& path, ScenarioSpec base);

nlohmann::json to_json(const ScenarioSpec& spec);

}  // namespace specnet
