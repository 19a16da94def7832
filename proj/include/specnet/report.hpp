#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "specnet/harness.hpp"

namespace specnet::report {

inline constexpr std::string_view kTimeseriesHeader =
    "run,period,sim_time_s,cw,agg,rts,throughput_bps,mean_latency_s,p90_latency_s,jain,reward,"
    "converged";

inline constexpr std::string_view kSummaryHeader =
    "label,n_runs,throughput_bps_mean,throughput_bps_std,mean_latency_s_mean,mean_latency_s_std,"
    "p90_latency_s_mean,p90_latency_s_std,jain_mean,jain_std,reward_mean,reward_std";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

void write_timeseries_csv(std::ostream& os, std::span<const RunResult> runs);
void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);
/// Inverse of write_summary_csv. Throws ParseError.
std::vector<SummaryRow> read_summary_csv(std::istream& is);

nlohmann::json to_json(const NetworkConfig& cfg);
nlohmann::json to_json(const MetricsSnapshot& s);
nlohmann::json to_json(const SummaryRow& row);
nlohmann::json to_json(const PeriodRecord& rec);
nlohmann::json to_json(const ExperimentResult& result, bool include_periods);
nlohmann::json to_json(const SweepTable& table);

SummaryRow summary_from_json(const nlohmann::json& j);
MetricsSnapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace specnet::report
