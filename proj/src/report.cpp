#include "specnet/report.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "specnet/error.hpp"

namespace specnet::report {
namespace {

using nlohmann::json;

json metric_json(const MetricSummary& m) { return {{"mean", m.mean}, {"std", m.std}}; }

MetricSummary metric_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::kParseError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_timeseries_csv(std::ostream& os, std::span<const RunResult> runs) {
  os << kTimeseriesHeader << '\n';
  for (const auto& run : runs) {
    for (const auto& r : run.periods) {
      os << run.run << ',' << r.period << ',' << format_double(r.snapshot.sim_time_s) << ','
         << r.config.cw() << ',' << (r.config.ampdu_enabled ? 1 : 0) << ','
         << (r.config.rtscts_enabled ? 1 : 0) << ','
         << format_double(r.snapshot.aggregate_throughput_bps) << ','
         << format_double(r.snapshot.mean_latency_s) << ','
         << format_double(r.snapshot.p90_latency_s) << ',' << format_double(r.snapshot.jain_index)
         << ',' << format_double(r.reward) << ',' << (r.converged ? 1 : 0) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    os << quote(r.label) << ',' << r.n_runs;
    for (const auto* m : {&r.throughput_bps, &r.mean_latency_s, &r.p90_latency_s, &r.jain, &r.reward}) {
      os << ',' << format_double(m->mean) << ',' << format_double(m->std);
    }
    os << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSummaryHeader) {
    throw Error(Errc::kParseError, "summary CSV header mismatch");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) throw Error(Errc::kParseError, "summary row needs 12 fields: " + line);
    SummaryRow r;
    r.label = f[0];
    r.n_runs = static_cast<int>(parse_double(f[1]));
    MetricSummary* metrics[] = {&r.throughput_bps, &r.mean_latency_s, &r.p90_latency_s, &r.jain,
                                &r.reward};
    for (std::size_t m = 0; m < 5; ++m) {
      metrics[m]->mean = parse_double(f[2 + 2 * m]);
      metrics[m]->std = parse_double(f[3 + 2 * m]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json to_json(const NetworkConfig& cfg) {
  return {{"cw", cfg.cw()}, {"agg", cfg.ampdu_enabled}, {"rts", cfg.rtscts_enabled}};
}

json to_json(const MetricsSnapshot& s) {
  return {{"period", s.control_period_index},
          {"sim_time_s", s.sim_time_s},
          {"throughput_bps", s.aggregate_throughput_bps},
          {"mean_latency_s", s.mean_latency_s},
          {"p90_latency_s", s.p90_latency_s},
          {"jain", s.jain_index},
          {"per_station_throughput_bps", s.per_station_throughput_bps},
          {"no_traffic", s.no_traffic},
          {"delivered_packets", s.delivered_packets},
          {"dropped_packets", s.dropped_packets}};
}

json to_json(const SummaryRow& row) {
  return {{"label", row.label},
          {"n_runs", row.n_runs},
          {"throughput_bps", metric_json(row.throughput_bps)},
          {"mean_latency_s", metric_json(row.mean_latency_s)},
          {"p90_latency_s", metric_json(row.p90_latency_s)},
          {"jain", metric_json(row.jain)},
          {"reward", metric_json(row.reward)}};
}

MetricsSnapshot snapshot_from_json(const json& j) {
  try {
    MetricsSnapshot s;
    s.control_period_index = j.at("period").get<std::int64_t>();
    s.sim_time_s = j.at("sim_time_s").get<double>();
    s.aggregate_throughput_bps = j.at("throughput_bps").get<double>();
    s.mean_latency_s = j.at("mean_latency_s").get<double>();
    s.p90_latency_s = j.at("p90_latency_s").get<double>();
    s.jain_index = j.at("jain").get<double>();
    s.per_station_throughput_bps = j.at("per_station_throughput_bps").get<std::vector<double>>();
    s.no_traffic = j.at("no_traffic").get<bool>();
    s.delivered_packets = j.at("delivered_packets").get<std::int64_t>();
    s.dropped_packets = j.at("dropped_packets").get<std::int64_t>();
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, std::string("snapshot: ") + e.what());
  }
}

SummaryRow summary_from_json(const json& j) {
  try {
    SummaryRow r;
    r.label = j.at("label").get<std::string>();
    r.n_runs = j.at("n_runs").get<int>();
    r.throughput_bps = metric_from_json(j.at("throughput_bps"));
    r.mean_latency_s = metric_from_json(j.at("mean_latency_s"));
    r.p90_latency_s = metric_from_json(j.at("p90_latency_s"));
    r.jain = metric_from_json(j.at("jain"));
    r.reward = metric_from_json(j.at("reward"));
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, e.what());
  }
}

json to_json(const PeriodRecord& rec) {
  return {{"period", rec.period},
          {"config", to_json(rec.config)},
          {"snapshot", to_json(rec.snapshot)},
          {"components",
           {{"t", rec.components.throughput}, {"l", rec.components.latency}, {"f", rec.components.fairness}}},
          {"reward", rec.reward},
          {"weights", {{"t", rec.weights.throughput}, {"l", rec.weights.latency}, {"f", rec.weights.fairness}}},
          {"converged", rec.converged},
          {"epoch_start", rec.epoch_start},
          {"stations", rec.n_stations}};
}

json to_json(const ExperimentResult& result, bool include_periods) {
  json runs = json::array();
  for (const auto& r : result.runs) {
    json run = {{"run", r.run},
                {"seed", r.seed},
                {"convergence_period", r.convergence_period},
                {"steady_start", r.steady_start},
                {"steady",
                 {{"throughput_bps", r.steady.throughput_bps},
                  {"mean_latency_s", r.steady.mean_latency_s},
                  {"p90_latency_s", r.steady.p90_latency_s},
                  {"jain", r.steady.jain},
                  {"reward", r.steady.reward},
                  {"periods", r.steady.periods}}}};
    json epochs = json::array();
    for (const auto& e : r.epochs) {
      epochs.push_back({{"start_period", e.start_period},
                        {"end_period", e.end_period},
                        {"stations", e.n_stations},
                        {"convergence_period", e.convergence_period},
                        {"converged_config", to_json(e.converged_config)},
                        {"steady_throughput_bps", e.steady.throughput_bps},
                        {"steady_reward", e.steady.reward}});
    }
    run["epochs"] = std::move(epochs);
    if (include_periods) {
      json periods = json::array();
      for (const auto& p : r.periods) periods.push_back(to_json(p));
      run["periods"] = std::move(periods);
    }
    runs.push_back(std::move(run));
  }
  json out = {{"scenario", result.scenario}, {"agent", to_string(result.agent)}, {"runs", runs}};
  out["summary"] = result.summary ? to_json(*result.summary) : json(nullptr);
  return out;
}

json to_json(const SweepTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = to_json(row.summary);
    r["config"] = to_json(row.config);
    rows.push_back(std::move(r));
  }
  auto best = [&](std::size_t i) { return to_json(table.rows[i].config); };
  return {{"scenario", table.scenario},
          {"rows", rows},
          {"best",
           {{"throughput", best(table.best_throughput)},
            {"latency", best(table.best_latency)},
            {"fairness", best(table.best_fairness)},
            {"reward", best(table.best_reward)}}}};
}

}  // namespace specnet::report
