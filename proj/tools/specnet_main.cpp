// specnet: run scenarios, sweep fixed configurations, serve a live session.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "specnet/error.hpp"
#include "specnet/harness.hpp"
#include "specnet/report.hpp"
#include "specnet/scenario.hpp"
#include "specnet/service.hpp"

using namespace specnet;

namespace {

struct CommonOptions {
  std::string scenario = "high_throughput";
  std::string config_file;
  bool full_scale = false;
  std::optional<int> stations;
  std::optional<int> runs;
  std::optional<int> duration_periods;
  std::optional<std::string> weights;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--scenario", o.scenario, "high_throughput | low_latency | massive")
      ->check(CLI::IsMember({"high_throughput", "low_latency", "massive"}));
  cmd->add_option("--config", o.config_file, "JSON scenario override file");
  cmd->add_flag("--full-scale", o.full_scale, "use the full-size station counts");
  cmd->add_option("--stations", o.stations, "number of stations");
  cmd->add_option("--runs", o.runs, "independent runs (seeds seed..seed+runs-1)");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--duration-periods", o.duration_periods, "control periods per run");
  cmd->add_option("--weights", o.weights, "objective weights wt,wl,wf");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

prefs::ObjectiveWeights parse_weights(const std::string& text) {
  std::stringstream ss(text);
  std::string part;
  double v[3];
  int n = 0;
  while (std::getline(ss, part, ',')) {
    if (n == 3) throw Error(Errc::kParseError, "--weights takes three values");
    try {
      v[n++] = std::stod(part);
    } catch (const std::exception&) {
      throw Error(Errc::kParseError, "bad weight '" + part + "'");
    }
  }
  if (n != 3) throw Error(Errc::kParseError, "--weights takes three values");
  prefs::ObjectiveWeights w{v[0], v[1], v[2]};
  prefs::validate(w);
  return w;
}

ScenarioSpec build_spec(const CommonOptions& o) {
  auto spec = scenario_preset(o.scenario, o.full_scale);
  if (!o.config_file.empty()) spec = load_scenario_file(o.config_file, spec);
  if (o.stations) spec.n_stations = *o.stations;
  if (o.runs) spec.n_runs = *o.runs;
  if (o.duration_periods) spec.duration_periods = *o.duration_periods;
  if (o.weights) spec.weights = parse_weights(*o.weights);
  spec.validate();
  return spec;
}

// Writes to --out or stdout.
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw Error(Errc::kInvalidArgument, "cannot open " + path);
  write(os);
}

void emit_experiment(const CommonOptions& o, const ExperimentResult& result,
                     const std::string& summary_path) {
  if (o.format == "json") {
    emit(o.out, [&](std::ostream& os) { os << report::to_json(result, true).dump(2) << '\n'; });
  } else {
    emit(o.out, [&](std::ostream& os) { report::write_timeseries_csv(os, result.runs); });
  }
  if (!summary_path.empty() && result.summary) {
    emit(summary_path, [&](std::ostream& os) {
      report::write_summary_csv(os, std::span(&*result.summary, 1));
    });
  }
  for (const auto& run : result.runs) {
    std::fprintf(stderr, "run %d seed %llu: converged at %d, steady %.2f Mb/s, p90 %.2f ms, jain %.3f\n",
                 run.run, static_cast<unsigned long long>(run.seed), run.convergence_period,
                 run.steady.throughput_bps / 1e6, run.steady.p90_latency_s * 1e3, run.steady.jain);
  }
}

bool parse_on_off(const std::string& s) { return s == "on"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SpecNet: Thompson-sampling Wi-Fi configuration on a simulated BSS"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string agent = "mab";
  int cw = 15;
  std::string agg = "on";
  std::string rts = "off";
  std::string run_summary;
  auto* run = app.add_subcommand("run", "run one scenario with an agent");
  add_common(run, run_opts);
  run->add_option("--agent", agent, "mab | fixed | dcf")->check(CLI::IsMember({"mab", "fixed", "dcf"}));
  run->add_option("--cw", cw, "contention window for --agent fixed")
      ->check(CLI::IsMember({15, 31, 63, 127, 255, 511, 1023}));
  run->add_option("--agg", agg, "A-MPDU aggregation for --agent fixed")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--rts", rts, "RTS/CTS for --agent fixed")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--summary", run_summary, "also write the summary CSV here");

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "evaluate all 28 fixed configurations");
  add_common(sweep, sweep_opts);

  CommonOptions dyn_opts;
  std::string dyn_summary;
  auto* dynamic = app.add_subcommand("dynamic", "add stations at fixed intervals, MAB agent");
  add_common(dynamic, dyn_opts);
  dynamic->add_option("--summary", dyn_summary, "also write the summary CSV here");

  CommonOptions serve_opts;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve a live session over HTTP");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--scenario", serve_opts.scenario, "initial scenario")
      ->check(CLI::IsMember({"high_throughput", "low_latency", "massive"}));
  serve->add_option("--config", serve_opts.config_file, "JSON scenario override file");
  serve->add_option("--seed", serve_opts.seed, "session seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto spec = build_spec(run_opts);
      AgentChoice choice = AgentChoice::mab();
      if (agent == "fixed") {
        choice = AgentChoice::fixed_arm(
            NetworkConfig{cw_exponent_for(cw), parse_on_off(agg), parse_on_off(rts)});
      } else if (agent == "dcf") {
        choice = AgentChoice::dcf_baseline();
      }
      emit_experiment(run_opts, run_experiment(spec, choice, run_opts.seed), run_summary);
    } else if (*sweep) {
      const auto spec = build_spec(sweep_opts);
      const auto seeds = seed_range(sweep_opts.seed, spec.n_runs);
      const auto table = sweep_fixed_configs(spec, seeds);
      if (sweep_opts.format == "json") {
        emit(sweep_opts.out, [&](std::ostream& os) { os << report::to_json(table).dump(2) << '\n'; });
      } else {
        std::vector<SummaryRow> rows;
        for (const auto& r : table.rows) rows.push_back(r.summary);
        emit(sweep_opts.out, [&](std::ostream& os) { report::write_summary_csv(os, rows); });
      }
      std::fprintf(stderr, "best throughput %s, best p90 %s, best fairness %s, best reward %s\n",
                   table.rows[table.best_throughput].summary.label.c_str(),
                   table.rows[table.best_latency].summary.label.c_str(),
                   table.rows[table.best_fairness].summary.label.c_str(),
                   table.rows[table.best_reward].summary.label.c_str());
    } else if (*dynamic) {
      auto spec = build_spec(dyn_opts);
      if (!spec.dynamic) spec.dynamic = DynamicSpec{};
      if (!dyn_opts.stations) spec.n_stations = spec.dynamic->stations_per_step;
      emit_experiment(dyn_opts, run_experiment(spec, AgentChoice::mab(), dyn_opts.seed), dyn_summary);
    } else if (*serve) {
      auto spec = scenario_preset(serve_opts.scenario);
      if (!serve_opts.config_file.empty()) spec = load_scenario_file(serve_opts.config_file, spec);
      service::Session session(spec, serve_opts.seed);
      service::Server server(session);
      std::fprintf(stderr, "listening on http://%s:%d\n", host.c_str(), port);
      if (!server.listen(host, port)) {
        std::fprintf(stderr, "error: cannot listen on %s:%d\n", host.c_str(), port);
        return 1;
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
