// antmesh command line: run, sweep, compare, plot.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "antmesh/antmesh.hpp"

namespace {

using namespace antmesh;

ScenarioConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  return parse_scenario(in);
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("ANTMESH_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& given, std::uint64_t fallback) {
  return given.empty() ? std::vector<std::uint64_t>{fallback} : given;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoFailure("cannot write " + path);
}

std::string runs_csv(const std::vector<SweepRun>& runs) {
  std::vector<RunRow> rows;
  for (const auto& r : runs) rows.push_back(r.row);
  std::ostringstream s;
  write_csv(s, rows);
  return s.str();
}

std::string aggregate_csv(const std::vector<SweepRun>& runs) {
  std::vector<RunMetrics> m;
  for (const auto& r : runs) m.push_back(metrics_of(r.row));
  std::ostringstream s;
  write_aggregate_csv(s, aggregate(m));
  return s.str();
}

std::vector<ProtocolKind> parse_protocols(const std::vector<std::string>& names) {
  std::vector<ProtocolKind> out;
  for (const auto& n : names) {
    auto p = protocol_from_string(n);
    if (!p) throw InvalidConfig("unknown protocol '" + n + "'");
    out.push_back(*p);
  }
  return out;
}

void check_audits(const std::vector<SweepRun>& runs) {
  for (const auto& r : runs)
    if (r.audit_failures) throw std::logic_error("conservation audit failed in a " + r.row.protocol + " run");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ant-colony MANET routing simulator"};
  app.require_subcommand(1);

  std::string scenario, out_path, agg_path, trace_path, mobility_path, ledger_path;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 0;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "key=value override (repeatable)");
  run->add_option("--seeds", seeds, "seeds to run (default: the scenario's seed)");
  run->add_option("-o,--out", out_path, "results CSV (default stdout)");
  run->add_option("--trace", trace_path, "packet trace CSV (single seed only)");
  run->add_option("--mobility-trace", mobility_path, "waypoint trace CSV (single seed only)");
  run->add_option("--ledger", ledger_path, "per-packet ledger CSV (single seed only)");

  std::string param;
  std::vector<double> values;
  std::vector<std::string> protocols;
  auto* sw = app.add_subcommand("sweep", "sweep max speed or pause time");
  sw->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  sw->add_option("--param", param, "max_speed or pause_time")->required();
  sw->add_option("--values", values, "sweep values, increasing")->required();
  sw->add_option("--seeds", seeds, "seeds")->required();
  sw->add_option("--protocols", protocols, "protocols (default: the scenario's)")->delimiter(',');
  sw->add_option("--set", overrides, "key=value override (repeatable)");
  sw->add_option("--jobs", jobs, "parallel runs (default $ANTMESH_JOBS or core count)");
  sw->add_option("-o,--out", out_path, "per-run CSV (default stdout)");
  sw->add_option("--aggregate", agg_path, "aggregate CSV: mean and sample stddev per value");

  auto* cmp = app.add_subcommand("compare", "run several protocols on the same scenario");
  cmp->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--protocols", protocols, "comma separated protocols")->required()->delimiter(',');
  cmp->add_option("--seeds", seeds, "seeds");
  cmp->add_option("--set", overrides, "key=value override (repeatable)");
  cmp->add_option("--jobs", jobs, "parallel runs");
  cmp->add_option("-o,--out", out_path, "per-run CSV (default stdout)");
  cmp->add_option("--aggregate", agg_path, "aggregate CSV");

  std::string csv_path, metric = "pdr";
  auto* plot = app.add_subcommand("plot", "SVG line chart from a per-run CSV");
  plot->add_option("csv", csv_path, "per-run CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "pdr or delay")->check(CLI::IsMember({"pdr", "delay"}));
  plot->add_option("-o,--out", out_path, "SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plot) {
      std::ifstream in(csv_path);
      if (!in) throw IoFailure("cannot open " + csv_path);
      const auto rows = aggregate(read_run_csv(in));
      emit_plot(rows, metric == "pdr" ? PlotMetric::Pdr : PlotMetric::Delay, out_path);
      return 0;
    }

    ScenarioConfig cfg = load(scenario);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidConfig("--set expects key=value, got '" + kv + "'");
      try {
        apply_setting(cfg, config_detail::trim(std::string_view(kv).substr(0, eq)),
                      config_detail::trim(std::string_view(kv).substr(eq + 1)));
      } catch (const ParseError& e) {
        const std::string msg = e.what();
        throw InvalidConfig("--set " + kv + ": " + msg.substr(msg.find(": ") + 2));
      }
    }
    cfg.validate();
    if (jobs == 0) jobs = default_jobs();

    if (*run) {
      const auto seed_set = seed_list(seeds, cfg.seed);
      const bool single = seed_set.size() == 1;
      if (!single && !(trace_path.empty() && mobility_path.empty() && ledger_path.empty()))
        throw InvalidConfig("trace outputs need a single seed");
      std::vector<RunRow> rows;
      for (auto seed : seed_set) {
        ScenarioConfig c = cfg;
        c.seed = seed;
        std::ofstream trace, mtrace;
        RunOptions opts;
        if (!trace_path.empty()) {
          trace.open(trace_path, std::ios::binary);
          if (!trace) throw IoFailure("cannot open " + trace_path);
          opts.packet_trace = &trace;
        }
        if (!mobility_path.empty()) {
          mtrace.open(mobility_path, std::ios::binary);
          if (!mtrace) throw IoFailure("cannot open " + mobility_path);
          opts.mobility_trace = &mtrace;
        }
        Simulation sim(c, opts);
        const RunResult r = sim.run();
        if (r.audit_failures) throw std::logic_error("conservation audit failed");
        if (!ledger_path.empty()) {
          std::ofstream lo(ledger_path, std::ios::binary);
          if (!lo) throw IoFailure("cannot open " + ledger_path);
          sim.ledger().dump(lo);
        }
        rows.push_back(RunRow{std::string(to_string(c.protocol)), seed, "none", 0.0, r.stats});
      }
      std::ostringstream s;
      write_csv(s, rows);
      write_text(out_path, s.str());
      return 0;
    }

    SweepSpec spec;
    std::vector<ProtocolKind> kinds =
        protocols.empty() ? std::vector<ProtocolKind>{cfg.protocol} : parse_protocols(protocols);
    if (*sw) {
      spec.param = sweep_param_from_string(param);
      spec.values = values;
      spec.seeds = seeds;
    } else {
      spec.seeds = seed_list(seeds, cfg.seed);
    }
    const auto runs = sweep(cfg, kinds, spec, jobs);
    check_audits(runs);
    write_text(out_path, runs_csv(runs));
    if (!agg_path.empty()) write_text(agg_path, aggregate_csv(runs));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
