#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "antmesh/config.hpp"
#include "antmesh/metrics.hpp"
#include "antmesh/simulation.hpp"

namespace antmesh {

enum class SweepParam : std::uint8_t { None, MaxSpeed, PauseTime };

inline constexpr std::string_view to_string(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::None: return "none";
    case SweepParam::MaxSpeed: return "max_speed";
    case SweepParam::PauseTime: return "pause_time";
  }
  return "?";
}

inline SweepParam sweep_param_from_string(std::string_view s) {
  if (s == "max_speed") return SweepParam::MaxSpeed;
  if (s == "pause_time") return SweepParam::PauseTime;
  if (s == "none") return SweepParam::None;
  throw InvalidConfig("unknown sweep parameter '" + std::string(s) + "'");
}

struct SweepSpec {
  SweepParam param = SweepParam::None;
  std::vector<double> values;  // strictly increasing
  std::vector<std::uint64_t> seeds;

  void validate() const {
    if (seeds.empty()) throw InvalidConfig("sweep needs at least one seed");
    if (param == SweepParam::None) {
      if (values.size() > 1) throw InvalidConfig("sweep values given without a parameter");
      return;
    }
    if (values.empty()) throw InvalidConfig("sweep needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw InvalidConfig("sweep values must be strictly increasing");
  }
};

/// The configuration for one point of a sweep.
inline ScenarioConfig apply_sweep(ScenarioConfig cfg, SweepParam p, double value, std::uint64_t seed) {
  cfg.seed = seed;
  switch (p) {
    case SweepParam::None: break;
    case SweepParam::MaxSpeed:
      cfg.mobility.v_max = value;
      cfg.mobility.v_min = std::min(cfg.mobility.v_min, value);
      break;
    case SweepParam::PauseTime: cfg.mobility.pause = value; break;
  }
  return cfg;
}

/// A run result tagged with where it sits in a sweep.
struct SweepRun {
  RunRow row;
  double mean_connectivity = 0.0;
  std::uint64_t audit_failures = 0;
};

/// Runs `jobs` closures over [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all threads finish.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// |protocols| x |values| x |seeds| independent runs. Output is sorted by
/// (protocol, value, seed) regardless of completion order.
inline std::vector<SweepRun> sweep(const ScenarioConfig& base, const std::vector<ProtocolKind>& protocols,
                                   const SweepSpec& spec, std::size_t jobs = 1) {
  spec.validate();
  const std::vector<double> values = spec.values.empty() ? std::vector<double>{0.0} : spec.values;
  struct Task {
    ProtocolKind protocol;
    double value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (auto p : protocols)
    for (double v : values)
      for (auto s : spec.seeds) tasks.push_back({p, v, s});
  std::vector<SweepRun> out(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const auto& t = tasks[i];
    ScenarioConfig cfg = apply_sweep(base, spec.param, t.value, t.seed);
    cfg.protocol = t.protocol;
    const RunResult r = run_scenario(cfg);
    out[i].row = RunRow{std::string(to_string(t.protocol)), t.seed, std::string(to_string(spec.param)),
                        spec.param == SweepParam::None ? 0.0 : t.value, r.stats};
    out[i].mean_connectivity = r.mean_connectivity;
    out[i].audit_failures = r.audit_failures;
  });
  std::stable_sort(out.begin(), out.end(), [](const SweepRun& a, const SweepRun& b) {
    return std::tie(a.row.protocol, a.row.sweep_value, a.row.seed) <
           std::tie(b.row.protocol, b.row.sweep_value, b.row.seed);
  });
  return out;
}

/// Per-run metrics as read back from a results CSV.
struct RunMetrics {
  std::string protocol;
  std::uint64_t seed = 0;
  std::string sweep_param;
  double sweep_value = 0.0;
  double pdr = std::numeric_limits<double>::quiet_NaN();
  double delay = std::numeric_limits<double>::quiet_NaN();
};

inline RunMetrics metrics_of(const RunRow& r) {
  RunMetrics m{r.protocol, r.seed, r.sweep_param, r.sweep_value};
  if (r.stats.sent) m.pdr = pdr(r.stats);
  if (!r.stats.delays.empty()) m.delay = avg_delay(r.stats);
  return m;
}

/// Reads rows written by write_csv.
inline std::vector<RunMetrics> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader)
    throw ParseError(1, "expected header '" + std::string(kRunCsvHeader) + "'");
  std::vector<RunMetrics> out;
  std::size_t n = 1;
  auto num = [&](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return config_detail::to_real(s, n, "csv");
  };
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 9) throw ParseError(n, "expected 9 fields");
    RunMetrics m;
    m.protocol = f[0];
    m.seed = config_detail::to_uint(f[1], n, "seed");
    m.sweep_param = f[2];
    m.sweep_value = num(f[3]);
    m.pdr = num(f[7]);
    m.delay = num(f[8]);
    out.push_back(std::move(m));
  }
  return out;
}

struct MeanSd {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();  // sample stddev; 0 for one sample
  std::size_t n = 0;
};

/// Mean and sample standard deviation, ignoring NaNs.
inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  double sum = 0.0;
  for (double x : xs)
    if (!std::isnan(x)) {
      sum += x;
      ++out.n;
    }
  if (out.n == 0) return out;
  out.mean = sum / static_cast<double>(out.n);
  double ss = 0.0;
  for (double x : xs)
    if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
  out.sd = out.n > 1 ? std::sqrt(ss / static_cast<double>(out.n - 1)) : 0.0;
  return out;
}

struct AggregateRow {
  std::string protocol;
  std::string sweep_param;
  double sweep_value = 0.0;
  MeanSd pdr;
  MeanSd delay;
};

/// Groups runs by (protocol, sweep value), sorted.
inline std::vector<AggregateRow> aggregate(const std::vector<RunMetrics>& runs) {
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::map<std::pair<std::string, double>, std::string> params;
  for (const auto& r : runs) {
    auto& g = groups[{r.protocol, r.sweep_value}];
    g.first.push_back(r.pdr);
    g.second.push_back(r.delay);
    params[{r.protocol, r.sweep_value}] = r.sweep_param;
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, g] : groups)
    out.push_back({key.first, params[key], key.second, mean_sd(g.first), mean_sd(g.second)});
  return out;
}

inline constexpr std::string_view kAggregateCsvHeader =
    "protocol,sweep_param,sweep_value,runs,pdr_mean,pdr_sd,delay_mean_s,delay_sd_s";

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.protocol << ',' << r.sweep_param << ',' << format_g9(r.sweep_value) << ',' << r.pdr.n << ','
        << format_g9(r.pdr.mean) << ',' << format_g9(r.pdr.sd) << ',' << format_g9(r.delay.mean) << ','
        << format_g9(r.delay.sd) << '\n';
}

enum class PlotMetric : std::uint8_t { Pdr, Delay };

/// Self-contained SVG line chart: one polyline per protocol, a circle per
/// point and stddev error bars. Output depends only on the rows.
inline std::string render_svg(const std::vector<AggregateRow>& rows, PlotMetric metric) {
  if (rows.empty()) throw InvalidConfig("plot needs at least one row");
  constexpr double W = 640, H = 420, L = 70, R = 150, T = 30, B = 50;
  auto val = [metric](const AggregateRow& r) { return metric == PlotMetric::Pdr ? r.pdr : r.delay; };

  double x0 = rows.front().sweep_value, x1 = x0, y0 = 0.0, y1 = 0.0;
  for (const auto& r : rows) {
    x0 = std::min(x0, r.sweep_value);
    x1 = std::max(x1, r.sweep_value);
    const auto m = val(r);
    if (!std::isnan(m.mean)) y1 = std::max(y1, m.mean + (std::isnan(m.sd) ? 0.0 : m.sd));
  }
  if (metric == PlotMetric::Pdr) y1 = std::max(y1, 1.0);
  if (!(y1 > y0)) y1 = y0 + 1.0;
  if (!(x1 > x0)) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#8c564b"};
  std::map<std::string, std::vector<const AggregateRow*>> series;
  for (const auto& r : rows) series[r.protocol].push_back(&r);

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
    << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << L - 8 << "\" y=\"" << f(py(yv) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
      << format_g9(std::round(yv * 1e4) / 1e4) << "</text>\n";
  }
  std::vector<double> xs;
  for (const auto& r : rows) xs.push_back(r.sweep_value);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double xv : xs)
    s << "<text x=\"" << f(px(xv)) << "\" y=\"" << H - B + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << format_g9(xv) << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
    << rows.front().sweep_param << "</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << (metric == PlotMetric::Pdr ? "packet delivery ratio" : "average delay (s)")
    << "</text>\n";

  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kColors[idx % std::size(kColors)];
    std::string points;
    for (const auto* r : pts) {
      const auto m = val(*r);
      if (std::isnan(m.mean)) continue;
      if (!points.empty()) points += ' ';
      points += f(px(r->sweep_value)) + "," + f(py(m.mean));
    }
    if (!points.empty())
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    for (const auto* r : pts) {
      const auto m = val(*r);
      if (std::isnan(m.mean)) continue;
      const std::string cx = f(px(r->sweep_value));
      if (m.sd > 0.0)
        s << "<line x1=\"" << cx << "\" y1=\"" << f(py(m.mean - m.sd)) << "\" x2=\"" << cx << "\" y2=\""
          << f(py(m.mean + m.sd)) << "\" stroke=\"" << color << "\"/>\n";
      s << "<circle cx=\"" << cx << "\" cy=\"" << f(py(m.mean)) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 20.0 * static_cast<double>(idx);
    s << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 35 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4
      << "\" font-size=\"12\">" << name << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

inline void emit_plot(const std::vector<AggregateRow>& rows, PlotMetric metric, const std::string& path) {
  const std::string svg = render_svg(rows, metric);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open " + path);
  out << svg;
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace antmesh
