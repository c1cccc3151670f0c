#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "antmesh/errors.hpp"
#include "antmesh/mobility.hpp"
#include "antmesh/net.hpp"
#include "antmesh/protocols/anthocnet.hpp"
#include "antmesh/protocols/antnet.hpp"
#include "antmesh/protocols/aodv.hpp"
#include "antmesh/protocols/ara.hpp"
#include "antmesh/protocols/paconet.hpp"
#include "antmesh/routing.hpp"
#include "antmesh/workload.hpp"

namespace antmesh {

enum class ProtocolKind : std::uint8_t { Aodv, AntAodv, AntNet, AntHocNet, Ara, Paconet };

inline constexpr std::array<ProtocolKind, 6> kAllProtocols{ProtocolKind::Aodv,      ProtocolKind::AntAodv,
                                                           ProtocolKind::AntNet,    ProtocolKind::AntHocNet,
                                                           ProtocolKind::Ara,       ProtocolKind::Paconet};

inline constexpr std::string_view to_string(ProtocolKind p) noexcept {
  switch (p) {
    case ProtocolKind::Aodv: return "aodv";
    case ProtocolKind::AntAodv: return "antaodv";
    case ProtocolKind::AntNet: return "antnet";
    case ProtocolKind::AntHocNet: return "anthocnet";
    case ProtocolKind::Ara: return "ara";
    case ProtocolKind::Paconet: return "paconet";
  }
  return "?";
}

inline std::optional<ProtocolKind> protocol_from_string(std::string_view s) {
  for (auto p : kAllProtocols)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

enum class MobilityModel : std::uint8_t { RandomWaypoint, Static };

/// Everything needed to reproduce one run.
struct ScenarioConfig {
  ProtocolKind protocol = ProtocolKind::Aodv;
  std::uint64_t seed = 1;
  std::size_t nodes = 50;
  Seconds sim_time = 300.0;
  RadioParams radio;
  MobilityModel model = MobilityModel::RandomWaypoint;
  MobilityParams mobility;
  std::vector<Vec2> positions;  // static layout
  TrafficParams traffic;
  CommonRouting routing;
  AntNetParams antnet;
  AntHocNetParams anthocnet;
  AraParams ara;
  PaconetParams paconet;
  AodvParams aodv;
  AntAodvParams antaodv;

  /// Cross-field checks that a single key cannot express.
  void validate() const {
    if (nodes < 2) throw InvalidConfig("nodes must be >= 2");
    if (!(sim_time > 0.0)) throw InvalidConfig("sim_time must be > 0");
    radio.validate();
    mobility.validate();
    if (model == MobilityModel::Static && positions.size() != nodes)
      throw InvalidConfig("static mobility needs exactly one position per node");
    if (traffic.warmup >= sim_time && traffic.sessions > 0)
      throw InvalidConfig("traffic.warmup_s must be below sim_time");
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_real(std::string_view v, std::size_t line, std::string_view key) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out))
    throw TypeMismatch(line, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

inline std::uint64_t to_uint(std::string_view v, std::size_t line, std::string_view key) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw TypeMismatch(line, std::string(key) + ": expected a non-negative integer, got '" +
                                 std::string(v) + "'");
  return out;
}

struct Bound {
  double lo;
  double hi;
  bool lo_open;
  bool hi_open;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr Bound kPositive{0.0, kInf, true, true};
inline constexpr Bound kNonNegative{0.0, kInf, false, true};
inline constexpr Bound kUnitOpen{0.0, 1.0, true, true};

inline double bounded(double x, Bound b, std::size_t line, std::string_view key) {
  const bool ok = (b.lo_open ? x > b.lo : x >= b.lo) && (b.hi_open ? x < b.hi : x <= b.hi);
  if (!ok) throw TypeMismatch(line, std::string(key) + ": value out of range");
  return x;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, std::size_t)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> m;
    auto real = [&m](const char* key, auto field, Bound b) {
      m[key] = [field, b, key](ScenarioConfig& c, std::string_view v, std::size_t line) {
        field(c) = bounded(to_real(v, line, key), b, line, key);
      };
    };
    auto count = [&m](const char* key, auto field, std::uint64_t min) {
      m[key] = [field, min, key](ScenarioConfig& c, std::string_view v, std::size_t line) {
        const auto x = to_uint(v, line, key);
        if (x < min) throw TypeMismatch(line, std::string(key) + ": value out of range");
        using T = std::remove_reference_t<decltype(field(c))>;
        if (x > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
          throw TypeMismatch(line, std::string(key) + ": value too large");
        field(c) = static_cast<T>(x);
      };
    };

    m["protocol"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      auto p = protocol_from_string(v);
      if (!p) throw TypeMismatch(line, "protocol: unknown protocol '" + std::string(v) + "'");
      c.protocol = *p;
    };
    count("seed", [](ScenarioConfig& c) -> auto& { return c.seed; }, 0);
    count("nodes", [](ScenarioConfig& c) -> auto& { return c.nodes; }, 2);
    m["area"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      const auto x = v.find_first_of("xX");
      if (x == std::string_view::npos) throw TypeMismatch(line, "area: expected WxH");
      c.mobility.width = bounded(to_real(trim(v.substr(0, x)), line, "area"), kPositive, line, "area");
      c.mobility.height = bounded(to_real(trim(v.substr(x + 1)), line, "area"), kPositive, line, "area");
    };
    real("sim_time", [](ScenarioConfig& c) -> auto& { return c.sim_time; }, kPositive);
    real("range", [](ScenarioConfig& c) -> auto& { return c.radio.range; }, kPositive);
    real("bandwidth", [](ScenarioConfig& c) -> auto& { return c.radio.bandwidth; }, kPositive);
    real("latency", [](ScenarioConfig& c) -> auto& { return c.radio.per_hop_latency; }, kNonNegative);

    m["mobility.model"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      if (v == "rwp") c.model = MobilityModel::RandomWaypoint;
      else if (v == "static") c.model = MobilityModel::Static;
      else throw TypeMismatch(line, "mobility.model: expected rwp or static");
    };
    m["mobility.positions"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      c.positions.clear();
      for (auto item : split(v, ';')) {
        if (item.empty()) continue;
        auto xy = split(item, ',');
        if (xy.size() != 2) throw TypeMismatch(line, "mobility.positions: expected x,y;x,y;...");
        c.positions.push_back({to_real(xy[0], line, "mobility.positions"),
                               to_real(xy[1], line, "mobility.positions")});
      }
    };
    real("mobility.v_min", [](ScenarioConfig& c) -> auto& { return c.mobility.v_min; }, kPositive);
    real("mobility.v_max", [](ScenarioConfig& c) -> auto& { return c.mobility.v_max; }, kPositive);
    real("mobility.pause", [](ScenarioConfig& c) -> auto& { return c.mobility.pause; }, kNonNegative);

    count("traffic.sessions", [](ScenarioConfig& c) -> auto& { return c.traffic.sessions; }, 0);
    real("traffic.rate_pps", [](ScenarioConfig& c) -> auto& { return c.traffic.rate_pps; }, kPositive);
    count("traffic.packet_bytes", [](ScenarioConfig& c) -> auto& { return c.traffic.packet_bytes; }, 1);
    real("traffic.warmup_s", [](ScenarioConfig& c) -> auto& { return c.traffic.warmup; }, kNonNegative);
    real("traffic.stop_s", [](ScenarioConfig& c) -> auto& { return c.traffic.stop; }, kNonNegative);
    m["traffic.pairs"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      c.traffic.pairs.clear();
      for (auto item : split(v, ';')) {
        if (item.empty()) continue;
        auto sd = split(item, '>');
        if (sd.size() != 2) throw TypeMismatch(line, "traffic.pairs: expected s>d;s>d;...");
        const auto s = to_uint(sd[0], line, "traffic.pairs");
        const auto d = to_uint(sd[1], line, "traffic.pairs");
        if (s == d) throw TypeMismatch(line, "traffic.pairs: endpoints must differ");
        c.traffic.pairs.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(d));
      }
    };

    count("routing.control_bytes", [](ScenarioConfig& c) -> auto& { return c.routing.control_bytes; }, 1);
    count("routing.buffer_cap", [](ScenarioConfig& c) -> auto& { return c.routing.buffer_cap; }, 1);
    real("routing.discovery_timeout", [](ScenarioConfig& c) -> auto& { return c.routing.discovery_timeout; }, kPositive);
    count("routing.discovery_retries", [](ScenarioConfig& c) -> auto& { return c.routing.discovery_retries; }, 0);
    count("routing.data_ttl", [](ScenarioConfig& c) -> auto& { return c.routing.data_ttl; }, 0);

    real("antnet.delta_t", [](ScenarioConfig& c) -> auto& { return c.antnet.delta_t; }, kPositive);
    real("antnet.alpha", [](ScenarioConfig& c) -> auto& { return c.antnet.alpha; }, kNonNegative);
    real("antnet.r", [](ScenarioConfig& c) -> auto& { return c.antnet.r; }, kUnitOpen);
    count("antnet.max_life", [](ScenarioConfig& c) -> auto& { return c.antnet.max_life; }, 0);
    real("antnet.flow_window", [](ScenarioConfig& c) -> auto& { return c.antnet.flow_window; }, kPositive);

    real("anthocnet.beta", [](ScenarioConfig& c) -> auto& { return c.anthocnet.beta; }, {1.0, kInf, false, true});
    real("anthocnet.sample_interval", [](ScenarioConfig& c) -> auto& { return c.anthocnet.sample_interval; }, kPositive);
    real("anthocnet.explore_prob", [](ScenarioConfig& c) -> auto& { return c.anthocnet.explore_prob; }, {0.0, 0.5, false, false});
    real("anthocnet.hop_cost", [](ScenarioConfig& c) -> auto& { return c.anthocnet.hop_cost; }, kNonNegative);
    count("anthocnet.max_hops", [](ScenarioConfig& c) -> auto& { return c.anthocnet.max_hops; }, 0);

    m["ara.mode"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      if (v == "flood") c.ara.mode = AraMode::Flood;
      else if (v == "forward") c.ara.mode = AraMode::Forward;
      else throw TypeMismatch(line, "ara.mode: expected flood or forward");
    };
    count("ara.max_hops", [](ScenarioConfig& c) -> auto& { return c.ara.max_hops; }, 0);
    real("ara.evap_rate", [](ScenarioConfig& c) -> auto& { return c.ara.evap_rate; }, kUnitOpen);
    real("ara.reinforce_unit", [](ScenarioConfig& c) -> auto& { return c.ara.reinforce_unit; }, kPositive);

    real("paconet.epsilon", [](ScenarioConfig& c) -> auto& { return c.paconet.epsilon; }, kPositive);
    real("paconet.xi", [](ScenarioConfig& c) -> auto& { return c.paconet.xi; }, kUnitOpen);
    count("paconet.max_life", [](ScenarioConfig& c) -> auto& { return c.paconet.max_life; }, 0);

    real("aodv.hello_interval", [](ScenarioConfig& c) -> auto& { return c.aodv.hello_interval; }, kPositive);
    real("aodv.route_ttl", [](ScenarioConfig& c) -> auto& { return c.aodv.route_ttl; }, kPositive);
    count("aodv.rreq_ttl", [](ScenarioConfig& c) -> auto& { return c.aodv.rreq_ttl; }, 0);

    m["antaodv.ant_count"] = [](ScenarioConfig& c, std::string_view v, std::size_t line) {
      const auto x = to_uint(v, line, "antaodv.ant_count");
      if (x > 1'000'000) throw TypeMismatch(line, "antaodv.ant_count: value too large");
      c.antaodv.ant_count = static_cast<std::uint32_t>(x);
    };
    count("antaodv.history_window", [](ScenarioConfig& c) -> auto& { return c.antaodv.history_window; }, 0);
    real("antaodv.ant_interval", [](ScenarioConfig& c) -> auto& { return c.antaodv.ant_interval; }, kPositive);
    return m;
  }();
  return table;
}

}  // namespace config_detail

/// Every key accepted by parse_scenario, sorted.
inline std::vector<std::string> scenario_keys() {
  std::vector<std::string> out;
  for (const auto& [k, s] : config_detail::setters()) out.push_back(k);
  return out;
}

/// Applies one `key = value` assignment. `line` is used in error messages.
inline void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value,
                          std::size_t line = 0) {
  const auto& table = config_detail::setters();
  auto it = table.find(key);
  if (it == table.end()) throw UnknownKey(line, "unknown key '" + std::string(key) + "'");
  it->second(cfg, value, line);
}

/// Parses a line-oriented scenario: `key = value`, `#` starts a comment.
/// Unknown keys are errors; `protocol` is mandatory.
inline ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  bool have_protocol = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = config_detail::trim(line.substr(0, eq));
    const auto value = config_detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + std::string(key) + "'");
    apply_setting(cfg, key, value, line_no);
    if (key == "protocol") have_protocol = true;
  }
  if (!have_protocol) throw ParseError(0, "missing mandatory key 'protocol'");
  try {
    cfg.validate();
  } catch (const InvalidConfig& e) {
    throw ParseError(0, e.what());
  }
  return cfg;
}

inline ScenarioConfig parse_scenario(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(std::string_view(ss.str()));
}

}  // namespace antmesh
