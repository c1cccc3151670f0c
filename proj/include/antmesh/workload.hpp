#pragma once

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"
#include "antmesh/mobility.hpp"
#include "antmesh/random.hpp"

namespace antmesh {

/// Constant-bit-rate session.
struct CbrSession {
  NodeId src = 0;
  NodeId dst = 0;
  double rate = 1.0;  // packets/s
  std::uint32_t packet_bits = 8 * 512;
  Seconds start = 0.0;
  Seconds stop = 0.0;

  void validate() const {
    if (src == dst) throw InvalidConfig("session endpoints must differ");
    if (!(rate > 0.0)) throw InvalidConfig("session rate must be > 0");
    if (packet_bits == 0) throw InvalidConfig("session packet size must be > 0");
    if (!(start < stop)) throw InvalidConfig("session start must precede stop");
  }

  /// floor((stop - start) * rate) + 1; emissions happen at start + k / rate.
  std::uint64_t emission_count() const {
    return static_cast<std::uint64_t>(std::floor((stop - start) * rate + 1e-9)) + 1;
  }
  Seconds emission_time(std::uint64_t k) const {
    return start + static_cast<double>(k) / rate;
  }
};

struct TrafficParams {
  std::size_t sessions = 10;
  double rate_pps = 4.0;
  std::uint32_t packet_bytes = 512;
  Seconds warmup = 10.0;
  Seconds stop = 0.0;  // 0 means end of simulation
  std::vector<std::pair<NodeId, NodeId>> pairs;  // explicit endpoints, overrides random draws
};

/// Draws `sessions` distinct (src, dst) pairs uniformly, or uses the explicit
/// pairs when given. Sessions run over [warmup, stop].
inline std::vector<CbrSession> build_sessions(const TrafficParams& traffic, std::size_t nodes,
                                              Seconds sim_time, RngStream& rng) {
  const Seconds stop = traffic.stop > 0.0 ? traffic.stop : sim_time;
  auto make = [&](NodeId s, NodeId d) {
    CbrSession c{s, d, traffic.rate_pps, traffic.packet_bytes * 8u, traffic.warmup, stop};
    c.validate();
    return c;
  };
  std::vector<CbrSession> out;
  if (!traffic.pairs.empty()) {
    for (auto [s, d] : traffic.pairs) {
      if (s >= nodes || d >= nodes) throw InvalidConfig("session endpoint out of range");
      out.push_back(make(s, d));
    }
    return out;
  }
  if (traffic.sessions == 0) return out;
  if (nodes < 2) throw InvalidConfig("traffic needs at least two nodes");
  if (traffic.sessions > nodes * (nodes - 1))
    throw InvalidConfig("more sessions than ordered node pairs");
  std::set<std::pair<NodeId, NodeId>> used;
  while (out.size() < traffic.sessions) {
    const auto s = static_cast<NodeId>(rng.below(nodes));
    auto d = static_cast<NodeId>(rng.below(nodes - 1));
    if (d >= s) ++d;
    if (!used.insert({s, d}).second) continue;
    out.push_back(make(s, d));
  }
  return out;
}

}  // namespace antmesh
