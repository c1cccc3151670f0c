#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "antmesh/routing.hpp"

namespace antmesh {

enum class AraMode : std::uint8_t { Flood, Forward };

struct AraParams {
  AraMode mode = AraMode::Flood;
  std::uint32_t max_hops = 0;   // FANT hop limit; 0 means node count
  double evap_rate = 0.9;       // multiplicative decay per second
  double reinforce_unit = 1.0;
  Seconds evap_interval = 1.0;

  void validate() const {
    if (!(evap_rate > 0.0 && evap_rate < 1.0)) throw InvalidConfig("ara.evap_rate must be in (0,1)");
    if (!(reinforce_unit > 0.0)) throw InvalidConfig("ara.reinforce_unit must be > 0");
    if (!(evap_interval > 0.0)) throw InvalidConfig("ara.evap_interval must be > 0");
  }
};

namespace ara {

inline constexpr double kPheromoneFloor = 1e-6;

/// Pheromone deposited by a backward ant that has travelled `hops` hops.
inline double bant_increment(std::uint32_t hops, double reinforce_unit) {
  if (hops == 0) throw InvalidRange("bant increment needs at least one hop");
  return reinforce_unit / static_cast<double>(hops);
}

/// Scales every entry by evap_rate^dt and deletes entries under the floor.
inline void evaporate(PheromoneTable& table, Seconds dt, double evap_rate) {
  if (dt < 0.0) throw InvalidRange("evaporation interval must be >= 0");
  if (dt == 0.0) return;
  const double f = std::pow(evap_rate, dt);
  for (auto it = table.rows().begin(); it != table.rows().end();) {
    auto& row = it->second;
    row.scale(f);
    row.erase_if([](NodeId, double v) { return v < kPheromoneFloor; });
    it = row.empty() ? table.rows().erase(it) : std::next(it);
  }
}

}  // namespace ara

/// ARA: purely reactive. Route discovery by flooded (or pheromone-guided)
/// forward ants, pheromone installed by backward ants in inverse proportion
/// to hop count, stochastic data forwarding that reinforces the used entry,
/// periodic evaporation, and backtracking of data on route failure. No HELLO
/// packets are ever emitted.
class Ara final : public RoutingProtocol {
 public:
  /// Data packets carry the node sequence they travelled so that a route
  /// failure can send them back one hop at a time.
  struct DataTrail {
    std::vector<NodeId> path;
    bool bounced = false;
  };

  Ara(ProtocolContext ctx, CommonRouting common, AraParams params)
      : RoutingProtocol(std::move(ctx), common), params_(params), tables_(node_count()),
        seen_(node_count()), data_rng_(&stream("ara.data")),
        discovery_(engine(), common.discovery_timeout, common.discovery_retries,
                   make_hooks()) {
    params_.validate();
    if (params_.max_hops == 0) params_.max_hops = static_cast<std::uint32_t>(node_count());
  }

  std::string_view name() const override { return "ara"; }
  const AraParams& params() const noexcept { return params_; }

  void start() override {
    engine().schedule_in(params_.evap_interval, EventKind::EvaporationTick, [this] { evaporate_tick(); });
  }

  void on_data_to_send(NodeId src, Packet pkt) override {
    pkt.payload = DataTrail{{src}, false};
    forward_data(src, std::move(pkt));
  }

  void on_packet(NodeId at, Packet pkt) override {
    switch (pkt.kind) {
      case PacketKind::Data: on_data(at, std::move(pkt)); break;
      case PacketKind::Fant: on_fant(at, std::move(pkt)); break;
      case PacketKind::Bant: on_bant(at, std::any_cast<AntState>(std::move(pkt.payload))); break;
      default: break;
    }
  }

  void on_link_break(NodeId from, NodeId to, Packet pkt) override {
    if (pkt.kind == PacketKind::Data) {
      std::any_cast<DataTrail&>(pkt.payload).bounced = false;
      on_route_failure(from, to, std::move(pkt), /*all_destinations=*/true);
    } else {
      zero_neighbor(from, to);
    }
  }

  std::size_t connectivity(NodeId node) const override {
    std::size_t n = 0;
    for (const auto& [d, row] : tables_[node].rows())
      if (row.sum() > 0.0) ++n;
    return n;
  }

  const PheromoneTable& table(NodeId node) const { return tables_.at(node); }
  PheromoneTable& table(NodeId node) { return tables_.at(node); }

  std::uint64_t discoveries() const noexcept { return discovery_.started(); }
  std::uint64_t bants_returned() const noexcept { return bants_returned_; }
  std::uint64_t fant_unicasts() const noexcept { return fant_unicasts_; }
  std::uint64_t fant_broadcasts() const noexcept { return fant_broadcasts_; }
  std::uint64_t backtracks() const noexcept { return backtracks_; }

  /// Starts route discovery from s towards d (normally triggered by data).
  void discover(NodeId s, NodeId d) { discovery_.begin(s, d); }

 private:
  DiscoveryTracker::Hooks make_hooks() {
    DiscoveryTracker::Hooks h;
    h.has_route = [this](NodeId s, NodeId d) { return tables_[s].has_positive(d); };
    h.send_request = [this](NodeId s, NodeId d, std::uint32_t) { send_fant(s, d); };
    h.succeeded = [this](NodeId s, NodeId d) { flush(s, d); };
    h.failed = [this](NodeId s, NodeId d) {
      for (auto& p : buffer().take(s, d)) drop(p, DropReason::NoRoute);
    };
    return h;
  }

  void send_fant(NodeId s, NodeId d) {
    AntState ant;
    ant.kind = AntKind::Fant;
    ant.source = s;
    ant.destination = d;
    ant.max_life = params_.max_hops;
    ant.arrive(s, now());
    Packet p = make_control(PacketKind::Fant, s, d);
    ant.id = p.uid;
    seen_[s].insert({s, p.uid});
    p.payload = std::move(ant);
    relay_fant(s, std::move(p));
  }

  /// Flood: broadcast. Forward: unicast to the strongest neighbor if this
  /// node already has positive pheromone toward the destination.
  void relay_fant(NodeId at, Packet p) {
    const NodeId d = p.dst;
    if (params_.mode == AraMode::Forward && tables_[at].has_positive(d)) {
      ++fant_unicasts_;
      const NodeId next = tables_[at].find(d)->argmax();
      link().unicast(std::move(p), at, next, Priority::Control);
      return;
    }
    ++fant_broadcasts_;
    link().broadcast(p, at, Priority::Control);
  }

  void on_fant(NodeId at, Packet pkt) {
    auto ant = std::any_cast<AntState>(std::move(pkt.payload));
    if (ant.has_visited(at)) return;
    const bool first = seen_[at].insert({ant.source, pkt.uid}).second;
    ant.arrive(at, now());
    if (at == ant.destination) {
      // Every copy reaching the destination is returned.
      AntState bant = ant;
      bant.kind = AntKind::Bant;
      std::swap(bant.source, bant.destination);
      std::reverse(bant.visited.begin(), bant.visited.end());
      std::reverse(bant.hop_times.begin(), bant.hop_times.end());
      bant.cursor = 0;
      install(at, bant);
      send_bant(at, std::move(bant));
      return;
    }
    if (!first) return;
    if (ant.hops() >= ant.max_life) return;
    pkt.payload = std::move(ant);
    relay_fant(at, std::move(pkt));
  }

  void send_bant(NodeId at, AntState bant) {
    const NodeId next = bant.visited[bant.cursor + 1];
    Packet p = make_control(PacketKind::Bant, bant.source, bant.destination);
    p.payload = std::move(bant);
    link().unicast(std::move(p), at, next, Priority::Control);
  }

  /// Pheromone installed at the BANT's current node: toward the FANT's
  /// destination via the hop the BANT came from (1/h, h = hops back to the
  /// destination) and toward the FANT's source via the hop the FANT came
  /// from (1/h, h = FANT hops from the source).
  void install(NodeId at, const AntState& bant) {
    const auto len = static_cast<std::uint32_t>(bant.visited.size());
    const std::uint32_t to_dest = bant.cursor;
    const std::uint32_t to_src = len - 1 - bant.cursor;
    if (to_dest > 0)
      tables_[at].row(bant.source).add(bant.visited[bant.cursor - 1],
                                       ara::bant_increment(to_dest, params_.reinforce_unit));
    if (to_src > 0)
      tables_[at].row(bant.destination).add(bant.visited[bant.cursor + 1],
                                            ara::bant_increment(to_src, params_.reinforce_unit));
  }

  void on_bant(NodeId at, AntState bant) {
    bant.cursor++;
    install(at, bant);
    // The BANT's `source` is the FANT's destination.
    flush(at, bant.source);
    if (bant.cursor + 1 >= bant.visited.size()) {
      ++bants_returned_;
      discovery_.resolve(at, bant.source);
      return;
    }
    send_bant(at, std::move(bant));
  }

  void on_data(NodeId at, Packet pkt) {
    auto& trail = std::any_cast<DataTrail&>(pkt.payload);
    if (trail.bounced) {
      trail.bounced = false;
      ++backtracks_;
      const NodeId failed = pkt.prev_hop;
      trail.path.pop_back();
      on_route_failure(at, failed, std::move(pkt), /*all_destinations=*/false);
      return;
    }
    trail.path.push_back(at);
    forward_data(at, std::move(pkt));
  }

  Weights candidates(NodeId i, const Packet& pkt) const {
    Weights w;
    const auto* row = tables_[i].find(pkt.dst);
    if (!row) return w;
    for (const auto& [j, v] : row->entries())
      if (v > 0.0) w.emplace_back(j, v);
    // Avoid bouncing straight back unless it is the only option.
    if (w.size() > 1) {
      const NodeId back = pkt.prev_hop == i ? pkt.upstream : pkt.prev_hop;
      std::erase_if(w, [back](const Weight& x) { return x.first == back; });
    }
    return w;
  }

  void forward_data(NodeId i, Packet pkt) {
    if (pkt.dst == i) {
      deliver(pkt);
      return;
    }
    if (ttl_exceeded(pkt)) return;
    const Weights w = candidates(i, pkt);
    if (w.empty()) {
      on_route_failure(i, kNoNode, std::move(pkt), false);
      return;
    }
    const NodeId next = sample_weighted(w, *data_rng_);
    tables_[i].row(pkt.dst).add(next, params_.reinforce_unit);
    link().unicast(std::move(pkt), i, next, Priority::Data);
  }

  /// Route failure at `node` for `pkt`: drop the entry via the failed
  /// neighbor, retry an alternative, otherwise backtrack one hop; the source
  /// starts a new discovery.
  void on_route_failure(NodeId node, NodeId failed, Packet pkt, bool all_destinations) {
    if (failed != kNoNode) {
      if (all_destinations) {
        zero_neighbor(node, failed);
      } else if (auto* row = tables_[node].find(pkt.dst)) {
        row->erase(failed);
        if (row->empty()) tables_[node].erase_row(pkt.dst);
      }
    }
    if (pkt.dst == node) {
      deliver(pkt);
      return;
    }
    if (!candidates(node, pkt).empty()) {
      forward_data(node, std::move(pkt));
      return;
    }
    if (node == pkt.src) {
      const NodeId d = pkt.dst;
      if (hold(node, std::move(pkt))) discovery_.begin(node, d);
      return;
    }
    auto& trail = std::any_cast<DataTrail&>(pkt.payload);
    if (trail.path.size() < 2 || ttl_exceeded(pkt)) {
      if (trail.path.size() < 2) drop(pkt, DropReason::NoRoute);
      return;
    }
    const NodeId back = trail.path[trail.path.size() - 2];
    trail.bounced = true;
    link().unicast(std::move(pkt), node, back, Priority::Data);
  }

  void zero_neighbor(NodeId node, NodeId nbr) { tables_[node].erase_neighbor(nbr); }

  void flush(NodeId node, NodeId dest) {
    if (!buffer().has(node, dest) || !tables_[node].has_positive(dest)) return;
    for (auto& p : buffer().take(node, dest)) forward_data(node, std::move(p));
  }

  void evaporate_tick() {
    engine().schedule_in(params_.evap_interval, EventKind::EvaporationTick, [this] { evaporate_tick(); });
    for (auto& t : tables_) ara::evaporate(t, params_.evap_interval, params_.evap_rate);
  }

  AraParams params_;
  std::vector<PheromoneTable> tables_;
  std::vector<std::set<std::pair<NodeId, std::uint64_t>>> seen_;
  RngStream* data_rng_;
  DiscoveryTracker discovery_;
  std::uint64_t bants_returned_ = 0;
  std::uint64_t fant_unicasts_ = 0;
  std::uint64_t fant_broadcasts_ = 0;
  std::uint64_t backtracks_ = 0;
};

}  // namespace antmesh
