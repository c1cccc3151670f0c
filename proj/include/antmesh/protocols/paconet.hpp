#pragma once

#include <vector>

#include "antmesh/routing.hpp"

namespace antmesh {

struct PaconetParams {
  double epsilon = 1.0;
  double xi = 0.1;             // evaporation applied to siblings on each forward step
  std::uint32_t max_life = 0;  // FANT hop budget; 0 means 2 x node count

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidConfig("paconet.epsilon must be > 0");
    if (!(xi > 0.0 && xi < 1.0)) throw InvalidConfig("paconet.xi must be in (0,1)");
  }
};

namespace paconet {

/// eps / (T + w): T is the time travelled before the hop, w the hop itself.
inline double forward_increment(double epsilon, Seconds travelled, Seconds hop) {
  const Seconds total = travelled + hop;
  if (!(total > 0.0)) throw DegenerateTime();
  return epsilon / total;
}

/// Scales every entry of `row` except `chosen` by (1 - xi).
inline void evaporate_siblings(PheromoneRow& row, NodeId chosen, double xi) {
  for (auto& [j, v] : row.entries())
    if (j != chosen) v *= 1.0 - xi;
}

/// Forward step: reinforce `chosen` and evaporate its siblings.
inline void forward_update(PheromoneRow& row, NodeId chosen, double epsilon, Seconds travelled,
                           Seconds hop, double xi) {
  row.add(chosen, forward_increment(epsilon, travelled, hop));
  evaporate_siblings(row, chosen, xi);
}

/// eps / T' with T' = T(s, D) - T(s, k). Throws DegenerateTime if T' <= 0.
inline double backward_increment(double epsilon, Seconds total, Seconds arrival_k) {
  const Seconds t = total - arrival_k;
  if (!(t > 0.0)) throw DegenerateTime();
  return epsilon / t;
}

struct Selection {
  NodeId next = kNoNode;
  bool forced = false;  // every neighbor had been visited
};

/// Next hop for a FANT at a node with neighbors `nbrs` (ascending ids) and
/// pheromone row `row` toward the ant's destination (may be null). The
/// destination itself wins when it is a neighbor; otherwise the unvisited
/// neighbor with the most pheromone, ties to the lowest id; only when all are
/// visited, the neighbor with the most pheromone overall.
inline Selection fant_select(const std::vector<NodeId>& nbrs, const PheromoneRow* row,
                             const AntState& ant) {
  if (nbrs.empty()) throw NoNeighbors();
  for (NodeId j : nbrs)
    if (j == ant.destination) return {j, false};
  auto best_of = [&](bool unvisited_only) {
    NodeId best = kNoNode;
    double best_v = -1.0;
    for (NodeId j : nbrs) {
      if (unvisited_only && ant.has_visited(j)) continue;
      const double v = row ? row->get(j) : 0.0;
      if (v > best_v) {
        best = j;
        best_v = v;
      }
    }
    return best;
  };
  if (NodeId j = best_of(true); j != kNoNode) return {j, false};
  return {best_of(false), true};
}

}  // namespace paconet

/// PACONET: a single forward ant walks greedily toward unvisited,
/// high-pheromone neighbors, laying pheromone toward its source as it goes;
/// the backward ant retraces the loop-erased path and lays pheromone toward
/// the destination. Data follows the strongest entry.
class Paconet final : public RoutingProtocol {
 public:
  Paconet(ProtocolContext ctx, CommonRouting common, PaconetParams params)
      : RoutingProtocol(std::move(ctx), common), params_(params), tables_(node_count()),
        discovery_(engine(), common.discovery_timeout, common.discovery_retries,
                   make_hooks()) {
    params_.validate();
    if (params_.max_life == 0) params_.max_life = static_cast<std::uint32_t>(2 * node_count());
  }

  std::string_view name() const override { return "paconet"; }
  const PaconetParams& params() const noexcept { return params_; }

  void on_data_to_send(NodeId src, Packet pkt) override { forward_data(src, std::move(pkt)); }

  void on_packet(NodeId at, Packet pkt) override {
    switch (pkt.kind) {
      case PacketKind::Data: forward_data(at, std::move(pkt)); break;
      case PacketKind::Fant: on_fant(at, std::move(pkt)); break;
      case PacketKind::Bant: on_bant(at, std::any_cast<AntState>(std::move(pkt.payload))); break;
      default: break;
    }
  }

  void on_link_break(NodeId from, NodeId to, Packet pkt) override {
    tables_[from].erase_neighbor(to);
    if (pkt.kind == PacketKind::Data) {
      forward_data(from, std::move(pkt));
    } else if (pkt.kind == PacketKind::Fant) {
      // The walk continues from the node that still holds the ant.
      auto ant = std::any_cast<AntState>(std::move(pkt.payload));
      step_fant(from, std::move(ant));
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

  /// Launches one FANT from s toward d. No ant when s == d.
  void launch_fant(NodeId s, NodeId d) {
    if (s == d) return;
    AntState ant;
    ant.kind = AntKind::Fant;
    ant.source = s;
    ant.destination = d;
    ant.max_life = params_.max_life;
    ant.arrive(s, now());
    ant.id = link().new_uid();
    ++fants_launched_;
    step_fant(s, std::move(ant));
  }

  /// Called on every FANT step with the selection made; for invariant checks.
  void set_step_observer(std::function<void(NodeId, const AntState&, const std::vector<NodeId>&,
                                            paconet::Selection)> fn) {
    observer_ = std::move(fn);
  }

  /// Called with the loop-erased path of every BANT created.
  void set_bant_observer(std::function<void(const std::vector<NodeId>&)> fn) {
    bant_observer_ = std::move(fn);
  }

  std::uint64_t fants_launched() const noexcept { return fants_launched_; }
  std::uint64_t fants_killed() const noexcept { return fants_killed_; }
  std::uint64_t bants_completed() const noexcept { return bants_completed_; }
  std::uint64_t forced_steps() const noexcept { return forced_steps_; }
  std::uint64_t degenerate_bants() const noexcept { return degenerate_; }

 private:
  DiscoveryTracker::Hooks make_hooks() {
    DiscoveryTracker::Hooks h;
    h.has_route = [this](NodeId s, NodeId d) { return tables_[s].has_positive(d); };
    h.send_request = [this](NodeId s, NodeId d, std::uint32_t) { launch_fant(s, d); };
    h.succeeded = [this](NodeId s, NodeId d) { flush(s, d); };
    h.failed = [this](NodeId s, NodeId d) {
      for (auto& p : buffer().take(s, d)) drop(p, DropReason::NoRoute);
    };
    return h;
  }

  void step_fant(NodeId at, AntState ant) {
    if (ant.hops() >= ant.max_life) {
      ++fants_killed_;
      return;
    }
    const auto nbrs = link().neighbors(at);
    if (nbrs.empty()) {
      ++fants_killed_;
      return;
    }
    const auto sel = paconet::fant_select(nbrs, tables_[at].find(ant.destination), ant);
    if (observer_) observer_(at, ant, nbrs, sel);
    if (sel.forced) {
      ++forced_steps_;
      if (!ant.allow_forced_revisit(at)) {
        ++fants_killed_;
        return;
      }
    }
    Packet p = make_control(PacketKind::Fant, ant.source, ant.destination);
    p.uid = ant.id;
    p.payload = std::move(ant);
    link().unicast(std::move(p), at, sel.next, Priority::Control);
  }

  void on_fant(NodeId at, Packet pkt) {
    auto ant = std::any_cast<AntState>(std::move(pkt.payload));
    const NodeId from = pkt.prev_hop;
    const Seconds t0 = ant.hop_times.front();
    const Seconds before = ant.hop_times.back() - t0;
    const Seconds hop = now() - ant.hop_times.back();
    ant.arrive(at, now());
    paconet::forward_update(tables_[at].row(ant.source), from, params_.epsilon, before, hop,
                            params_.xi);
    if (at != ant.destination) {
      step_fant(at, std::move(ant));
      return;
    }
    AntState bant = std::move(ant);
    bant.kind = AntKind::Bant;
    loop_erase(bant.visited, bant.hop_times);
    if (bant_observer_) bant_observer_(bant.visited);
    bant.cursor = static_cast<std::uint32_t>(bant.visited.size() - 1);
    send_bant(at, std::move(bant));
  }

  /// BANT state keeps the forward orientation; `cursor` walks from the
  /// destination back to index 0.
  void send_bant(NodeId at, AntState bant) {
    const NodeId next = bant.visited[bant.cursor - 1];
    Packet p = make_control(PacketKind::Bant, bant.destination, bant.source);
    p.payload = std::move(bant);
    link().unicast(std::move(p), at, next, Priority::Control);
  }

  void on_bant(NodeId at, AntState bant) {
    bant.cursor--;
    const Seconds total = bant.hop_times.back();
    double inc = 0.0;
    try {
      inc = paconet::backward_increment(params_.epsilon, total, bant.hop_times[bant.cursor]);
    } catch (const DegenerateTime&) {
      ++degenerate_;
      return;
    }
    tables_[at].row(bant.destination).add(bant.visited[bant.cursor + 1], inc);
    if (bant.cursor == 0) {
      ++bants_completed_;
      discovery_.resolve(at, bant.destination);
      return;
    }
    flush(at, bant.destination);
    send_bant(at, std::move(bant));
  }

  /// Highest-pheromone current neighbor toward dest, avoiding the previous
  /// hop when there is any other choice. kNoNode if none.
  NodeId best_hop(NodeId i, const Packet& pkt) const {
    if (link().is_neighbor(i, pkt.dst)) return pkt.dst;
    const auto* row = tables_[i].find(pkt.dst);
    if (!row) return kNoNode;
    NodeId best = kNoNode, back = kNoNode;
    double best_v = 0.0, back_v = 0.0;
    for (const auto& [j, v] : row->entries()) {
      if (!(v > 0.0) || !link().is_neighbor(i, j)) continue;
      if (j == pkt.prev_hop && pkt.prev_hop != i) {
        back = j;
        back_v = v;
        continue;
      }
      if (v > best_v) {
        best = j;
        best_v = v;
      }
    }
    return best != kNoNode ? best : (back_v > 0.0 ? back : kNoNode);
  }

  void forward_data(NodeId i, Packet pkt) {
    if (pkt.dst == i) {
      deliver(pkt);
      return;
    }
    if (ttl_exceeded(pkt)) return;
    const NodeId next = best_hop(i, pkt);
    if (next != kNoNode) {
      link().unicast(std::move(pkt), i, next, Priority::Data);
      return;
    }
    if (i == pkt.src) {
      const NodeId d = pkt.dst;
      if (hold(i, std::move(pkt))) discovery_.begin(i, d);
      return;
    }
    drop(pkt, DropReason::NoRoute);
  }

  void flush(NodeId node, NodeId dest) {
    if (!buffer().has(node, dest)) return;
    Packet probe;
    probe.dst = dest;
    probe.prev_hop = node;
    if (best_hop(node, probe) == kNoNode) return;
    for (auto& p : buffer().take(node, dest)) forward_data(node, std::move(p));
  }

  PaconetParams params_;
  std::vector<PheromoneTable> tables_;
  DiscoveryTracker discovery_;
  std::function<void(NodeId, const AntState&, const std::vector<NodeId>&, paconet::Selection)>
      observer_;
  std::function<void(const std::vector<NodeId>&)> bant_observer_;
  std::uint64_t fants_launched_ = 0;
  std::uint64_t fants_killed_ = 0;
  std::uint64_t bants_completed_ = 0;
  std::uint64_t forced_steps_ = 0;
  std::uint64_t degenerate_ = 0;
};

}  // namespace antmesh
