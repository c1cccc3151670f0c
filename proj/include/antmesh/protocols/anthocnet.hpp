#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>
#include <vector>

#include "antmesh/routing.hpp"

namespace antmesh {

struct AntHocNetParams {
  double beta = 20.0;           // routing exponent for data
  Seconds sample_interval = 1.0;
  double explore_prob = 0.1;
  Seconds hop_cost = 0.0;       // 0 means one data packet transmission time
  std::uint32_t max_hops = 0;   // ant hop budget; 0 means node count
  double smoothing = 0.7;       // weight of the old value when a path is re-measured
  Seconds session_timeout = 2.0;  // a session is live while data was sent this recently

  void validate() const {
    if (!(beta >= 1.0)) throw InvalidConfig("anthocnet.beta must be >= 1");
    if (!(sample_interval > 0.0)) throw InvalidConfig("anthocnet.sample_interval must be > 0");
    if (!(explore_prob >= 0.0 && explore_prob <= 0.5))
      throw InvalidConfig("anthocnet.explore_prob must be in [0, 0.5]");
    if (!(hop_cost >= 0.0)) throw InvalidConfig("anthocnet.hop_cost must be >= 0");
    if (!(smoothing >= 0.0 && smoothing < 1.0))
      throw InvalidConfig("anthocnet.smoothing must be in [0, 1)");
  }
};

struct PathQuality {
  std::uint32_t hops = 1;
  Seconds trip_time = 0.0;
};

namespace anthocnet {

/// Pheromone for a measured path: T = 2 / (trip_time + hops * hop_cost).
inline double pheromone_from_quality(const PathQuality& q, Seconds hop_cost) {
  if (q.hops < 1 || !(q.trip_time > 0.0)) throw InvalidRange("path quality out of range");
  return 2.0 / (q.trip_time + static_cast<double>(q.hops) * hop_cost);
}

/// Data next-hop distribution: P_n = T_n^beta / sum_j T_j^beta over the
/// positive entries. Computed relative to the largest entry so that large
/// exponents cannot overflow.
inline Weights data_distribution(const PheromoneRow& row, double beta) {
  Weights out;
  double top = 0.0;
  for (const auto& [j, t] : row.entries()) top = std::max(top, t);
  if (!(top > 0.0)) return out;
  double total = 0.0;
  for (const auto& [j, t] : row.entries()) {
    if (t <= 0.0) continue;
    const double w = std::pow(t / top, beta);
    out.emplace_back(j, w);
    total += w;
  }
  for (auto& [j, w] : out) w /= total;
  return out;
}

}  // namespace anthocnet

/// Hybrid AntHocNet: reactive flooded setup with first-copy-only acceptance,
/// stochastic data forwarding with a steep exponent, and periodic sampling
/// ants that keep live sessions' paths measured and add alternatives.
class AntHocNet final : public RoutingProtocol {
 public:
  struct AntPayload {
    AntState ant;
    bool proactive = false;
  };
  struct BreakNotice {
    NodeId destination = kNoNode;
  };

  AntHocNet(ProtocolContext ctx, CommonRouting common, AntHocNetParams params,
            std::uint32_t data_packet_bits)
      : RoutingProtocol(std::move(ctx), common), params_(params), tables_(node_count()),
        seen_(node_count()), last_data_(node_count()),
        ant_rng_(&stream("anthocnet.ant")), data_rng_(&stream("anthocnet.data")),
        discovery_(engine(), common.discovery_timeout, common.discovery_retries,
                   make_hooks()) {
    params_.validate();
    if (params_.hop_cost == 0.0) params_.hop_cost = link().transmission_time(data_packet_bits);
    if (params_.max_hops == 0) params_.max_hops = static_cast<std::uint32_t>(node_count());
  }

  std::string_view name() const override { return "anthocnet"; }
  const AntHocNetParams& params() const noexcept { return params_; }

  void start() override {
    auto& rng = stream("anthocnet.phase");
    for (NodeId s = 0; s < node_count(); ++s) {
      const Seconds phase = rng.uniform(0.0, params_.sample_interval);
      engine().schedule_in(phase, EventKind::AntLaunch, [this, s] { sample_tick(s); });
    }
  }

  void on_data_to_send(NodeId src, Packet pkt) override {
    last_data_[src][pkt.dst] = now();
    forward_data(src, std::move(pkt));
  }

  void on_packet(NodeId at, Packet pkt) override {
    switch (pkt.kind) {
      case PacketKind::Data: forward_data(at, std::move(pkt)); break;
      case PacketKind::Fant: on_fant(at, std::move(pkt)); break;
      case PacketKind::Bant: on_bant(at, std::any_cast<AntPayload>(std::move(pkt.payload))); break;
      case PacketKind::Rerr: {
        const auto notice = std::any_cast<BreakNotice>(pkt.payload);
        if (auto* row = tables_[at].find(notice.destination)) {
          row->erase(pkt.prev_hop);
          if (row->empty()) tables_[at].erase_row(notice.destination);
        }
        break;
      }
      default: break;
    }
  }

  void on_link_break(NodeId from, NodeId to, Packet pkt) override {
    tables_[from].erase_neighbor(to);
    ++breaks_;
    if (pkt.kind != PacketKind::Data) return;
    if (!tables_[from].has_positive(pkt.dst)) notify_upstream(from, pkt);
    forward_data(from, std::move(pkt));
  }

  std::size_t connectivity(NodeId node) const override {
    std::size_t n = 0;
    for (const auto& [d, row] : tables_[node].rows())
      if (row.sum() > 0.0) ++n;
    return n;
  }

  const PheromoneTable& table(NodeId node) const { return tables_.at(node); }
  std::uint64_t setups_started() const noexcept { return discovery_.started(); }
  std::uint64_t bants_completed() const noexcept { return bants_completed_; }
  std::uint64_t duplicate_fants() const noexcept { return duplicates_; }
  std::uint64_t discovery_failures() const noexcept { return failures_; }
  std::uint64_t proactive_ants() const noexcept { return proactive_sent_; }
  std::uint64_t proactive_hops() const noexcept { return proactive_hops_; }
  /// Proactive ant hops taken over a link without positive pheromone.
  std::uint64_t unguided_hops() const noexcept { return unguided_hops_; }

 private:
  DiscoveryTracker::Hooks make_hooks() {
    DiscoveryTracker::Hooks h;
    h.has_route = [this](NodeId s, NodeId d) { return tables_[s].has_positive(d); };
    h.send_request = [this](NodeId s, NodeId d, std::uint32_t) { flood_fant(s, d); };
    h.succeeded = [this](NodeId s, NodeId d) { flush(s, d); };
    h.failed = [this](NodeId s, NodeId d) {
      ++failures_;
      for (auto& p : buffer().take(s, d)) drop(p, DropReason::NoRoute);
    };
    return h;
  }

  void flood_fant(NodeId s, NodeId d) {
    AntPayload payload;
    payload.ant.kind = AntKind::Fant;
    payload.ant.source = s;
    payload.ant.destination = d;
    payload.ant.max_life = params_.max_hops;
    payload.ant.arrive(s, now());
    Packet p = make_control(PacketKind::Fant, s, d);
    payload.ant.id = p.uid;
    seen_[s].insert(p.uid);
    p.payload = std::move(payload);
    link().broadcast(p, s, Priority::Data);
  }

  void on_fant(NodeId at, Packet pkt) {
    auto payload = std::any_cast<AntPayload>(std::move(pkt.payload));
    auto& ant = payload.ant;
    if (payload.proactive) {
      if (ant.has_visited(at)) return;  // looped
    } else if (!seen_[at].insert(pkt.uid).second) {
      ++duplicates_;
      return;
    }
    ant.arrive(at, now());
    if (at == ant.destination) {
      AntPayload back = payload;
      back.ant.kind = AntKind::Bant;
      std::reverse(back.ant.visited.begin(), back.ant.visited.end());
      std::reverse(back.ant.hop_times.begin(), back.ant.hop_times.end());
      back.ant.cursor = 0;
      send_bant(at, std::move(back));
      return;
    }
    if (ant.hops() >= ant.max_life) return;
    if (!payload.proactive) {
      pkt.payload = std::move(payload);
      link().broadcast(pkt, at, Priority::Data);
      return;
    }
    step_proactive(at, std::move(payload));
  }

  void send_bant(NodeId at, AntPayload bant) {
    const NodeId next = bant.ant.visited[bant.ant.cursor + 1];
    Packet p = make_control(PacketKind::Bant, bant.ant.destination, bant.ant.source);
    p.uid = bant.ant.id;
    p.payload = std::move(bant);
    link().unicast(std::move(p), at, next, Priority::Control);
  }

  void on_bant(NodeId at, AntPayload bant) {
    auto& ant = bant.ant;
    ant.cursor++;
    const NodeId via = ant.visited[ant.cursor - 1];
    PathQuality q;
    q.hops = ant.cursor;
    q.trip_time = ant.hop_times[0] - ant.hop_times[ant.cursor];
    const double fresh = anthocnet::pheromone_from_quality(q, params_.hop_cost);
    auto& row = tables_[at].row(ant.destination);
    const double old = row.get(via);
    row.set(via, old > 0.0 ? params_.smoothing * old + (1.0 - params_.smoothing) * fresh : fresh);
    if (at == ant.source) {
      ++bants_completed_;
      discovery_.resolve(at, ant.destination);
      flush(at, ant.destination);
      return;
    }
    send_bant(at, std::move(bant));
  }

  // Each source samples its live sessions on its own randomly phased timer.
  void sample_tick(NodeId s) {
    engine().schedule_in(params_.sample_interval, EventKind::AntLaunch, [this, s] { sample_tick(s); });
    for (const auto& [d, t] : last_data_[s]) {
      if (now() - t > params_.session_timeout) continue;
      if (!tables_[s].has_positive(d)) {
        discovery_.begin(s, d);
        continue;
      }
      AntPayload payload;
      payload.proactive = true;
      payload.ant.kind = AntKind::Fant;
      payload.ant.source = s;
      payload.ant.destination = d;
      payload.ant.max_life = params_.max_hops;
      payload.ant.arrive(s, now());
      payload.ant.id = link().new_uid();
      ++proactive_sent_;
      step_proactive(s, std::move(payload));
    }
  }

  /// One hop of a sampling ant: the pheromone-power rule with exponent 1 over positive,
  /// unvisited entries, or a uniform unvisited neighbor with probability
  /// explore_prob. Without positive entries the ant only continues if the
  /// destination itself is in range.
  void step_proactive(NodeId at, AntPayload payload) {
    const auto& ant = payload.ant;
    NodeId next = kNoNode;
    bool guided = false;
    if (params_.explore_prob > 0.0 && ant_rng_->bernoulli(params_.explore_prob)) {
      std::vector<NodeId> fresh;
      for (NodeId j : link().neighbors(at))
        if (!ant.has_visited(j)) fresh.push_back(j);
      if (!fresh.empty()) next = fresh[ant_rng_->below(fresh.size())];
    } else {
      Weights w;
      if (const auto* row = tables_[at].find(ant.destination))
        for (const auto& [j, t] : row->entries())
          if (t > 0.0 && !ant.has_visited(j)) w.emplace_back(j, t);
      if (!w.empty()) {
        next = sample_weighted(w, *ant_rng_);
        guided = true;
      } else if (link().is_neighbor(at, ant.destination)) {
        next = ant.destination;
      }
    }
    if (next == kNoNode) return;
    ++proactive_hops_;
    if (!guided && tables_[at].find(ant.destination) == nullptr) ++unguided_hops_;
    else if (!guided && tables_[at].find(ant.destination)->get(next) <= 0.0) ++unguided_hops_;
    Packet p = make_control(PacketKind::Fant, ant.source, ant.destination);
    p.uid = ant.id;
    p.payload = std::move(payload);
    link().unicast(std::move(p), at, next, Priority::Data);
  }

  void forward_data(NodeId i, Packet pkt) {
    if (pkt.dst == i) {
      deliver(pkt);
      return;
    }
    if (ttl_exceeded(pkt)) return;
    const auto* row = tables_[i].find(pkt.dst);
    const Weights dist = row ? anthocnet::data_distribution(*row, params_.beta) : Weights{};
    if (dist.empty()) {
      if (i == pkt.src) {
        const NodeId d = pkt.dst;
        if (hold(i, std::move(pkt))) discovery_.begin(i, d);
      } else {
        notify_upstream(i, pkt);
        drop(pkt, DropReason::NoRoute);
      }
      return;
    }
    const NodeId next = sample_weighted(dist, *data_rng_);
    link().unicast(std::move(pkt), i, next, Priority::Data);
  }

  /// Tells the node that handed us `pkt` that we no longer reach its
  /// destination.
  void notify_upstream(NodeId at, const Packet& pkt) {
    const NodeId up = pkt.prev_hop == at ? pkt.upstream : pkt.prev_hop;
    if (up == kNoNode || up == at || at == pkt.src) return;
    Packet n = make_control(PacketKind::Rerr, at, up);
    n.payload = BreakNotice{pkt.dst};
    link().unicast(std::move(n), at, up, Priority::Control);
  }

  void flush(NodeId node, NodeId dest) {
    if (!buffer().has(node, dest) || !tables_[node].has_positive(dest)) return;
    for (auto& p : buffer().take(node, dest)) forward_data(node, std::move(p));
  }

  AntHocNetParams params_;
  std::vector<PheromoneTable> tables_;
  std::vector<std::unordered_set<std::uint64_t>> seen_;
  std::vector<std::map<NodeId, Seconds>> last_data_;
  RngStream* ant_rng_;
  RngStream* data_rng_;
  DiscoveryTracker discovery_;
  std::uint64_t proactive_hops_ = 0;
  std::uint64_t unguided_hops_ = 0;
  std::uint64_t bants_completed_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t failures_ = 0;
  std::uint64_t proactive_sent_ = 0;
  std::uint64_t breaks_ = 0;
};

}  // namespace antmesh
