#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "antmesh/routing.hpp"

namespace antmesh {

struct AodvParams {
  Seconds hello_interval = 1.0;
  Seconds route_ttl = 10.0;
  std::uint32_t rreq_ttl = 0;  // 0 means node count

  void validate() const {
    if (!(hello_interval > 0.0)) throw InvalidConfig("aodv.hello_interval must be > 0");
    if (!(route_ttl > 0.0)) throw InvalidConfig("aodv.route_ttl must be > 0");
  }
};

struct AntAodvParams {
  std::optional<std::uint32_t> ant_count;  // default ceil(n / 10)
  std::uint32_t history_window = 0;        // 0 means node count
  Seconds ant_interval = 0.05;             // dwell time at each node

  void validate() const {
    if (!(ant_interval > 0.0)) throw InvalidConfig("antaodv.ant_interval must be > 0");
  }
};

struct RouteEntry {
  NodeId next_hop = kNoNode;
  std::uint32_t hops = 0;
  std::uint32_t seqno = 0;
  Seconds expires_at = 0.0;
  bool valid = false;
  std::set<NodeId> precursors;

  bool usable(Seconds now) const noexcept { return valid && expires_at > now; }
};

using RouteTable = std::map<NodeId, RouteEntry>;

/// AODV with simplified sequence numbers: RREQ flooding with a duplicate
/// cache, RREP along reverse routes, HELLO-based neighbor sensing, RERR to
/// precursors, and route lifetimes refreshed on use. No local repair.
class Aodv : public RoutingProtocol {
 public:
  struct Rreq {
    NodeId origin;
    std::uint32_t origin_seq;
    std::uint32_t id;
    NodeId dest;
    std::uint32_t dest_seq;
    std::uint32_t hop_count;
  };
  struct Rrep {
    NodeId origin;
    NodeId dest;
    std::uint32_t dest_seq;
    std::uint32_t hop_count;
  };
  struct Rerr {
    std::vector<std::pair<NodeId, std::uint32_t>> unreachable;
  };
  struct Hello {
    std::uint32_t seq;
  };

  Aodv(ProtocolContext ctx, CommonRouting common, AodvParams params)
      : RoutingProtocol(std::move(ctx), common), params_(params), routes_(node_count()),
        heard_(node_count()), seq_(node_count(), 0), rreq_id_(node_count(), 0),
        seen_(node_count()),
        discovery_(engine(), common.discovery_timeout, common.discovery_retries,
                   make_hooks()) {
    params_.validate();
    if (params_.rreq_ttl == 0) params_.rreq_ttl = static_cast<std::uint32_t>(node_count());
  }

  std::string_view name() const override { return "aodv"; }
  const AodvParams& params() const noexcept { return params_; }

  void start() override {
    auto& rng = stream("aodv.hello");
    for (NodeId i = 0; i < node_count(); ++i) {
      const Seconds phase = rng.uniform(0.0, params_.hello_interval);
      engine().schedule_in(phase, EventKind::HelloTick, [this, i] { hello_tick(i); });
    }
  }

  void on_data_to_send(NodeId src, Packet pkt) override { forward_data(src, std::move(pkt)); }

  void on_packet(NodeId at, Packet pkt) override {
    switch (pkt.kind) {
      case PacketKind::Data: forward_data(at, std::move(pkt)); break;
      case PacketKind::Hello: on_hello(at, pkt.prev_hop, std::any_cast<Hello>(pkt.payload).seq); break;
      case PacketKind::Rreq: on_rreq(at, std::move(pkt)); break;
      case PacketKind::Rrep: on_rrep(at, std::move(pkt)); break;
      case PacketKind::Rerr: on_rerr(at, pkt.prev_hop, std::any_cast<const Rerr&>(pkt.payload)); break;
      default: break;
    }
  }

  void on_link_break(NodeId from, NodeId to, Packet pkt) override {
    heard_[from].erase(to);
    rerr_on_break(from, to);
    if (pkt.kind != PacketKind::Data) return;
    if (from == pkt.src) {
      forward_data(from, std::move(pkt));
    } else {
      drop(pkt, DropReason::LinkBreak);
    }
  }

  std::size_t connectivity(NodeId node) const override {
    std::size_t n = 0;
    for (const auto& [d, e] : routes_[node])
      if (e.usable(now())) ++n;
    return n;
  }

  const RouteTable& routes(NodeId node) const { return routes_.at(node); }
  RouteTable& routes(NodeId node) { return routes_.at(node); }

  /// Neighbors heard within the last two HELLO intervals.
  std::vector<NodeId> hello_neighbors(NodeId node) const {
    std::vector<NodeId> out;
    for (const auto& [j, t] : heard_[node])
      if (now() - t <= 2.0 * params_.hello_interval) out.push_back(j);
    return out;
  }

  void discover(NodeId s, NodeId d) { discovery_.begin(s, d); }

  std::uint64_t discoveries() const noexcept { return discovery_.started(); }
  std::uint64_t rreqs_sent() const noexcept { return discovery_.requests_sent(); }
  std::uint64_t rreqs_relayed() const noexcept { return rreqs_relayed_; }
  std::uint64_t duplicate_rreqs() const noexcept { return duplicate_rreqs_; }
  std::uint64_t intermediate_replies() const noexcept { return intermediate_replies_; }
  std::uint64_t rerrs_sent() const noexcept { return rerrs_sent_; }
  std::uint64_t hellos_sent() const noexcept { return hellos_sent_; }

  /// Invalidates every route through `lost` and notifies precursors with one
  /// aggregated RERR each.
  void rerr_on_break(NodeId node, NodeId lost) {
    std::vector<std::pair<NodeId, std::uint32_t>> gone;
    for (auto& [d, e] : routes_[node]) {
      if (e.valid && e.next_hop == lost) gone.emplace_back(d, e.seqno);
    }
    invalidate_and_notify(node, gone);
  }

 protected:
  /// Installs or updates the route to `dest` when the offer is fresher, or
  /// equally fresh and shorter, or the current entry is unusable.
  bool offer_route(NodeId at, NodeId dest, NodeId via, std::uint32_t hops, std::uint32_t seqno) {
    if (dest == at) return false;
    auto [it, fresh] = routes_[at].try_emplace(dest);
    RouteEntry& e = it->second;
    const bool better = fresh || !e.usable(now()) || seqno > e.seqno ||
                        (seqno == e.seqno && hops < e.hops);
    if (!better) return false;
    e.next_hop = via;
    e.hops = hops;
    e.seqno = std::max(seqno, e.seqno);
    e.valid = true;
    e.expires_at = now() + params_.route_ttl;
    on_route_installed(at, dest);
    return true;
  }

  /// A usable route to dest appeared at `at`.
  void on_route_installed(NodeId at, NodeId dest) {
    if (buffer().has(at, dest)) {
      discovery_.resolve(at, dest);
      flush(at, dest);
    }
  }

  void refresh(NodeId at, NodeId dest) {
    auto it = routes_[at].find(dest);
    if (it != routes_[at].end() && it->second.valid)
      it->second.expires_at = std::max(it->second.expires_at, now() + params_.route_ttl);
  }

  std::uint32_t own_seq(NodeId node) const { return seq_[node]; }
  std::uint32_t seq_for(NodeId at, NodeId dest) const { return route_seq(at, dest); }

  AodvParams params_;
  std::vector<RouteTable> routes_;
  std::vector<std::map<NodeId, Seconds>> heard_;

 private:
  DiscoveryTracker::Hooks make_hooks() {
    DiscoveryTracker::Hooks h;
    h.has_route = [this](NodeId s, NodeId d) { return route_to(s, d) != nullptr; };
    h.send_request = [this](NodeId s, NodeId d, std::uint32_t) { send_rreq(s, d); };
    h.succeeded = [this](NodeId s, NodeId d) { flush(s, d); };
    h.failed = [this](NodeId s, NodeId d) {
      for (auto& p : buffer().take(s, d)) drop(p, DropReason::NoRoute);
    };
    return h;
  }

  RouteEntry* route_to(NodeId at, NodeId dest) {
    auto it = routes_[at].find(dest);
    if (it == routes_[at].end() || !it->second.usable(now())) return nullptr;
    return &it->second;
  }

  void hello_tick(NodeId i) {
    engine().schedule_in(params_.hello_interval, EventKind::HelloTick, [this, i] { hello_tick(i); });
    std::vector<NodeId> lost;
    for (const auto& [j, t] : heard_[i])
      if (now() - t > 2.0 * params_.hello_interval) lost.push_back(j);
    for (NodeId j : lost) {
      heard_[i].erase(j);
      rerr_on_break(i, j);
    }
    ++hellos_sent_;
    Packet p = make_control(PacketKind::Hello, i, kNoNode);
    p.payload = Hello{seq_[i]};
    link().broadcast(std::move(p), i, Priority::Control);
  }

  /// A neighbor is one hop away and its route carries the neighbor's own
  /// latest sequence number.
  void on_hello(NodeId at, NodeId from, std::uint32_t seq) {
    heard_[at][from] = now();
    auto [it, fresh] = routes_[at].try_emplace(from);
    RouteEntry& e = it->second;
    const bool changed = fresh || !e.usable(now()) || e.next_hop != from;
    e.next_hop = from;
    e.hops = 1;
    e.seqno = seq;
    e.valid = true;
    e.expires_at = std::max(e.expires_at, now() + params_.route_ttl);
    if (changed) on_route_installed(at, from);
  }

  void send_rreq(NodeId s, NodeId d) {
    ++seq_[s];
    const std::uint32_t id = ++rreq_id_[s];
    seen_[s].insert({s, id});
    auto it = routes_[s].find(d);
    const std::uint32_t dseq = it == routes_[s].end() ? 0 : it->second.seqno;
    Packet p = make_control(PacketKind::Rreq, s, d);
    p.payload = Rreq{s, seq_[s], id, d, dseq, 0};
    link().broadcast(p, s, Priority::Control);
  }

  void on_rreq(NodeId at, Packet pkt) {
    auto rq = std::any_cast<Rreq>(pkt.payload);
    if (!seen_[at].insert({rq.origin, rq.id}).second) {
      ++duplicate_rreqs_;
      return;
    }
    rq.hop_count++;
    const NodeId from = pkt.prev_hop;
    offer_route(at, rq.origin, from, rq.hop_count, rq.origin_seq);
    if (from != rq.origin) offer_route(at, from, from, 1, route_seq(at, from));
    if (at == rq.dest) {
      seq_[at] = std::max(seq_[at], rq.dest_seq) + 1;
      send_rrep(at, Rrep{rq.origin, at, seq_[at], 0});
      return;
    }
    if (const RouteEntry* r = route_to(at, rq.dest); r && rq.dest_seq > 0 && r->seqno >= rq.dest_seq) {
      ++intermediate_replies_;
      routes_[at][rq.dest].precursors.insert(from);
      send_rrep(at, Rrep{rq.origin, rq.dest, r->seqno, r->hops});
      return;
    }
    if (rq.hop_count >= params_.rreq_ttl) return;
    ++rreqs_relayed_;
    pkt.payload = rq;
    link().broadcast(pkt, at, Priority::Control);
  }

  std::uint32_t route_seq(NodeId at, NodeId dest) const {
    auto it = routes_[at].find(dest);
    return it == routes_[at].end() ? 0 : it->second.seqno;
  }

  /// Sends an RREP from `at` toward rp.origin along the reverse route.
  void send_rrep(NodeId at, Rrep rp) {
    RouteEntry* back = route_to(at, rp.origin);
    if (!back) return;
    if (auto* fwd = route_to(at, rp.dest)) fwd->precursors.insert(back->next_hop);
    Packet p = make_control(PacketKind::Rrep, at, rp.origin);
    p.payload = rp;
    link().unicast(std::move(p), at, back->next_hop, Priority::Control);
  }

  void on_rrep(NodeId at, Packet pkt) {
    auto rp = std::any_cast<Rrep>(pkt.payload);
    rp.hop_count++;
    offer_route(at, rp.dest, pkt.prev_hop, rp.hop_count, rp.dest_seq);
    if (at == rp.origin) {
      discovery_.resolve(at, rp.dest);
      return;
    }
    send_rrep(at, rp);
  }

  void on_rerr(NodeId at, NodeId from, const Rerr& err) {
    std::vector<std::pair<NodeId, std::uint32_t>> gone;
    for (const auto& [d, seq] : err.unreachable) {
      auto it = routes_[at].find(d);
      if (it != routes_[at].end() && it->second.valid && it->second.next_hop == from)
        gone.emplace_back(d, std::max(seq, it->second.seqno));
    }
    invalidate_and_notify(at, gone);
  }

  void invalidate_and_notify(NodeId node, const std::vector<std::pair<NodeId, std::uint32_t>>& gone) {
    std::map<NodeId, Rerr> per_precursor;
    for (const auto& [d, seq] : gone) {
      auto& e = routes_[node][d];
      e.valid = false;
      e.seqno = seq + 1;
      for (NodeId p : e.precursors)
        if (p != e.next_hop) per_precursor[p].unreachable.emplace_back(d, e.seqno);
      e.precursors.clear();
    }
    for (auto& [p, err] : per_precursor) {
      ++rerrs_sent_;
      Packet pkt = make_control(PacketKind::Rerr, node, p);
      pkt.payload = std::move(err);
      link().unicast(std::move(pkt), node, p, Priority::Control);
    }
  }

  void forward_data(NodeId i, Packet pkt) {
    if (pkt.dst == i) {
      deliver(pkt);
      return;
    }
    if (ttl_exceeded(pkt)) return;
    if (RouteEntry* r = route_to(i, pkt.dst)) {
      if (pkt.prev_hop != kNoNode && pkt.prev_hop != i) {
        r->precursors.insert(pkt.prev_hop);
        refresh(i, pkt.prev_hop);
      }
      refresh(i, pkt.dst);
      link().unicast(std::move(pkt), i, r->next_hop, Priority::Data);
      return;
    }
    if (i == pkt.src) {
      const NodeId d = pkt.dst;
      if (hold(i, std::move(pkt))) discovery_.begin(i, d);
      return;
    }
    // Tell the upstream hop so its source can rediscover.
    if (pkt.prev_hop != kNoNode && pkt.prev_hop != i) {
      ++rerrs_sent_;
      Packet e = make_control(PacketKind::Rerr, i, pkt.prev_hop);
      e.payload = Rerr{{{pkt.dst, route_seq(i, pkt.dst)}}};
      link().unicast(std::move(e), i, pkt.prev_hop, Priority::Control);
    }
    drop(pkt, DropReason::NoRoute);
  }

  void flush(NodeId node, NodeId dest) {
    if (!buffer().has(node, dest) || !route_to(node, dest)) return;
    for (auto& p : buffer().take(node, dest)) forward_data(node, std::move(p));
  }

  std::vector<std::uint32_t> seq_;
  std::vector<std::uint32_t> rreq_id_;
  std::vector<std::set<std::pair<NodeId, std::uint32_t>>> seen_;
  DiscoveryTracker discovery_;
  std::uint64_t rreqs_relayed_ = 0;
  std::uint64_t duplicate_rreqs_ = 0;
  std::uint64_t intermediate_replies_ = 0;
  std::uint64_t rerrs_sent_ = 0;
  std::uint64_t hellos_sent_ = 0;
};

/// AODV plus roaming ants that wander the HELLO neighbor graph, carrying hop
/// counts to recently seen nodes and installing routes in the shared table.
class AntAodv final : public Aodv {
 public:
  /// A route known at the node the ant just left: length, when it was last
  /// confirmed, that node's next hop on it and its sequence number.
  struct Reach {
    std::uint32_t hops = 0;
    Seconds learned_at = 0.0;
    NodeId via = kNoNode;
    std::uint32_t seqno = 0;
  };

  struct RoamingAnt {
    std::uint32_t id = 0;
    std::vector<std::pair<NodeId, Seconds>> history;  // most recent last, at most W entries
    std::map<NodeId, Reach> hops_from;                // relative to the ant's current node
    std::uint32_t last_seq = 0;                       // own sequence number of the node just left
  };

  AntAodv(ProtocolContext ctx, CommonRouting common, AodvParams aodv, AntAodvParams ants)
      : Aodv(std::move(ctx), common, aodv), ant_params_(ants) {
    ant_params_.validate();
    const auto n = static_cast<std::uint32_t>(node_count());
    if (!ant_params_.ant_count) ant_params_.ant_count = (n + 9) / 10;
    if (ant_params_.history_window == 0) ant_params_.history_window = n;
  }

  std::string_view name() const override { return "antaodv"; }
  const AntAodvParams& ant_params() const noexcept { return ant_params_; }

  void start() override {
    Aodv::start();
    const std::uint32_t k = *ant_params_.ant_count;
    if (k == 0) return;  // no extra randomness: identical to plain AODV
    rng_ = &stream("antaodv.ants");
    for (std::uint32_t a = 0; a < k; ++a) {
      const auto at = static_cast<NodeId>(rng_->below(node_count()));
      const Seconds phase = rng_->uniform(0.0, ant_params_.ant_interval);
      RoamingAnt ant;
      ant.id = a;
      ant.history.emplace_back(at, 0.0);
      engine().schedule_in(phase, EventKind::AntLaunch,
                           [this, at, ant = std::move(ant)]() mutable { ant_step(at, std::move(ant)); });
    }
  }

  void on_packet(NodeId at, Packet pkt) override {
    if (pkt.kind != PacketKind::RoamingAnt) {
      Aodv::on_packet(at, std::move(pkt));
      return;
    }
    auto ant = std::any_cast<RoamingAnt>(std::move(pkt.payload));
    ant_arrive(at, pkt.prev_hop, ant);
    dwell(at, std::move(ant));
  }

  void on_link_break(NodeId from, NodeId to, Packet pkt) override {
    if (pkt.kind != PacketKind::RoamingAnt) {
      Aodv::on_link_break(from, to, std::move(pkt));
      return;
    }
    heard_[from].erase(to);
    rerr_on_break(from, to);
    dwell(from, std::any_cast<RoamingAnt>(std::move(pkt.payload)));
  }

  /// Least recently visited neighbor (never visited first), ties uniform.
  static NodeId choose_next(const std::vector<NodeId>& nbrs, const RoamingAnt& ant, RngStream& rng) {
    if (nbrs.empty()) throw NoNeighbors();
    auto last_visit = [&](NodeId j) {
      double t = -1.0;
      for (const auto& [n, at] : ant.history)
        if (n == j) t = at;
      return t;
    };
    double best = 0.0;
    std::vector<NodeId> ties;
    for (NodeId j : nbrs) {
      const double t = last_visit(j);
      if (ties.empty() || t < best) {
        best = t;
        ties.assign(1, j);
      } else if (t == best) {
        ties.push_back(j);
      }
    }
    return ties.size() == 1 ? ties[0] : ties[rng.below(ties.size())];
  }

  /// Installs the routes the ant carries at `at`, reached over the link from
  /// `from`, then loads the ant with this node's own usable routes. Knowledge
  /// older than a route lifetime is forgotten, and a route is never pointed
  /// back at the node it would come through (split horizon).
  void ant_arrive(NodeId at, NodeId from, RoamingAnt& ant) {
    std::map<NodeId, Reach> offers;
    for (const auto& [v, r] : ant.hops_from) {
      if (r.via == at || r.hops + 1 > ant_params_.history_window) continue;
      if (r.learned_at + params_.route_ttl <= now()) continue;
      offers[v] = {r.hops + 1, r.learned_at, from, r.seqno};
    }
    // The link just crossed is proof enough, as with a HELLO.
    offers[from] = {1, now(), from, std::max(ant.last_seq, seq_for(at, from))};
    offers.erase(at);
    for (const auto& [v, r] : offers) {
      if (install_ant_route(at, v, from, r)) ++ant_routes_;
    }
    ant.hops_from.clear();
    for (const auto& [d, e] : routes_[at]) {
      if (d == at || !e.usable(now()) || e.hops > ant_params_.history_window) continue;
      ant.hops_from[d] = {e.hops, e.expires_at - params_.route_ttl, e.next_hop, e.seqno};
    }
    ant.last_seq = own_seq(at);
    ant.history.emplace_back(at, now());
    if (ant.history.size() > ant_params_.history_window)
      ant.history.erase(ant.history.begin());
  }

  std::uint64_t ant_moves() const noexcept { return ant_moves_; }
  std::uint64_t ant_routes() const noexcept { return ant_routes_; }

 private:
  /// Ant routes live one lifetime past the moment their knowledge was
  /// current. A broken entry only takes a route at least as fresh as the
  /// number it was invalidated with; otherwise an expired, longer or older
  /// entry gives way. The entry takes the sequence number of the route it
  /// copies, so it never vouches for more than the ant saw.
  bool install_ant_route(NodeId at, NodeId dest, NodeId via, Reach r) {
    const Seconds expiry = r.learned_at + params_.route_ttl;
    if (expiry <= now()) return false;
    auto [it, fresh] = routes_[at].try_emplace(dest);
    RouteEntry& e = it->second;
    bool take = fresh;
    if (!fresh && !e.valid) take = r.seqno >= e.seqno;
    if (!fresh && e.valid)
      take = !e.usable(now()) || r.hops < e.hops || (r.hops == e.hops && expiry > e.expires_at);
    if (!take) return false;
    e.next_hop = via;
    e.hops = r.hops;
    e.seqno = r.seqno;
    e.valid = true;
    e.expires_at = expiry;
    on_route_installed(at, dest);
    return true;
  }

  void dwell(NodeId at, RoamingAnt ant) {
    engine().schedule_in(ant_params_.ant_interval, EventKind::AntLaunch,
                         [this, at, ant = std::move(ant)]() mutable { ant_step(at, std::move(ant)); });
  }

  void ant_step(NodeId at, RoamingAnt ant) {
    const auto nbrs = hello_neighbors(at);
    if (nbrs.empty()) {
      dwell(at, std::move(ant));
      return;
    }
    const NodeId next = choose_next(nbrs, ant, *rng_);
    ++ant_moves_;
    Packet p = make_control(PacketKind::RoamingAnt, at, next);
    p.payload = std::move(ant);
    link().unicast(std::move(p), at, next, Priority::Control);
  }

  AntAodvParams ant_params_;
  RngStream* rng_ = nullptr;
  std::uint64_t ant_moves_ = 0;
  std::uint64_t ant_routes_ = 0;
};

}  // namespace antmesh
