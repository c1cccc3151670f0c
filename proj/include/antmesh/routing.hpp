#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"
#include "antmesh/metrics.hpp"
#include "antmesh/net.hpp"
#include "antmesh/packet.hpp"
#include "antmesh/random.hpp"

namespace antmesh {

using Weight = std::pair<NodeId, double>;
using Weights = std::vector<Weight>;

/// Draws j with probability w_j / sum(w). Entries with zero weight are never
/// returned. Throws AllZeroWeights if nothing is positive.
inline NodeId sample_weighted(std::span<const Weight> weights, RngStream& rng) {
  double total = 0.0;
  for (const auto& [id, w] : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw InvalidRange("sample_weighted: bad weight");
    total += w;
  }
  if (!(total > 0.0)) throw AllZeroWeights();
  const double u = rng.next_unit() * total;
  double acc = 0.0;
  NodeId last = kNoNode;
  for (const auto& [id, w] : weights) {
    if (w <= 0.0) continue;
    acc += w;
    last = id;
    if (u < acc) return id;
  }
  return last;  // u landed on the rounding slack above the final bucket
}

/// One destination row of a pheromone table: neighbor -> nonnegative mass,
/// kept sorted by neighbor id so iteration order is deterministic.
class PheromoneRow {
 public:
  double get(NodeId nbr) const {
    auto it = find(nbr);
    return it != entries_.end() && it->first == nbr ? it->second : 0.0;
  }

  bool contains(NodeId nbr) const {
    auto it = find(nbr);
    return it != entries_.end() && it->first == nbr;
  }

  void set(NodeId nbr, double value) {
    if (value < 0.0 || !std::isfinite(value)) throw InvalidRange("pheromone must be finite and >= 0");
    auto it = find(nbr);
    if (it != entries_.end() && it->first == nbr) {
      it->second = value;
    } else {
      entries_.insert(it, {nbr, value});
    }
  }

  void add(NodeId nbr, double delta) { set(nbr, get(nbr) + delta); }

  void erase(NodeId nbr) {
    auto it = find(nbr);
    if (it != entries_.end() && it->first == nbr) entries_.erase(it);
  }

  template <class Pred>
  void erase_if(Pred pred) {
    std::erase_if(entries_, [&](const Weight& w) { return pred(w.first, w.second); });
  }

  void scale(double f) {
    for (auto& e : entries_) e.second *= f;
  }

  double sum() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.second;
    return s;
  }

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const Weights& entries() const noexcept { return entries_; }
  Weights& entries() noexcept { return entries_; }

  /// Highest-valued neighbor, ties to the lowest id. kNoNode when empty.
  NodeId argmax() const {
    NodeId best = kNoNode;
    double best_v = -1.0;
    for (const auto& [id, v] : entries_) {
      if (v > best_v) {
        best = id;
        best_v = v;
      }
    }
    return best;
  }

 private:
  Weights::const_iterator find(NodeId nbr) const {
    return std::lower_bound(entries_.begin(), entries_.end(), nbr,
                            [](const Weight& w, NodeId id) { return w.first < id; });
  }
  Weights::iterator find(NodeId nbr) {
    return std::lower_bound(entries_.begin(), entries_.end(), nbr,
                            [](const Weight& w, NodeId id) { return w.first < id; });
  }

  Weights entries_;
};

/// Per-node pheromone matrix: rows by destination, columns by neighbor.
class PheromoneTable {
 public:
  PheromoneRow& row(NodeId dest) { return rows_[dest]; }

  const PheromoneRow* find(NodeId dest) const {
    auto it = rows_.find(dest);
    return it == rows_.end() ? nullptr : &it->second;
  }
  PheromoneRow* find(NodeId dest) {
    auto it = rows_.find(dest);
    return it == rows_.end() ? nullptr : &it->second;
  }

  bool has_positive(NodeId dest) const {
    const auto* r = find(dest);
    if (!r) return false;
    return std::any_of(r->entries().begin(), r->entries().end(),
                       [](const Weight& w) { return w.second > 0.0; });
  }

  void erase_row(NodeId dest) { rows_.erase(dest); }

  /// Removes the neighbor's column from every row; empty rows are dropped.
  void erase_neighbor(NodeId nbr) {
    for (auto it = rows_.begin(); it != rows_.end();) {
      it->second.erase(nbr);
      it = it->second.empty() ? rows_.erase(it) : std::next(it);
    }
  }

  std::map<NodeId, PheromoneRow>& rows() noexcept { return rows_; }
  const std::map<NodeId, PheromoneRow>& rows() const noexcept { return rows_; }

 private:
  std::map<NodeId, PheromoneRow> rows_;
};

/// Scales the row for `dest` to sum to 1. Throws EmptyRow if it sums to 0.
inline void normalize_row(PheromoneTable& table, NodeId dest) {
  auto* row = table.find(dest);
  const double s = row ? row->sum() : 0.0;
  if (!(s > 0.0)) throw EmptyRow();
  for (auto& e : row->entries()) e.second /= s;
}

enum class AntKind : std::uint8_t { Fant, Bant };

/// Memory carried by forward and backward ants.
struct AntState {
  AntKind kind = AntKind::Fant;
  NodeId source = kNoNode;
  NodeId destination = kNoNode;
  std::vector<NodeId> visited;    // visited[0] == source
  std::vector<Seconds> hop_times;  // arrival time at visited[k]
  std::uint32_t max_life = 0;
  std::vector<NodeId> forced_at;  // nodes where a forced revisit happened
  std::uint64_t id = 0;
  std::uint32_t cursor = 0;       // backward ants: index of the current node in `visited`

  std::uint32_t hops() const noexcept {
    return visited.empty() ? 0 : static_cast<std::uint32_t>(visited.size() - 1);
  }
  bool has_visited(NodeId n) const {
    return std::find(visited.begin(), visited.end(), n) != visited.end();
  }
  bool forced() const noexcept { return !forced_at.empty(); }

  void arrive(NodeId n, Seconds t) {
    visited.push_back(n);
    hop_times.push_back(t);
  }

  /// Records a forced revisit at n. Returns false when n already used its
  /// single allowance, in which case the ant must be killed.
  bool allow_forced_revisit(NodeId n) {
    if (std::find(forced_at.begin(), forced_at.end(), n) != forced_at.end()) return false;
    forced_at.push_back(n);
    return true;
  }
};

/// Chronological loop erasure of a visited list. When a node reappears, the
/// cycle since its previous occurrence is cut; the surviving occurrence keeps
/// the later timestamp. The result is a simple path with increasing times.
inline void loop_erase(std::vector<NodeId>& nodes, std::vector<Seconds>& times) {
  std::vector<NodeId> out_nodes;
  std::vector<Seconds> out_times;
  out_nodes.reserve(nodes.size());
  out_times.reserve(times.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    auto it = std::find(out_nodes.begin(), out_nodes.end(), nodes[k]);
    if (it != out_nodes.end()) {
      const auto keep = static_cast<std::size_t>(it - out_nodes.begin());
      out_nodes.resize(keep);
      out_times.resize(keep);
    }
    out_nodes.push_back(nodes[k]);
    out_times.push_back(k < times.size() ? times[k] : 0.0);
  }
  nodes = std::move(out_nodes);
  times = std::move(out_times);
}

/// Node-local view of the network handed to protocols: a node's current
/// neighbor set, its own link queues, and the radio. There is deliberately
/// no access to positions or to other nodes' state.
class LinkLayer {
 public:
  explicit LinkLayer(Network& net) : net_(net) {}

  std::size_t node_count() const noexcept { return net_.size(); }
  Seconds now() const noexcept { return net_.now(); }
  std::vector<NodeId> neighbors(NodeId i) const { return net_.neighbors(i); }
  bool is_neighbor(NodeId i, NodeId j) const { return i != j && net_.in_range(i, j); }
  std::uint64_t queue_bits(NodeId i, NodeId j) const { return net_.queue_bits(i, j); }
  Seconds transmission_time(std::uint32_t bits) const { return net_.transmission_time(bits); }
  const RadioParams& radio() const noexcept { return net_.radio(); }

  void unicast(Packet p, NodeId from, NodeId to, Priority pr) {
    net_.unicast(std::move(p), from, to, pr);
  }
  std::size_t broadcast(const Packet& p, NodeId from, Priority pr) {
    return net_.broadcast(p, from, pr);
  }
  std::uint64_t new_uid() noexcept { return net_.new_uid(); }

 private:
  Network& net_;
};

/// Everything a protocol instance may use.
struct ProtocolContext {
  Engine& engine;
  LinkLayer link;
  PacketLedger& ledger;
};

/// Source-side holding area for data packets awaiting a route. The cap is
/// per node across all destinations.
class SendBuffer {
 public:
  struct Held {
    Packet pkt;
    Seconds since;
  };

  SendBuffer(std::size_t nodes, std::size_t cap) : per_node_(nodes), cap_(cap) {}

  /// False when the node's buffer is full; the caller drops the packet.
  bool push(NodeId node, Packet pkt, Seconds now) {
    auto& slot = per_node_[node];
    if (slot.count >= cap_) return false;
    slot.by_dest[pkt.dst].push_back({std::move(pkt), now});
    ++slot.count;
    ++total_;
    return true;
  }

  bool has(NodeId node, NodeId dest) const {
    auto it = per_node_[node].by_dest.find(dest);
    return it != per_node_[node].by_dest.end() && !it->second.empty();
  }

  std::vector<Packet> take(NodeId node, NodeId dest) {
    std::vector<Packet> out;
    auto& slot = per_node_[node];
    auto it = slot.by_dest.find(dest);
    if (it == slot.by_dest.end()) return out;
    for (auto& h : it->second) out.push_back(std::move(h.pkt));
    slot.count -= it->second.size();
    total_ -= it->second.size();
    slot.by_dest.erase(it);
    return out;
  }

  /// Removes packets buffered at or before `cutoff`.
  std::vector<Packet> expire(NodeId node, Seconds cutoff) {
    std::vector<Packet> out;
    auto& slot = per_node_[node];
    for (auto it = slot.by_dest.begin(); it != slot.by_dest.end();) {
      auto& q = it->second;
      while (!q.empty() && q.front().since <= cutoff) {
        out.push_back(std::move(q.front().pkt));
        q.pop_front();
        --slot.count;
        --total_;
      }
      it = q.empty() ? slot.by_dest.erase(it) : std::next(it);
    }
    return out;
  }

  std::vector<NodeId> destinations(NodeId node) const {
    std::vector<NodeId> out;
    for (const auto& [d, q] : per_node_[node].by_dest)
      if (!q.empty()) out.push_back(d);
    return out;
  }

  std::size_t size() const noexcept { return total_; }
  std::size_t size(NodeId node) const { return per_node_[node].count; }

 private:
  struct Slot {
    std::map<NodeId, std::deque<Held>> by_dest;
    std::size_t count = 0;
  };
  std::vector<Slot> per_node_;
  std::size_t cap_;
  std::size_t total_ = 0;
};

/// Bookkeeping for on-demand route discovery from a source: one outstanding
/// request per (source, destination), a reply deadline, bounded retries.
class DiscoveryTracker {
 public:
  struct Hooks {
    std::function<bool(NodeId, NodeId)> has_route;
    std::function<void(NodeId, NodeId, std::uint32_t)> send_request;  // attempt, 0-based
    std::function<void(NodeId, NodeId)> succeeded;
    std::function<void(NodeId, NodeId)> failed;
  };

  DiscoveryTracker(Engine& engine, Seconds timeout, std::uint32_t retries, Hooks hooks)
      : engine_(engine), timeout_(timeout), retries_(retries), hooks_(std::move(hooks)) {}

  bool pending(NodeId s, NodeId d) const { return active_.count({s, d}) > 0; }

  /// Starts a discovery unless one is already outstanding.
  void begin(NodeId s, NodeId d) {
    if (pending(s, d)) return;
    active_[{s, d}] = 0;
    ++started_;
    attempt(s, d, 0);
  }

  /// Called by the protocol when a route to d appears at s.
  void resolve(NodeId s, NodeId d) {
    if (active_.erase({s, d}) > 0) hooks_.succeeded(s, d);
  }

  std::uint64_t started() const noexcept { return started_; }
  std::uint64_t requests_sent() const noexcept { return requests_; }

 private:
  void attempt(NodeId s, NodeId d, std::uint32_t k) {
    ++requests_;
    hooks_.send_request(s, d, k);
    engine_.schedule_in(timeout_, EventKind::Timer, [this, s, d, k] { deadline(s, d, k); });
  }

  void deadline(NodeId s, NodeId d, std::uint32_t k) {
    auto it = active_.find({s, d});
    if (it == active_.end() || it->second != k) return;
    if (hooks_.has_route(s, d)) {
      active_.erase(it);
      hooks_.succeeded(s, d);
      return;
    }
    if (k < retries_) {
      it->second = k + 1;
      attempt(s, d, k + 1);
      return;
    }
    active_.erase(it);
    hooks_.failed(s, d);
  }

  Engine& engine_;
  Seconds timeout_;
  std::uint32_t retries_;
  Hooks hooks_;
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> active_;
  std::uint64_t started_ = 0;
  std::uint64_t requests_ = 0;
};

/// Settings shared by every protocol.
struct CommonRouting {
  std::uint32_t control_bytes = 27;   // ants and routing packets
  std::size_t buffer_cap = 64;        // source send buffer, per node
  Seconds discovery_timeout = 1.0;    // wait for a reply before retrying
  std::uint32_t discovery_retries = 2;
  std::uint32_t data_ttl = 0;         // hop limit for data; 0 means 2 x node count
};

/// Behavioral contract implemented by every routing protocol.
///
/// Hooks act on one node's local state, the packet at hand and the
/// protocol's own random streams. Data packets handed over by
/// on_data_to_send are already recorded as sent in the ledger; the protocol
/// must eventually deliver or drop each one through deliver()/drop().
class RoutingProtocol : public LinkListener {
 public:
  RoutingProtocol(ProtocolContext ctx, CommonRouting common)
      : ctx_(std::move(ctx)), common_(common),
        buffer_(ctx_.link.node_count(), common.buffer_cap) {
    if (common_.data_ttl == 0)
      common_.data_ttl = static_cast<std::uint32_t>(2 * ctx_.link.node_count());
  }

  virtual std::string_view name() const = 0;
  virtual void start() {}
  virtual void on_data_to_send(NodeId src, Packet pkt) = 0;

  /// Data packets held by the protocol outside the network's link queues.
  virtual std::size_t held_data_packets() const { return buffer_.size(); }

  /// Number of destinations with a usable route at `node`.
  virtual std::size_t connectivity(NodeId node) const = 0;

  /// Destinations of the configured traffic sessions, known to every node
  /// (used by proactive protocols to pick ant destinations before any flow
  /// has been observed).
  void set_session_destinations(std::vector<NodeId> dests) {
    std::sort(dests.begin(), dests.end());
    dests.erase(std::unique(dests.begin(), dests.end()), dests.end());
    session_dests_ = std::move(dests);
  }

  const CommonRouting& common() const noexcept { return common_; }

 protected:
  Seconds now() const noexcept { return ctx_.engine.now(); }
  Engine& engine() noexcept { return ctx_.engine; }
  LinkLayer& link() noexcept { return ctx_.link; }
  const LinkLayer& link() const noexcept { return ctx_.link; }
  RngStream& stream(const std::string& name) { return ctx_.engine.stream(name); }
  SendBuffer& buffer() noexcept { return buffer_; }
  const SendBuffer& buffer() const noexcept { return buffer_; }
  std::size_t node_count() const noexcept { return ctx_.link.node_count(); }
  const std::vector<NodeId>& session_destinations() const noexcept { return session_dests_; }

  std::uint32_t control_bits() const noexcept { return common_.control_bytes * 8; }

  void deliver(const Packet& p) { ctx_.ledger.record_delivered(p.uid, now()); }
  void drop(const Packet& p, DropReason reason) { ctx_.ledger.record_dropped(p.uid, reason); }

  /// Buffers at the source, dropping on overflow. Returns true if buffered.
  bool hold(NodeId node, Packet p) {
    if (buffer_.push(node, p, now())) return true;
    drop(p, DropReason::BufferOverflow);
    return false;
  }

  /// Drops the packet if it has exhausted its hop budget.
  bool ttl_exceeded(const Packet& p) {
    if (p.hops < common_.data_ttl) return false;
    drop(p, DropReason::TtlExpired);
    return true;
  }

  Packet make_control(PacketKind kind, NodeId src, NodeId dst) {
    Packet p;
    p.kind = kind;
    p.src = src;
    p.dst = dst;
    p.size_bits = control_bits();
    p.created_at = now();
    p.uid = ctx_.link.new_uid();
    return p;
  }

 private:
  ProtocolContext ctx_;
  CommonRouting common_;
  SendBuffer buffer_;
  std::vector<NodeId> session_dests_;
};

}  // namespace antmesh
