#pragma once

#include <cstdio>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"
#include "antmesh/mobility.hpp"
#include "antmesh/packet.hpp"

namespace antmesh {

struct RadioParams {
  double range = 300.0;       // meters
  double bandwidth = 2.0e6;   // bits/s
  Seconds per_hop_latency = 1.0e-3;

  void validate() const {
    if (!(range > 0.0)) throw InvalidConfig("radio: range must be > 0");
    if (!(bandwidth > 0.0)) throw InvalidConfig("radio: bandwidth must be > 0");
    if (!(per_hop_latency >= 0.0)) throw InvalidConfig("radio: latency must be >= 0");
  }
};

/// Receiver side of the network: the active routing protocol.
class LinkListener {
 public:
  virtual ~LinkListener() = default;
  virtual void on_packet(NodeId at, Packet pkt) = 0;
  /// The packet could not be delivered because `to` was out of range at the
  /// delivery instant. Ownership of the packet returns to the sender.
  virtual void on_link_break(NodeId from, NodeId to, Packet pkt) = 0;
};

/// Per-kind link-level accounting. For every kind,
/// sent == delivered + dropped + queued + in_air at any instant.
struct LinkCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t queued = 0;
  std::uint64_t in_air = 0;
  std::uint64_t originated = 0;  // logical emissions; a broadcast counts once

  bool balanced() const noexcept { return sent == delivered + dropped + queued + in_air; }
};

/// Disk-radio network with an ideal MAC: every directed link is served by
/// its own FIFO transmitter at `bandwidth`, with a Control queue that is
/// always drained before the Data queue. The range check happens once, at
/// the delivery instant.
class Network {
 public:
  Network(Engine& engine, Mobility& mobility, RadioParams radio)
      : engine_(engine), mobility_(mobility), radio_(radio), n_(mobility.size()),
        links_(n_ * n_) {
    radio_.validate();
  }

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  void attach(LinkListener* listener) { listener_ = listener; }

  std::size_t size() const noexcept { return n_; }
  Seconds now() const noexcept { return engine_.now(); }
  Engine& engine() noexcept { return engine_; }
  const RadioParams& radio() const noexcept { return radio_; }
  Mobility& mobility() noexcept { return mobility_; }

  bool in_range(NodeId i, NodeId j) const {
    const Vec2 a = mobility_.position(i);
    const Vec2 b = mobility_.position(j);
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy <= radio_.range * radio_.range;
  }

  /// Every node within range of i at the current instant, ascending by id.
  std::vector<NodeId> neighbors(NodeId i) const {
    std::vector<NodeId> out;
    const Vec2 a = mobility_.position(i);
    const double r2 = radio_.range * radio_.range;
    for (NodeId j = 0; j < n_; ++j) {
      if (j == i) continue;
      const Vec2 b = mobility_.position(j);
      const double dx = a.x - b.x, dy = a.y - b.y;
      if (dx * dx + dy * dy <= r2) out.push_back(j);
    }
    return out;
  }

  Seconds transmission_time(std::uint32_t bits) const noexcept {
    return static_cast<double>(bits) / radio_.bandwidth;
  }

  std::uint64_t new_uid() noexcept { return next_uid_++; }

  void unicast(Packet p, NodeId from, NodeId to, Priority priority) {
    if (from >= n_ || to >= n_ || from == to) throw InvalidRange("unicast: bad endpoints");
    if (p.size_bits == 0) throw InvalidRange("unicast: zero-size packet");
    count(p.kind).originated++;
    enqueue(std::move(p), from, to, priority);
  }

  /// One copy to each current neighbor. Returns the neighbor count.
  std::size_t broadcast(const Packet& p, NodeId from, Priority priority) {
    if (p.size_bits == 0) throw InvalidRange("broadcast: zero-size packet");
    count(p.kind).originated++;
    const auto nbrs = neighbors(from);
    for (NodeId j : nbrs) enqueue(p, from, j, priority);
    return nbrs.size();
  }

  /// Bits waiting on the Data queue of link (i, j), including a Data packet
  /// currently being transmitted.
  std::uint64_t queue_bits(NodeId i, NodeId j) const {
    const auto& q = links_[i * n_ + j];
    return q ? q->data_bits : 0;
  }

  const LinkCounters& counters(PacketKind k) const {
    return counters_[static_cast<std::size_t>(k)];
  }

  /// Data packets physically held by the network (queued or propagating).
  std::uint64_t data_in_system() const {
    const auto& c = counters(PacketKind::Data);
    return c.queued + c.in_air;
  }

  /// CSV packet trace: `t,event,uid,kind,from,to,size_bits`.
  void set_trace(std::ostream* out) {
    trace_ = out;
    if (trace_) *trace_ << "t,event,uid,kind,from,to,size_bits\n";
  }

 private:
  struct LinkQueue {
    std::deque<Packet> control;
    std::deque<Packet> data;
    std::optional<Packet> in_service;
    std::uint64_t data_bits = 0;
  };

  LinkCounters& count(PacketKind k) { return counters_[static_cast<std::size_t>(k)]; }

  void enqueue(Packet p, NodeId from, NodeId to, Priority priority) {
    if (p.prev_hop != from) p.upstream = p.prev_hop;
    p.prev_hop = from;
    p.next_hop = to;
    auto& slot = links_[from * n_ + to];
    if (!slot) slot = std::make_unique<LinkQueue>();
    auto& c = count(p.kind);
    c.sent++;
    c.queued++;
    trace("send", p, from, to);
    if (priority == Priority::Control) {
      slot->control.push_back(std::move(p));
    } else {
      slot->data_bits += p.size_bits;
      slot->data.push_back(std::move(p));
    }
    if (!slot->in_service) start_next(*slot, from, to);
  }

  void start_next(LinkQueue& q, NodeId from, NodeId to) {
    bool from_data = false;
    if (!q.control.empty()) {
      q.in_service = std::move(q.control.front());
      q.control.pop_front();
    } else if (!q.data.empty()) {
      q.in_service = std::move(q.data.front());
      q.data.pop_front();
      from_data = true;
    } else {
      return;
    }
    const Seconds done = engine_.now() + transmission_time(q.in_service->size_bits);
    engine_.schedule(done, EventKind::Timer,
                     [this, from, to, from_data] { finish_transmission(from, to, from_data); });
  }

  void finish_transmission(NodeId from, NodeId to, bool from_data) {
    auto& q = *links_[from * n_ + to];
    Packet p = std::move(*q.in_service);
    q.in_service.reset();
    if (from_data) q.data_bits -= p.size_bits;
    auto& c = count(p.kind);
    c.queued--;
    c.in_air++;
    engine_.schedule(engine_.now() + radio_.per_hop_latency, EventKind::PacketArrival,
                     [this, from, to, pkt = std::move(p)]() mutable {
                       deliver(std::move(pkt), from, to);
                     });
    start_next(q, from, to);
  }

  void deliver(Packet p, NodeId from, NodeId to) {
    auto& c = count(p.kind);
    c.in_air--;
    if (!in_range(from, to)) {
      c.dropped++;
      trace("drop", p, from, to);
      if (listener_) listener_->on_link_break(from, to, std::move(p));
      return;
    }
    c.delivered++;
    p.hops++;
    trace("recv", p, from, to);
    if (listener_) listener_->on_packet(to, std::move(p));
  }

  void trace(const char* event, const Packet& p, NodeId from, NodeId to) {
    if (!trace_) return;
    char buf[192];
    std::snprintf(buf, sizeof buf, "%.12g,%s,%llu,%.*s,%u,%u,%u\n", engine_.now(), event,
                  static_cast<unsigned long long>(p.uid),
                  static_cast<int>(to_string(p.kind).size()), to_string(p.kind).data(), from, to,
                  p.size_bits);
    *trace_ << buf;
  }

  Engine& engine_;
  Mobility& mobility_;
  RadioParams radio_;
  std::size_t n_;
  std::vector<std::unique_ptr<LinkQueue>> links_;
  std::array<LinkCounters, kPacketKinds> counters_{};
  LinkListener* listener_ = nullptr;
  std::uint64_t next_uid_ = 1;
  std::ostream* trace_ = nullptr;
};

}  // namespace antmesh
