#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "antmesh/errors.hpp"
#include "antmesh/random.hpp"

namespace antmesh {

using Seconds = double;
using EventId = std::uint64_t;

enum class EventKind : std::uint8_t {
  PacketArrival,
  Timer,
  WaypointArrival,
  TrafficTick,
  AntLaunch,
  HelloTick,
  EvaporationTick,
};

inline constexpr std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::PacketArrival: return "PacketArrival";
    case EventKind::Timer: return "Timer";
    case EventKind::WaypointArrival: return "WaypointArrival";
    case EventKind::TrafficTick: return "TrafficTick";
    case EventKind::AntLaunch: return "AntLaunch";
    case EventKind::HelloTick: return "HelloTick";
    case EventKind::EvaporationTick: return "EvaporationTick";
  }
  return "?";
}

/// Record of one processed event, as kept by the optional event log.
struct ProcessedEvent {
  Seconds time;
  std::uint64_t seq;
  EventKind kind;

  friend bool operator==(const ProcessedEvent&, const ProcessedEvent&) = default;
};

/// Single-threaded discrete-event core.
///
/// Events are totally ordered by (time, seq) where seq is the insertion
/// counter, so simultaneous events run in the order they were scheduled.
/// The clock never decreases. Every processed event is folded into a running
/// digest so that two runs can be compared without keeping the whole log.
class Engine {
 public:
  using Handler = std::function<void()>;

  explicit Engine(std::uint64_t master_seed = 1) : rng_(master_seed) {}

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Seconds now() const noexcept { return now_; }

  EventId schedule(Seconds time, EventKind kind, Handler fn) {
    if (time < now_) throw SchedulingInPast("event scheduled before current clock");
    const EventId id = next_seq_++;
    heap_.push_back(Entry{time, id, kind});
    handlers_.emplace(id, std::move(fn));
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    return id;
  }

  EventId schedule_in(Seconds delay, EventKind kind, Handler fn) {
    return schedule(now_ + delay, kind, std::move(fn));
  }

  /// Cancels a pending event. Cancelling an already-processed or unknown
  /// id is a no-op.
  void cancel(EventId id) { handlers_.erase(id); }

  /// Processes every event with time <= t_end, then sets the clock to t_end.
  Seconds run_until(Seconds t_end) {
    if (t_end < now_) throw SchedulingInPast("run_until target before current clock");
    while (!heap_.empty() && heap_.front().time <= t_end) {
      std::pop_heap(heap_.begin(), heap_.end(), Later{});
      const Entry e = heap_.back();
      heap_.pop_back();
      auto it = handlers_.find(e.seq);
      if (it == handlers_.end()) continue;
      Handler fn = std::move(it->second);
      handlers_.erase(it);
      assert(e.time >= now_);
      now_ = e.time;
      record(e);
      fn();
    }
    now_ = t_end;
    return now_;
  }

  std::size_t pending() const noexcept { return handlers_.size(); }
  std::uint64_t processed() const noexcept { return processed_; }

  /// Order-sensitive digest of every processed (time, seq, kind).
  std::uint64_t digest() const noexcept { return digest_; }

  void keep_log(bool on) { keep_log_ = on; }
  const std::vector<ProcessedEvent>& log() const noexcept { return log_; }

  RandomStreams& rng() noexcept { return rng_; }
  RngStream& stream(const std::string& name) { return rng_.stream(name); }

 private:
  struct Entry {
    Seconds time;
    std::uint64_t seq;
    EventKind kind;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  void record(const Entry& e) {
    ++processed_;
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof e.time);
    std::memcpy(&bits, &e.time, sizeof bits);
    for (std::uint64_t word : {bits, e.seq, static_cast<std::uint64_t>(e.kind)}) {
      digest_ ^= word;
      digest_ *= 0x100000001b3ULL;
      digest_ ^= digest_ >> 29;
    }
    if (keep_log_) log_.push_back({e.time, e.seq, e.kind});
  }

  Seconds now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
  std::vector<Entry> heap_;
  std::unordered_map<EventId, Handler> handlers_;
  bool keep_log_ = false;
  std::vector<ProcessedEvent> log_;
  RandomStreams rng_;
};

}  // namespace antmesh
