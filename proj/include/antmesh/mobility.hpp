#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <vector>

#include "antmesh/engine.hpp"
#include "antmesh/errors.hpp"
#include "antmesh/random.hpp"

namespace antmesh {

using NodeId = std::uint32_t;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

struct MobilityParams {
  double width = 500.0;
  double height = 500.0;
  double v_min = 1.0;
  double v_max = 20.0;
  Seconds pause = 0.0;

  void validate() const {
    if (!(width > 0.0 && height > 0.0)) throw InvalidConfig("mobility: area must be positive");
    if (!(v_min > 0.0)) throw InvalidConfig("mobility: v_min must be > 0");
    if (!(v_min <= v_max)) throw InvalidConfig("mobility: v_min must be <= v_max");
    if (!(pause >= 0.0)) throw InvalidConfig("mobility: pause must be >= 0");
  }
};

enum class MobilityPhase : std::uint8_t { Paused, Moving };

struct MobilityState {
  NodeId node = 0;
  Vec2 pos;            // position at depart_time (or the resting position)
  Vec2 dest;
  double speed = 0.0;  // m/s, only meaningful while Moving
  Seconds pause_until = 0.0;
  MobilityPhase phase = MobilityPhase::Paused;
  Seconds depart_time = 0.0;
  Seconds arrive_time = 0.0;
};

/// n nodes placed i.i.d. uniformly over the area, all paused for one pause
/// interval.
inline std::vector<MobilityState> init_positions(std::size_t n, const MobilityParams& params,
                                                 RngStream& rng) {
  if (n == 0) throw InvalidConfig("init_positions: need at least one node");
  std::vector<MobilityState> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = states[i];
    s.node = static_cast<NodeId>(i);
    s.pos.x = rng.uniform(0.0, params.width);
    s.pos.y = rng.uniform(0.0, params.height);
    s.dest = s.pos;
    s.phase = MobilityPhase::Paused;
    s.pause_until = params.pause;
  }
  return states;
}

/// Starts a new leg from the resting position: uniform destination over the
/// area and uniform speed in [v_min, v_max].
inline MobilityState next_waypoint(const MobilityState& s, const MobilityParams& params,
                                   RngStream& rng, Seconds now) {
  MobilityState out = s;
  out.dest.x = rng.uniform(0.0, params.width);
  out.dest.y = rng.uniform(0.0, params.height);
  out.speed = rng.uniform(params.v_min, params.v_max);
  out.phase = MobilityPhase::Moving;
  out.depart_time = now;
  out.arrive_time = now + distance(out.pos, out.dest) / out.speed;
  return out;
}

/// Linear interpolation along the current leg, clamped to its end points.
inline Vec2 position_at(const MobilityState& s, Seconds t) noexcept {
  if (s.phase == MobilityPhase::Paused) return s.pos;
  const Seconds span = s.arrive_time - s.depart_time;
  if (span <= 0.0 || t >= s.arrive_time) return s.dest;
  if (t <= s.depart_time) return s.pos;
  const double f = (t - s.depart_time) / span;
  return {s.pos.x + (s.dest.x - s.pos.x) * f, s.pos.y + (s.dest.y - s.pos.y) * f};
}

/// Drives the random waypoint model for every node inside an Engine, or
/// holds nodes at fixed positions when built from an explicit placement.
class Mobility {
 public:
  Mobility(Engine& engine, std::size_t n, const MobilityParams& params)
      : engine_(engine), params_(params), rng_(&engine.stream("mobility")) {
    params_.validate();
    states_ = init_positions(n, params_, *rng_);
  }

  Mobility(Engine& engine, std::vector<Vec2> fixed) : engine_(engine), fixed_(true) {
    if (fixed.empty()) throw InvalidConfig("static placement needs at least one node");
    states_.resize(fixed.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      states_[i].node = static_cast<NodeId>(i);
      states_[i].pos = states_[i].dest = fixed[i];
    }
  }

  /// Schedules the first departure of every node. No-op for static layouts.
  void start() {
    if (fixed_) return;
    for (auto& s : states_) {
      write_trace(s.node, s.pos, 0.0, params_.pause);
      const NodeId id = s.node;
      engine_.schedule(s.pause_until, EventKind::Timer, [this, id] { depart(id); });
    }
  }

  std::size_t size() const noexcept { return states_.size(); }
  bool is_static() const noexcept { return fixed_; }
  const MobilityParams& params() const noexcept { return params_; }
  const MobilityState& state(NodeId i) const { return states_.at(i); }

  Vec2 position(NodeId i) const { return position_at(states_[i], engine_.now()); }
  Vec2 position(NodeId i, Seconds t) const { return position_at(states_[i], t); }

  /// CSV waypoint trace: `t,node,x,y,speed,pause`.
  void set_trace(std::ostream* out) {
    trace_ = out;
    if (trace_) *trace_ << "t,node,x,y,speed,pause\n";
  }

  /// Called after each waypoint arrival (for tests and probes).
  void on_arrival(std::function<void(NodeId)> fn) { arrival_hook_ = std::move(fn); }

 private:
  void depart(NodeId id) {
    auto& s = states_[id];
    s = next_waypoint(s, params_, *rng_, engine_.now());
    write_trace(id, s.pos, s.speed, 0.0);
    engine_.schedule(s.arrive_time, EventKind::WaypointArrival, [this, id] { arrive(id); });
  }

  void arrive(NodeId id) {
    auto& s = states_[id];
    s.pos = s.dest;
    s.phase = MobilityPhase::Paused;
    s.pause_until = engine_.now() + params_.pause;
    write_trace(id, s.pos, 0.0, params_.pause);
    if (arrival_hook_) arrival_hook_(id);
    if (params_.pause == 0.0) {
      depart(id);
    } else {
      engine_.schedule(s.pause_until, EventKind::Timer, [this, id] { depart(id); });
    }
  }

  void write_trace(NodeId id, Vec2 p, double speed, Seconds pause) {
    if (!trace_) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.9g,%u,%.9g,%.9g,%.9g,%.9g\n", engine_.now(), id, p.x, p.y,
                  speed, pause);
    *trace_ << buf;
  }

  Engine& engine_;
  MobilityParams params_;
  RngStream* rng_ = nullptr;
  bool fixed_ = false;
  std::vector<MobilityState> states_;
  std::ostream* trace_ = nullptr;
  std::function<void(NodeId)> arrival_hook_;
};

}  // namespace antmesh
