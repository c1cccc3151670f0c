#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

TEST(Mobility, InitialPositionsInsideArea) {
  RngStream r(1, "mobility");
  MobilityParams p;
  p.pause = 7.0;
  auto states = init_positions(50, p, r);
  ASSERT_EQ(states.size(), 50u);
  for (const auto& s : states) {
    EXPECT_GE(s.pos.x, 0.0);
    EXPECT_LE(s.pos.x, 500.0);
    EXPECT_GE(s.pos.y, 0.0);
    EXPECT_LE(s.pos.y, 500.0);
    EXPECT_EQ(s.phase, MobilityPhase::Paused);
    EXPECT_EQ(s.pause_until, 7.0);
  }
  MobilityParams unit;
  unit.width = unit.height = 1.0;
  auto one = init_positions(1, unit, r);
  EXPECT_LE(one[0].pos.x, 1.0);
  EXPECT_LE(one[0].pos.y, 1.0);
}

TEST(Mobility, InitialPositionsUniformOverGrid) {
  RngStream r(5, "mobility");
  auto states = init_positions(10000, MobilityParams{}, r);
  std::vector<double> counts(100, 0.0);
  for (const auto& s : states) {
    const int cx = std::min(9, static_cast<int>(s.pos.x / 50.0));
    const int cy = std::min(9, static_cast<int>(s.pos.y / 50.0));
    counts[cy * 10 + cx] += 1.0;
  }
  EXPECT_GT(tb::chi_square_p(counts, std::vector<double>(100, 100.0)), 0.01);
}

TEST(Mobility, ArrivalTimeFromDistanceAndSpeed) {
  MobilityState s;
  s.pos = {0, 0};
  s.dest = {300, 400};
  s.speed = 5.0;
  s.phase = MobilityPhase::Moving;
  s.depart_time = 0.0;
  s.arrive_time = distance(s.pos, s.dest) / s.speed;
  EXPECT_DOUBLE_EQ(s.arrive_time, 100.0);
  EXPECT_EQ(position_at(s, 100.0), (Vec2{300, 400}));
  const Vec2 mid = position_at(s, 50.0);
  EXPECT_DOUBLE_EQ(mid.x, 150.0);
  EXPECT_DOUBLE_EQ(mid.y, 200.0);
  EXPECT_EQ(position_at(s, 0.0), (Vec2{0, 0}));
}

TEST(Mobility, InterpolatesAlongLeg) {
  MobilityState s;
  s.pos = {0, 0};
  s.dest = {100, 0};
  s.speed = 10.0;
  s.phase = MobilityPhase::Moving;
  s.depart_time = 2.0;
  s.arrive_time = 12.0;
  const Vec2 p = position_at(s, 6.0);
  EXPECT_DOUBLE_EQ(p.x, 40.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
}

TEST(Mobility, NextWaypointDrawsDestThenSpeed) {
  MobilityParams p;
  p.v_min = p.v_max = 7.0;
  RngStream a(11, "mobility"), b(11, "mobility");
  MobilityState s;
  s.pos = {10, 10};
  auto n = next_waypoint(s, p, a, 3.0);
  const double x = b.uniform(0, 500), y = b.uniform(0, 500);
  EXPECT_EQ(n.dest, (Vec2{x, y}));
  EXPECT_EQ(n.speed, 7.0);
  EXPECT_EQ(n.phase, MobilityPhase::Moving);
  EXPECT_DOUBLE_EQ(n.arrive_time, 3.0 + distance(n.pos, n.dest) / 7.0);
}

TEST(Mobility, RejectsBadParams) {
  MobilityParams p;
  p.v_min = 0.0;
  EXPECT_THROW(p.validate(), InvalidConfig);
  p.v_min = 5.0;
  p.v_max = 4.0;
  EXPECT_THROW(p.validate(), InvalidConfig);
}

TEST(Mobility, ZeroPauseDepartsOnArrivalAndStaysInArea) {
  Engine e(3);
  MobilityParams p;
  p.pause = 0.0;
  Mobility m(e, 20, p);
  int arrivals = 0;
  m.on_arrival([&](NodeId id) {
    ++arrivals;
    EXPECT_EQ(m.position(id), m.state(id).dest);
  });
  m.start();
  for (int k = 1; k <= 200; ++k) {
    e.run_until(k * 1.0);
    for (NodeId i = 0; i < 20; ++i) {
      const Vec2 q = m.position(i);
      ASSERT_GE(q.x, 0.0);
      ASSERT_LE(q.x, 500.0);
      ASSERT_GE(q.y, 0.0);
      ASSERT_LE(q.y, 500.0);
      ASSERT_EQ(m.state(i).phase, MobilityPhase::Moving);
    }
  }
  EXPECT_GT(arrivals, 20);
}

TEST(Mobility, InitialPauseHoldsNodes) {
  Engine e(3);
  MobilityParams p;
  p.pause = 50.0;
  Mobility m(e, 5, p);
  m.start();
  std::vector<Vec2> start;
  for (NodeId i = 0; i < 5; ++i) start.push_back(m.position(i));
  e.run_until(49.0);
  for (NodeId i = 0; i < 5; ++i) EXPECT_EQ(m.position(i), start[i]);
}

TEST(Mobility, StaticLayoutNeverMoves) {
  Engine e;
  Mobility m(e, tb::line(3));
  m.start();
  e.run_until(100.0);
  EXPECT_TRUE(m.is_static());
  EXPECT_EQ(m.position(2), (Vec2{400, 0}));
}

TEST(Mobility, TraceIsDeterministic) {
  auto trace = [] {
    Engine e(8);
    Mobility m(e, 5, MobilityParams{});
    std::ostringstream out;
    m.set_trace(&out);
    m.start();
    e.run_until(60.0);
    return out.str();
  };
  const auto a = trace();
  EXPECT_EQ(a, trace());
  EXPECT_EQ(a.rfind("t,node,x,y,speed,pause\n", 0), 0u);
}
