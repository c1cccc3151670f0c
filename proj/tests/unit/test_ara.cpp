#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

namespace {

Packet trail_packet(tb::Bench& b, NodeId src, NodeId dst, std::vector<NodeId> path) {
  Packet p = b.data(src, dst);
  p.hops = static_cast<std::uint32_t>(path.size() - 1);
  p.prev_hop = path.size() > 1 ? path[path.size() - 2] : src;
  p.payload = Ara::DataTrail{std::move(path), false};
  return p;
}

}  // namespace

TEST(AraMath, Increment) {
  EXPECT_EQ(ara::bant_increment(1, 1.0), 1.0);
  EXPECT_EQ(ara::bant_increment(4, 1.0), 0.25);
  EXPECT_EQ(ara::bant_increment(2, 1.0) / ara::bant_increment(4, 1.0), 2.0);
  EXPECT_THROW(ara::bant_increment(0, 1.0), InvalidRange);
}

TEST(AraMath, Evaporation) {
  PheromoneTable t;
  t.row(5).set(1, 1.0);
  t.row(5).set(2, 1.05e-6);
  t.row(6).set(1, 1e-7);
  ara::evaporate(t, 0.0, 0.9);
  EXPECT_EQ(t.row(5).get(1), 1.0);
  ASSERT_NE(t.find(6), nullptr);
  ara::evaporate(t, 1.0, 0.9);
  EXPECT_NEAR(t.find(5)->get(1), 0.9, 1e-15);
  EXPECT_FALSE(t.find(5)->contains(2));  // 0.945e-6 is under the floor
  EXPECT_EQ(t.find(6), nullptr);
  ara::evaporate(t, 2.5, 0.9);
  EXPECT_NEAR(t.find(5)->get(1), 0.9 * std::pow(0.9, 2.5), 1e-15);
  EXPECT_THROW(ara::evaporate(t, -1.0, 0.9), InvalidRange);
}

TEST(Ara, DiamondFloodInstallsBothPaths) {
  tb::Bench b(tb::diamond());
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  p.discover(0, 3);
  b.engine.run_until(0.5);
  EXPECT_EQ(p.bants_returned(), 2u);
  const auto* row = p.table(0).find(3);
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row->get(1), 0.5);  // 2-hop paths: 1/h at the source
  EXPECT_EQ(row->get(2), 0.5);
  // The destination learns the way back.
  EXPECT_EQ(p.table(3).find(0)->get(1), 0.5);
  EXPECT_EQ(p.table(1).find(3)->get(3), 1.0);
}

TEST(Ara, ShorterPathGetsMorePheromone) {
  // 0-1-3 (two hops) and 0-2-4-3 (three hops); 2 and 4 are out of 1's range.
  tb::Bench b({{0, 0}, {250, 120}, {200, -200}, {500, 60}, {420, -220}});
  ASSERT_FALSE(b.net.in_range(0, 3));
  ASSERT_TRUE(b.net.in_range(1, 3));
  ASSERT_FALSE(b.net.in_range(2, 3));
  ASSERT_TRUE(b.net.in_range(4, 3));
  ASSERT_FALSE(b.net.in_range(1, 2));
  ASSERT_FALSE(b.net.in_range(1, 4));
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  p.discover(0, 3);
  b.engine.run_until(0.5);
  const auto* row = p.table(0).find(3);
  ASSERT_NE(row, nullptr);
  EXPECT_DOUBLE_EQ(row->get(1), 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(row->get(2), 1.0 / 3.0);
}

TEST(Ara, TtlCutsFlood) {
  tb::Bench b(tb::line(5));
  AraParams params;
  params.max_hops = 2;
  Ara p(b.ctx(), CommonRouting{}, params);
  b.attach(p);
  b.send_at(p, 0.1, 0, 3);
  b.engine.run_until(10.0);
  EXPECT_EQ(p.bants_returned(), 0u);
  EXPECT_EQ(b.ledger.summary().dropped(DropReason::NoRoute), 1u);
}

TEST(Ara, ForwardModeOnFreshNetworkMatchesFlood) {
  auto run = [](AraMode mode) {
    tb::Bench b(tb::diamond());
    AraParams params;
    params.mode = mode;
    Ara p(b.ctx(), CommonRouting{}, params);
    b.attach(p);
    p.discover(0, 3);
    b.engine.run_until(0.5);
    EXPECT_EQ(p.fant_unicasts(), 0u);
    std::vector<Weights> rows;
    for (NodeId n = 0; n < 4; ++n)
      for (const auto& [d, row] : p.table(n).rows()) rows.push_back(row.entries());
    return rows;
  };
  EXPECT_EQ(run(AraMode::Flood), run(AraMode::Forward));
}

TEST(Ara, ForwardModeUnicastsWhenPheromoneExists) {
  tb::Bench b(tb::line(4));
  AraParams params;
  params.mode = AraMode::Forward;
  Ara p(b.ctx(), CommonRouting{}, params);
  b.attach(p);
  p.table(0).row(3).set(1, 1.0);
  p.table(1).row(3).set(2, 1.0);
  p.table(2).row(3).set(3, 1.0);
  p.discover(0, 3);
  b.engine.run_until(0.5);
  EXPECT_EQ(p.fant_unicasts(), 3u);
  EXPECT_EQ(p.fant_broadcasts(), 0u);
  EXPECT_EQ(p.bants_returned(), 1u);
}

TEST(Ara, DataReinforcesAndDelivers) {
  tb::Bench b(tb::line(4));
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  for (int k = 0; k < 20; ++k) b.send_at(p, 0.1 + 0.05 * k, 0, 3);
  b.engine.run_until(2.0);
  EXPECT_EQ(b.ledger.delivered(), 20u);
  EXPECT_EQ(p.discoveries(), 1u);
  EXPECT_GT(p.table(0).find(3)->get(1), 10.0);
}

TEST(Ara, NoHelloPackets) {
  tb::Bench b(tb::line(5));
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  for (int k = 0; k < 50; ++k) b.send_at(p, 0.5 * k, 0, 4);
  b.engine.run_until(30.0);
  EXPECT_EQ(b.net.counters(PacketKind::Hello).originated, 0u);
  EXPECT_GT(b.net.counters(PacketKind::Fant).originated, 0u);
}

TEST(Ara, AlternatePathAfterBreak) {
  tb::Bench b(tb::diamond());
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  p.discover(0, 3);
  b.engine.run_until(0.5);
  ASSERT_EQ(p.discoveries(), 1u);
  // The MAC reports that 0->1 failed for a packet.
  p.on_link_break(0, 1, trail_packet(b, 0, 3, {0}));
  b.engine.run_until(1.0);
  EXPECT_EQ(b.ledger.delivered(), 1u);
  EXPECT_EQ(p.discoveries(), 1u);
  EXPECT_FALSE(p.table(0).find(3)->contains(1));
}

TEST(Ara, DeadEndBacktracksToSource) {
  tb::Bench b(tb::line(4));
  Ara p(b.ctx(), CommonRouting{}, AraParams{});
  b.attach(p);
  p.discover(0, 3);
  b.engine.run_until(0.5);
  ASSERT_EQ(p.bants_returned(), 1u);
  // Node 1 loses 1->2 while holding a packet that came from 0.
  p.on_link_break(1, 2, trail_packet(b, 0, 3, {0, 1}));
  b.engine.run_until(5.0);
  EXPECT_EQ(p.backtracks(), 1u);
  EXPECT_EQ(p.discoveries(), 2u);
  EXPECT_EQ(b.ledger.delivered(), 1u);
}
