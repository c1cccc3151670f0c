#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

namespace {

std::vector<Vec2> ring4() { return {{0, 0}, {250, 0}, {250, 250}, {0, 250}}; }

}  // namespace

TEST(Aodv, LineDiscoveryInstallsForwardRoute) {
  tb::Bench b(tb::line(5));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  EXPECT_EQ(p.connectivity(0), 0u);
  b.attach(p);
  b.send_at(p, 0.01, 0, 4);
  b.engine.run_until(0.5);
  EXPECT_EQ(b.ledger.delivered(), 1u);
  for (NodeId n = 0; n < 4; ++n) {
    const auto& e = p.routes(n).at(4);
    EXPECT_TRUE(e.usable(b.engine.now())) << n;
    EXPECT_EQ(e.next_hop, n + 1);
    EXPECT_EQ(e.hops, 4 - n);
  }
  EXPECT_EQ(p.routes(4).at(0).next_hop, 3u);
  EXPECT_GE(p.connectivity(0), 1u);
}

TEST(Aodv, EachNodeRelaysRreqOnce) {
  tb::Bench b(tb::line(5));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  p.discover(0, 4);
  b.engine.run_until(0.5);
  EXPECT_EQ(p.rreqs_sent(), 1u);
  EXPECT_EQ(p.rreqs_relayed(), 3u);
  EXPECT_EQ(p.duplicate_rreqs(), 3u);
  EXPECT_EQ(b.net.counters(PacketKind::Rreq).originated, 4u);
}

TEST(Aodv, FloodOnRandomGraphTransmitsAtMostOncePerNode) {
  Engine e(17);
  Mobility m(e, 50, MobilityParams{});
  Network net(e, m, RadioParams{});
  PacketLedger ledger;
  Aodv p(ProtocolContext{e, LinkLayer(net), ledger}, CommonRouting{}, AodvParams{});
  net.attach(&p);
  p.start();
  p.discover(0, 49);
  e.run_until(0.2);
  EXPECT_LE(net.counters(PacketKind::Rreq).originated, 50u);
  EXPECT_EQ(net.counters(PacketKind::Rreq).originated, 1 + p.rreqs_relayed());
}

TEST(Aodv, IntermediateNodeReplies) {
  tb::Bench b(tb::line(5));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  p.discover(0, 4);
  b.engine.run_until(0.5);
  ASSERT_EQ(p.intermediate_replies(), 0u);
  // The source forgets its route but keeps the sequence number.
  p.routes(0).at(4).valid = false;
  p.discover(0, 4);
  b.engine.run_until(1.0);
  EXPECT_EQ(p.intermediate_replies(), 1u);
  EXPECT_TRUE(p.routes(0).at(4).usable(b.engine.now()));
  EXPECT_EQ(p.routes(0).at(4).hops, 4u);
}

TEST(Aodv, RerrAggregatesDestinations) {
  tb::Bench b(tb::line(5));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  p.discover(0, 3);
  b.engine.run_until(0.3);
  p.discover(0, 4);
  b.engine.run_until(0.6);
  const auto before = p.rerrs_sent();
  p.rerr_on_break(1, 2);
  b.engine.run_until(0.7);
  // Node 1 tells node 0 once about both destinations; node 0 has no precursors.
  EXPECT_EQ(p.rerrs_sent() - before, 1u);
  EXPECT_FALSE(p.routes(0).at(3).valid);
  EXPECT_FALSE(p.routes(0).at(4).valid);
  EXPECT_TRUE(p.routes(0).at(1).valid);
}

TEST(Aodv, UnusedLinkBreakSendsNothing) {
  tb::Bench b(tb::line(5));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  b.engine.run_until(3.0);
  p.rerr_on_break(2, 3);
  b.engine.run_until(3.1);
  EXPECT_EQ(p.rerrs_sent(), 0u);
}

TEST(Aodv, MiddleBreakTriggersRediscovery) {
  tb::Bench b(tb::line(4));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  b.send_at(p, 0.01, 0, 3);
  b.engine.run_until(0.5);
  ASSERT_EQ(p.discoveries(), 1u);
  p.rerr_on_break(1, 2);
  b.send_at(p, 0.6, 0, 3);
  b.engine.run_until(1.5);
  EXPECT_EQ(p.discoveries(), 2u);
  EXPECT_EQ(b.ledger.delivered(), 2u);
}

TEST(Aodv, StaticNeighborsNeverExpire) {
  tb::Bench b(tb::line(2));
  Aodv p(b.ctx(), CommonRouting{}, AodvParams{});
  b.attach(p);
  for (int t = 3; t <= 100; ++t) {
    b.engine.run_until(t);
    ASSERT_EQ(p.hello_neighbors(0), (std::vector<NodeId>{1}));
    ASSERT_TRUE(p.routes(0).at(1).usable(b.engine.now()));
  }
  EXPECT_GE(p.hellos_sent(), 2u * 99u);
}

TEST(Aodv, NeighborLostAfterTwoMissedHellos) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30 && checked < 5; ++seed) {
    Engine e(seed);
    MobilityParams mp;
    mp.v_min = mp.v_max = 20.0;
    mp.width = mp.height = 600.0;
    Mobility m(e, 2, mp);
    Network net(e, m, RadioParams{});
    PacketLedger ledger;
    Aodv p(ProtocolContext{e, LinkLayer(net), ledger}, CommonRouting{}, AodvParams{});
    net.attach(&p);
    m.start();
    p.start();
    // Step finely until the pair separates after having been in range for a while.
    Seconds t = 0.0, in_since = -1.0, out_at = -1.0;
    while (t < 200.0 && out_at < 0.0) {
      t += 0.001;
      e.run_until(t);
      const bool in = net.in_range(0, 1);
      if (in && in_since < 0.0) in_since = t;
      if (!in) {
        if (in_since >= 0.0 && t - in_since > 3.0) out_at = t;
        in_since = -1.0;
      }
    }
    if (out_at < 0.0) continue;
    // Back in range within the window would confuse the check.
    bool stays_out = true;
    Seconds lost_at = -1.0;
    while (t < out_at + 2.5) {
      t += 0.001;
      e.run_until(t);
      stays_out = stays_out && !net.in_range(0, 1);
      if (lost_at < 0.0 && p.hello_neighbors(0).empty()) lost_at = t;
    }
    if (!stays_out) continue;
    ++checked;
    ASSERT_GE(lost_at, 0.0);
    EXPECT_GE(lost_at, out_at + 1.0 - 0.003) << seed;
    EXPECT_LE(lost_at, out_at + 2.0 + 0.003) << seed;
  }
  EXPECT_GE(checked, 1);
}

TEST(AntAodv, ZeroAntsMatchesAodvTrace) {
  auto trace = [](bool ants) {
    Engine e(5);
    Mobility m(e, 20, MobilityParams{});
    Network net(e, m, RadioParams{});
    PacketLedger ledger;
    ProtocolContext ctx{e, LinkLayer(net), ledger};
    std::unique_ptr<RoutingProtocol> p;
    if (ants) {
      AntAodvParams ap;
      ap.ant_count = 0;
      p = std::make_unique<AntAodv>(ctx, CommonRouting{}, AodvParams{}, ap);
    } else {
      p = std::make_unique<Aodv>(ctx, CommonRouting{}, AodvParams{});
    }
    std::ostringstream out;
    net.set_trace(&out);
    net.attach(p.get());
    m.start();
    p->start();
    for (int k = 0; k < 100; ++k) {
      e.schedule(1.0 + 0.25 * k, EventKind::TrafficTick, [&, k] {
        Packet d;
        d.kind = PacketKind::Data;
        d.src = static_cast<NodeId>(k % 5);
        d.dst = 19 - d.src;
        d.size_bits = 4096;
        d.created_at = e.now();
        d.uid = net.new_uid();
        ledger.record_sent(d.uid, d.created_at);
        p->on_data_to_send(d.src, d);
      });
    }
    e.run_until(40.0);
    return out.str();
  };
  const auto a = trace(false);
  EXPECT_GT(a.size(), 10000u);
  EXPECT_EQ(a, trace(true));
}

TEST(AntAodv, ChooseNextPrefersUnvisitedThenOldest) {
  RngStream r(1, "t");
  AntAodv::RoamingAnt ant;
  ant.history = {{1, 0.5}, {2, 0.2}, {3, 0.9}};
  EXPECT_EQ(AntAodv::choose_next({1, 2, 3, 4}, ant, r), 4u);
  EXPECT_EQ(AntAodv::choose_next({1, 2, 3}, ant, r), 2u);
  EXPECT_THROW(AntAodv::choose_next({}, ant, r), NoNeighbors);
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < 30000; ++i) counts[AntAodv::choose_next({5, 6, 7}, ant, r) - 5] += 1.0;
  EXPECT_GT(tb::chi_square_p(counts, std::vector<double>(3, 10000.0)), 0.01);
}

TEST(AntAodv, RingAntTeachesTwoHopRoutes) {
  tb::Bench b(ring4());
  ASSERT_FALSE(b.net.in_range(0, 2));
  AntAodvParams ap;
  ap.ant_count = 1;
  AntAodv p(b.ctx(), CommonRouting{}, AodvParams{}, ap);
  b.attach(p);
  b.engine.run_until(4.0);
  EXPECT_GT(p.ant_moves(), 10u);
  for (NodeId i = 0; i < 4; ++i) {
    for (NodeId j = 0; j < 4; ++j) {
      if (i == j) continue;
      auto it = p.routes(i).find(j);
      ASSERT_NE(it, p.routes(i).end()) << i << "->" << j;
      EXPECT_TRUE(it->second.usable(b.engine.now()));
      EXPECT_EQ(it->second.hops, (i + j) % 2 == 0 ? 2u : 1u) << i << "->" << j;
    }
    EXPECT_EQ(p.connectivity(i), 3u);
  }
  EXPECT_EQ(p.discoveries(), 0u);
}

TEST(AntAodv, ArrivalUpdatesHopMap) {
  tb::Bench b(tb::line(4));
  AntAodvParams ap;
  ap.ant_count = 0;
  ap.history_window = 3;
  AntAodv p(b.ctx(), CommonRouting{}, AodvParams{}, ap);
  b.engine.run_until(5.0);
  AntAodv::RoamingAnt ant;
  ant.hops_from = {{0, {2, 4.0}}, {3, {3, 4.5}}};
  p.ant_arrive(2, 1, ant);
  EXPECT_EQ(ant.hops_from.at(1).hops, 1u);
  EXPECT_EQ(ant.hops_from.at(1).learned_at, 5.0);
  EXPECT_EQ(ant.hops_from.at(1).via, 1u);
  EXPECT_EQ(ant.hops_from.at(0).hops, 3u);
  EXPECT_EQ(ant.hops_from.at(0).learned_at, 4.0);
  EXPECT_EQ(ant.hops_from.at(0).via, 1u);
  EXPECT_EQ(ant.hops_from.count(3), 0u);  // 4 hops exceeds the window
  EXPECT_EQ(p.routes(2).at(0).next_hop, 1u);
  EXPECT_EQ(p.routes(2).at(0).hops, 3u);
  EXPECT_EQ(p.routes(2).at(0).expires_at, 4.0 + AodvParams{}.route_ttl);
  EXPECT_EQ(p.ant_routes(), 2u);
  ASSERT_EQ(ant.history.size(), 1u);
  EXPECT_EQ(ant.history.back().first, 2u);
}

TEST(AntAodv, StaleKnowledgeIsForgotten) {
  tb::Bench b(tb::line(4));
  AntAodvParams ap;
  ap.ant_count = 0;
  AntAodv p(b.ctx(), CommonRouting{}, AodvParams{}, ap);
  b.engine.run_until(20.0);
  AntAodv::RoamingAnt ant;
  ant.hops_from = {{0, {1, 9.0}}, {3, {1, 15.0}}};
  p.ant_arrive(2, 1, ant);
  EXPECT_EQ(ant.hops_from.count(0), 0u);
  EXPECT_EQ(p.routes(2).count(0), 0u);
  ASSERT_EQ(ant.hops_from.count(3), 1u);
  EXPECT_EQ(p.routes(2).at(3).hops, 2u);
}

TEST(AntAodv, SplitHorizon) {
  tb::Bench b(tb::line(4));
  AntAodvParams ap;
  ap.ant_count = 0;
  AntAodv p(b.ctx(), CommonRouting{}, AodvParams{}, ap);
  b.engine.run_until(5.0);
  // Node 1 reaches 3 only through 2; an ant going from 1 to 2 must not
  // teach 2 to use 1 for it.
  AntAodv::RoamingAnt ant;
  ant.hops_from = {{3, {2, 5.0, 2}}, {0, {1, 5.0, 0}}};
  p.ant_arrive(2, 1, ant);
  EXPECT_EQ(p.routes(2).count(3), 0u);
  EXPECT_EQ(p.routes(2).at(0).next_hop, 1u);
  EXPECT_EQ(p.routes(2).at(0).hops, 2u);
}

TEST(AntAodv, OlderEqualRouteDoesNotReplace) {
  tb::Bench b(tb::line(4));
  AntAodvParams ap;
  ap.ant_count = 0;
  AntAodv p(b.ctx(), CommonRouting{}, AodvParams{}, ap);
  b.engine.run_until(10.0);
  auto& e = p.routes(1)[3];
  e.next_hop = 2;
  e.hops = 2;
  e.valid = true;
  e.expires_at = 19.0;  // confirmed at t = 9
  AntAodv::RoamingAnt ant;
  ant.hops_from = {{3, {1, 8.0}}};
  p.ant_arrive(1, 0, ant);
  EXPECT_EQ(p.routes(1).at(3).next_hop, 2u);
  ant.hops_from = {{3, {1, 9.5}}};
  p.ant_arrive(1, 0, ant);
  EXPECT_EQ(p.routes(1).at(3).next_hop, 0u);
  EXPECT_EQ(p.routes(1).at(3).expires_at, 19.5);
}
