#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

TEST(Sampling, Singleton) {
  RngStream r(1, "s");
  const Weights w{{4, 1.0}};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_weighted(w, r), 4u);
}

TEST(Sampling, ThreeToOne) {
  RngStream r(2, "s");
  const Weights w{{0, 3.0}, {1, 1.0}};
  std::vector<double> counts(2, 0.0);
  for (int i = 0; i < 100000; ++i) counts[sample_weighted(w, r)] += 1.0;
  EXPECT_NEAR(counts[0] / 1e5, 0.75, 0.01);
  EXPECT_GT(tb::chi_square_p(counts, {75000.0, 25000.0}), 0.01);
}

TEST(Sampling, ZeroEntryNeverChosen) {
  RngStream r(3, "s");
  const Weights w{{0, 0.0}, {1, 2.0}, {2, 0.0}};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_weighted(w, r), 1u);
}

TEST(Sampling, AllZeroThrows) {
  RngStream r(1, "s");
  EXPECT_THROW(sample_weighted(Weights{{0, 0.0}, {1, 0.0}}, r), AllZeroWeights);
  EXPECT_THROW(sample_weighted(Weights{}, r), AllZeroWeights);
}

TEST(Pheromone, RowBasics) {
  PheromoneRow row;
  row.set(5, 1.0);
  row.set(2, 3.0);
  row.add(5, 0.5);
  EXPECT_EQ(row.entries().front().first, 2u);
  EXPECT_DOUBLE_EQ(row.get(5), 1.5);
  EXPECT_EQ(row.get(9), 0.0);
  EXPECT_EQ(row.argmax(), 2u);
  EXPECT_THROW(row.set(1, -0.1), InvalidRange);
  row.set(7, 3.0);
  EXPECT_EQ(row.argmax(), 2u);  // tie goes to the lower id
}

TEST(Pheromone, NormalizeRow) {
  PheromoneTable t;
  t.row(9).set(0, 2.0);
  t.row(9).set(1, 2.0);
  normalize_row(t, 9);
  EXPECT_EQ(t.row(9).get(0), 0.5);
  EXPECT_EQ(t.row(9).get(1), 0.5);

  t.row(8).set(0, 0.9);
  normalize_row(t, 8);
  EXPECT_EQ(t.row(8).get(0), 1.0);

  t.row(7).set(0, 1.0);
  t.row(7).set(1, 3.0);
  normalize_row(t, 7);
  EXPECT_DOUBLE_EQ(t.row(7).get(0), 0.25);
  EXPECT_DOUBLE_EQ(t.row(7).get(1), 0.75);
  EXPECT_EQ(t.row(7).argmax(), 1u);

  EXPECT_THROW(normalize_row(t, 3), EmptyRow);
  t.row(4).set(0, 0.0);
  EXPECT_THROW(normalize_row(t, 4), EmptyRow);
}

TEST(Pheromone, EraseNeighborDropsEmptyRows) {
  PheromoneTable t;
  t.row(3).set(1, 1.0);
  t.row(4).set(1, 1.0);
  t.row(4).set(2, 1.0);
  t.erase_neighbor(1);
  EXPECT_EQ(t.find(3), nullptr);
  ASSERT_NE(t.find(4), nullptr);
  EXPECT_EQ(t.find(4)->size(), 1u);
  EXPECT_TRUE(t.has_positive(4));
  EXPECT_FALSE(t.has_positive(3));
}

TEST(AntMemory, LoopErase) {
  std::vector<NodeId> nodes{0, 1, 2, 1, 3, 4, 3, 5};
  std::vector<Seconds> times{0, 1, 2, 3, 4, 5, 6, 7};
  loop_erase(nodes, times);
  EXPECT_EQ(nodes, (std::vector<NodeId>{0, 1, 3, 5}));
  EXPECT_EQ(times, (std::vector<Seconds>{0, 3, 6, 7}));

  std::vector<NodeId> simple{0, 1, 2};
  std::vector<Seconds> st{0, 1, 2};
  loop_erase(simple, st);
  EXPECT_EQ(simple, (std::vector<NodeId>{0, 1, 2}));

  std::vector<NodeId> back{0, 1, 0, 2};
  std::vector<Seconds> bt{0, 1, 2, 3};
  loop_erase(back, bt);
  EXPECT_EQ(back, (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(bt, (std::vector<Seconds>{2, 3}));
}

TEST(AntMemory, ForcedRevisitOncePerNode) {
  AntState a;
  a.arrive(0, 0.0);
  a.arrive(1, 0.1);
  EXPECT_EQ(a.hops(), 1u);
  EXPECT_TRUE(a.has_visited(1));
  EXPECT_FALSE(a.forced());
  EXPECT_TRUE(a.allow_forced_revisit(1));
  EXPECT_TRUE(a.forced());
  EXPECT_FALSE(a.allow_forced_revisit(1));
  EXPECT_TRUE(a.allow_forced_revisit(0));
}

TEST(SendBuffer, CapAndTake) {
  SendBuffer b(3, 2);
  Packet p;
  p.dst = 2;
  EXPECT_TRUE(b.push(0, p, 0.0));
  p.dst = 1;
  EXPECT_TRUE(b.push(0, p, 1.0));
  EXPECT_FALSE(b.push(0, p, 2.0));
  EXPECT_TRUE(b.push(1, p, 2.0));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.destinations(0), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(b.take(0, 2).size(), 1u);
  EXPECT_FALSE(b.has(0, 2));
  EXPECT_EQ(b.expire(0, 0.5).size(), 0u);
  EXPECT_EQ(b.expire(0, 1.0).size(), 1u);
  EXPECT_EQ(b.size(0), 0u);
  EXPECT_EQ(b.size(), 1u);
}

TEST(Discovery, RetriesThenFails) {
  Engine e;
  std::vector<std::pair<Seconds, std::uint32_t>> requests;
  int failed = 0, ok = 0;
  DiscoveryTracker t(e, 1.0, 2,
                     {[](NodeId, NodeId) { return false; },
                      [&](NodeId, NodeId, std::uint32_t k) { requests.emplace_back(e.now(), k); },
                      [&](NodeId, NodeId) { ++ok; }, [&](NodeId, NodeId) { ++failed; }});
  t.begin(0, 3);
  t.begin(0, 3);  // already pending
  e.run_until(10.0);
  ASSERT_EQ(requests.size(), 3u);
  EXPECT_EQ(requests[2], (std::pair<Seconds, std::uint32_t>{2.0, 2}));
  EXPECT_EQ(failed, 1);
  EXPECT_EQ(ok, 0);
  EXPECT_FALSE(t.pending(0, 3));
}

TEST(Discovery, ResolveStopsRetries) {
  Engine e;
  int sent = 0, ok = 0, failed = 0;
  DiscoveryTracker t(e, 1.0, 2,
                     {[](NodeId, NodeId) { return false; }, [&](NodeId, NodeId, std::uint32_t) { ++sent; },
                      [&](NodeId, NodeId) { ++ok; }, [&](NodeId, NodeId) { ++failed; }});
  t.begin(1, 2);
  e.schedule(0.5, EventKind::Timer, [&] { t.resolve(1, 2); });
  e.run_until(10.0);
  EXPECT_EQ(sent, 1);
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(failed, 0);
}
