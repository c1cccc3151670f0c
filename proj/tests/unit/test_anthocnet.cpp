#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

namespace {

double weight_of(const Weights& w, NodeId id) {
  for (const auto& [j, v] : w)
    if (j == id) return v;
  return -1.0;
}

void expect_rel(double got, double want) { EXPECT_LE(std::abs(got - want), 1e-12 * std::abs(want)) << got; }

}  // namespace

TEST(AntHocNetMath, PathQuality) {
  expect_rel(anthocnet::pheromone_from_quality({1, 0.01}, 0.01), 100.0);
  EXPECT_EQ(anthocnet::pheromone_from_quality({3, 0.2}, 0.005),
            anthocnet::pheromone_from_quality({3, 0.2}, 0.005));
  EXPECT_GT(anthocnet::pheromone_from_quality({2, 0.01}, 0.01),
            anthocnet::pheromone_from_quality({3, 0.01}, 0.01));
  EXPECT_THROW(anthocnet::pheromone_from_quality({0, 0.01}, 0.01), InvalidRange);
  EXPECT_THROW(anthocnet::pheromone_from_quality({1, 0.0}, 0.01), InvalidRange);
}

TEST(AntHocNetMath, DataDistribution) {
  PheromoneRow row;
  row.set(0, 2.0);
  row.set(1, 1.0);
  auto p = anthocnet::data_distribution(row, 2.0);
  expect_rel(weight_of(p, 0), 4.0 / 5.0);
  expect_rel(weight_of(p, 1), 1.0 / 5.0);

  p = anthocnet::data_distribution(row, 20.0);
  const double big = 1048576.0;  // 2^20
  expect_rel(weight_of(p, 0), big / (big + 1.0));
  expect_rel(weight_of(p, 1), 1.0 / (big + 1.0));
  EXPECT_GT(weight_of(p, 0), 0.999999);

  PheromoneRow flat;
  for (NodeId j = 0; j < 4; ++j) flat.set(j, 3.7);
  for (double beta : {1.0, 2.0, 20.0})
    for (const auto& [j, w] : anthocnet::data_distribution(flat, beta)) EXPECT_EQ(w, 0.25);

  PheromoneRow huge;
  huge.set(0, 1e200);
  huge.set(1, 5e199);
  p = anthocnet::data_distribution(huge, 20.0);
  expect_rel(weight_of(p, 0), big / (big + 1.0));

  PheromoneRow empty;
  empty.set(0, 0.0);
  EXPECT_TRUE(anthocnet::data_distribution(empty, 2.0).empty());
}

TEST(AntHocNetMath, DataSamplingFrequencies) {
  PheromoneRow row;
  row.set(0, 2.0);
  row.set(1, 1.0);
  const auto p = anthocnet::data_distribution(row, 2.0);
  RngStream r(6, "data");
  std::vector<double> counts(2, 0.0);
  for (int i = 0; i < 100000; ++i) counts[sample_weighted(p, r)] += 1.0;
  EXPECT_NEAR(counts[0] / 1e5, 0.8, 0.01);
  EXPECT_GT(tb::chi_square_p(counts, {80000.0, 20000.0}), 0.01);
}

// Sampling ants stay quiet for the whole run.
static AntHocNetParams reactive_only() {
  AntHocNetParams p;
  p.sample_interval = 1e6;
  return p;
}

TEST(AntHocNet, LineSetupReturnsOneBant) {
  tb::Bench b(tb::line(5));
  AntHocNet p(b.ctx(), CommonRouting{}, reactive_only(), 1000);
  b.attach(p);
  b.send_at(p, 0.1, 0, 4);
  b.engine.run_until(0.5);
  EXPECT_EQ(p.setups_started(), 1u);
  EXPECT_EQ(p.bants_completed(), 1u);
  EXPECT_EQ(b.ledger.delivered(), 1u);
  for (NodeId n = 0; n < 4; ++n) {
    ASSERT_NE(p.table(n).find(4), nullptr) << n;
    EXPECT_GT(p.table(n).find(4)->get(n + 1), 0.0);
  }
}

TEST(AntHocNet, DiamondDiscardsDuplicateCopies) {
  tb::Bench b(tb::diamond());
  AntHocNet p(b.ctx(), CommonRouting{}, reactive_only(), 1000);
  b.attach(p);
  b.send_at(p, 0.1, 0, 3);
  b.engine.run_until(0.5);
  // The destination accepts the first copy only; the source hears both
  // relays' rebroadcasts and drops them too.
  EXPECT_EQ(p.duplicate_fants(), 3u);
  EXPECT_EQ(p.bants_completed(), 1u);
  EXPECT_EQ(p.table(0).find(3)->size(), 1u);
}

TEST(AntHocNet, SamplingAntsFindSecondPath) {
  tb::Bench b(tb::diamond());
  AntHocNetParams params;
  params.explore_prob = 0.3;
  AntHocNet p(b.ctx(), CommonRouting{}, params, 1000);
  b.attach(p);
  for (int k = 0; k < 120; ++k) b.send_at(p, 0.1 + 0.25 * k, 0, 3);
  b.engine.run_until(32.0);
  const auto* row = p.table(0).find(3);
  ASSERT_NE(row, nullptr);
  EXPECT_GT(row->get(1), 0.0);
  EXPECT_GT(row->get(2), 0.0);
  EXPECT_EQ(b.ledger.delivered(), 120u);
}

TEST(AntHocNet, NoExplorationStaysOnPheromone) {
  tb::Bench b(tb::diamond());
  AntHocNetParams params;
  params.explore_prob = 0.0;
  AntHocNet p(b.ctx(), CommonRouting{}, params, 1000);
  b.attach(p);
  for (int k = 0; k < 40; ++k) b.send_at(p, 0.1 + 0.25 * k, 0, 3);
  b.engine.run_until(12.0);
  EXPECT_GT(p.proactive_hops(), 0u);
  EXPECT_EQ(p.unguided_hops(), 0u);
  EXPECT_EQ(p.table(0).find(3)->size(), 1u);
}

TEST(AntHocNet, PartitionTimesOut) {
  tb::Bench b({{0, 0}, {200, 0}, {900, 0}});
  CommonRouting common;
  AntHocNet p(b.ctx(), common, AntHocNetParams{}, 1000);
  b.attach(p);
  for (int k = 0; k < 3; ++k) b.send_at(p, 0.1 + 0.1 * k, 0, 2);
  b.engine.run_until(10.0);
  EXPECT_EQ(p.discovery_failures(), 1u);
  EXPECT_EQ(b.ledger.summary().dropped(DropReason::NoRoute), 3u);
}
