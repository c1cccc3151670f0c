#include <gtest/gtest.h>

#include "bench.hpp"

using namespace antmesh;

TEST(Random, SameSeedAndNameGiveSameSequence) {
  RngStream a(42, "mobility"), b(42, "mobility");
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Random, StreamsAreIndependentByName) {
  RandomStreams s(7);
  auto& m = s.stream("mobility");
  const double first = RngStream(7, "mobility").next_unit();
  // Drawing from another stream must not perturb "mobility".
  for (int i = 0; i < 100; ++i) s.stream("traffic").next_u64();
  EXPECT_EQ(m.next_unit(), first);
  EXPECT_NE(RngStream(7, "a").next_u64(), RngStream(7, "b").next_u64());
  EXPECT_NE(RngStream(7, "a").next_u64(), RngStream(8, "a").next_u64());
}

TEST(Random, UniformDegenerateAndInvalid) {
  RngStream r(1, "x");
  EXPECT_EQ(r.uniform(5.0, 5.0), 5.0);
  EXPECT_THROW(r.uniform(2.0, 1.0), InvalidRange);
  EXPECT_THROW(r.below(0), InvalidRange);
}

TEST(Random, UniformMeanOverHundredThousandDraws) {
  RngStream r(42, "mobility");
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform(0.0, 1.0);
    ASSERT_GE(u, 0.0);
    ASSERT_LE(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 1e5, 0.5, 0.01);
  EXPECT_EQ(r.draws(), 100000u);
}

TEST(Random, BelowIsUniform) {
  RngStream r(3, "below");
  std::vector<double> counts(6, 0.0);
  for (int i = 0; i < 60000; ++i) counts[r.below(6)] += 1.0;
  EXPECT_GT(tb::chi_square_p(counts, std::vector<double>(6, 10000.0)), 0.01);
}

TEST(Engine, FiresAtScheduledTime) {
  Engine e;
  Seconds fired = -1;
  e.schedule(5.0, EventKind::Timer, [&] { fired = e.now(); });
  e.run_until(10.0);
  EXPECT_EQ(fired, 5.0);
  EXPECT_EQ(e.now(), 10.0);
}

TEST(Engine, RejectsPast) {
  Engine e;
  e.run_until(3.0);
  EXPECT_THROW(e.schedule(0.0, EventKind::Timer, [] {}), SchedulingInPast);
  EXPECT_THROW(e.run_until(1.0), SchedulingInPast);
}

TEST(Engine, TiesBreakByInsertionOrder) {
  Engine e;
  std::string order;
  e.schedule(3.0, EventKind::Timer, [&] { order += '3'; });
  e.schedule(2.0, EventKind::Timer, [&] { order += 'A'; });
  e.schedule(1.0, EventKind::Timer, [&] { order += '1'; });
  e.schedule(2.0, EventKind::Timer, [&] { order += 'B'; });
  e.run_until(5.0);
  EXPECT_EQ(order, "1AB3");
}

TEST(Engine, EmptyRunAdvancesClock) {
  Engine e;
  EXPECT_EQ(e.run_until(300.0), 300.0);
  EXPECT_EQ(e.processed(), 0u);
}

TEST(Engine, EventsBeyondHorizonStayPending) {
  Engine e;
  int n = 0;
  e.schedule(1.0, EventKind::Timer, [&] { ++n; });
  e.schedule(2.0, EventKind::Timer, [&] { ++n; });
  e.run_until(1.0);
  EXPECT_EQ(n, 1);
  EXPECT_EQ(e.pending(), 1u);
  e.run_until(2.0);
  EXPECT_EQ(n, 2);
}

TEST(Engine, CancelPreventsHandler) {
  Engine e;
  int n = 0;
  auto id = e.schedule(1.0, EventKind::Timer, [&] { ++n; });
  e.schedule(1.0, EventKind::Timer, [&] { ++n; });
  e.cancel(id);
  EXPECT_EQ(e.pending(), 1u);
  e.run_until(2.0);
  EXPECT_EQ(n, 1);
  EXPECT_EQ(e.processed(), 1u);
}

TEST(Engine, HandlersMayScheduleAtNow) {
  Engine e;
  std::vector<int> seen;
  e.schedule(1.0, EventKind::Timer, [&] {
    seen.push_back(1);
    e.schedule_in(0.0, EventKind::Timer, [&] { seen.push_back(2); });
  });
  e.schedule(1.0, EventKind::Timer, [&] { seen.push_back(3); });
  e.run_until(1.0);
  EXPECT_EQ(seen, (std::vector<int>{1, 3, 2}));
}

TEST(Engine, LogIsOrderedAndDigestReproducible) {
  auto build = [](Engine& e) {
    e.keep_log(true);
    auto& r = e.stream("t");
    for (int i = 0; i < 200; ++i) e.schedule(r.uniform(0.0, 10.0), EventKind::Timer, [] {});
    e.run_until(10.0);
  };
  Engine a(9), b(9), c(10);
  build(a);
  build(b);
  build(c);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.log(), b.log());
  EXPECT_NE(a.digest(), c.digest());
  for (std::size_t i = 1; i < a.log().size(); ++i) {
    const auto& p = a.log()[i - 1];
    const auto& q = a.log()[i];
    ASSERT_TRUE(p.time < q.time || (p.time == q.time && p.seq < q.seq));
  }
}
