#include <gtest/gtest.h>

#include <set>

#include "r3l/core.hpp"
#include "r3l/envs.hpp"

using namespace r3l;

namespace {

EpisodeLog log_of(const std::vector<double>& levels) {
  EpisodeLog log;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    Transition t;
    t.state = {{0.0, 0.0}, ResourceVector{levels[i]}};
    t.next_state = {{0.0, 0.0}, ResourceVector{levels[i + 1]}};
    log.push(t, 0.0, 1.0);
  }
  return log;
}

}  // namespace

TEST(ResourceOf, ProjectsTheResourceSlots) {
  EXPECT_EQ(resource_of(R3LState{{-0.5, 0.0}, {12.0}}), (ResourceVector{12.0}));
  EXPECT_EQ(resource_of(R3LState{{0.0}, {0.0}}), (ResourceVector{0.0}));
  EXPECT_EQ(resource_of(R3LState{{1, 2}, {3.0, 4.0}}), (ResourceVector{3.0, 4.0}));
}

TEST(ResourceVector, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(ResourceVector({-1.0}), ContractViolation);
  EXPECT_THROW(ResourceVector({std::nan("")}), ContractViolation);
  EXPECT_NO_THROW(ResourceVector({0.0, 5.0}));
}

TEST(R3LState, FlattenSplitRoundTrip) {
  RandomStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.index(4), d = 1 + rng.index(3);
    R3LState s;
    for (std::size_t i = 0; i < m; ++i) s.observation.push_back(rng.uniform(-5, 5));
    std::vector<double> r;
    for (std::size_t i = 0; i < d; ++i) r.push_back(rng.uniform(0, 20));
    s.resources = ResourceVector(r);
    const auto flat = s.flatten();
    ASSERT_EQ(flat.size(), m + d);
    EXPECT_EQ(flat[m], r[0]);
    EXPECT_EQ(R3LState::split(flat, m), s);
  }
}

TEST(NonReplenishable, Examples) {
  EXPECT_TRUE(check_non_replenishable(log_of({12, 11.9, 11.9, 0}), 0));
  EXPECT_FALSE(check_non_replenishable(log_of({5, 6}), 0));
  EXPECT_TRUE(check_non_replenishable(EpisodeLog{}, 0));
  EXPECT_THROW(check_non_replenishable(log_of({1, 0}), 1), ContractViolation);
}

TEST(NonReplenishable, HoldsForEveryEnvironmentVariant) {
  for (auto variant : {Variant::Electric, Variant::Delivery, Variant::ElectricDelivery}) {
    EnvConfig cfg;
    cfg.variant = variant;
    MountainCar env(cfg);
    RandomStream rng = seeded_rng(11);
    for (int ep = 0; ep < 5; ++ep) {
      env.reset(rng);
      EpisodeLog log;
      while (!env.done()) {
        std::vector<double> raw{rng.uniform(-1, 1)};
        if (cfg.uses_goods()) raw.push_back(rng.uniform() < 0.1 ? 1.0 : 0.0);
        log.push(env.step(env.project_action(raw)), 0.0, 1.0);
      }
      ASSERT_TRUE(log.consistent());
      for (std::size_t i = 0; i < cfg.resource_dim(); ++i) {
        EXPECT_TRUE(check_non_replenishable(log, i)) << to_string(variant) << " resource " << i;
      }
    }
  }
}

TEST(RandomStream, EqualSeedsGiveEqualDraws) {
  auto a = seeded_rng(7), b = seeded_rng(7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, DifferentSeedsDiffer) {
  auto a = seeded_rng(7), b = seeded_rng(8);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a() == b();
  EXPECT_EQ(same, 0);
}

TEST(RandomStream, SeedZeroIsUsable) {
  auto r = seeded_rng(0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(r());
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(RandomStream, SplitIsIndependentOfParentUsage) {
  auto a = seeded_rng(5);
  auto b = seeded_rng(5);
  for (int i = 0; i < 37; ++i) b();
  auto ca = a.split("env"), cb = b.split("env");
  for (int i = 0; i < 50; ++i) ASSERT_EQ(ca(), cb());
  auto other = a.split("agent");
  EXPECT_NE(a.split("env")(), other());
  EXPECT_NE(a.split(0)(), a.split(1)());
}

TEST(RandomStream, UniformMomentsAndRange) {
  auto r = seeded_rng(1);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.5, 3 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sq / n - mean * mean, 1.0 / 12, 0.002);
}

TEST(RandomStream, IndexIsUniform) {
  auto r = seeded_rng(2);
  const std::size_t k = 7, n = 70000;
  std::vector<int> counts(k);
  for (std::size_t i = 0; i < n; ++i) ++counts[r.index(k)];
  const double p = 1.0 / k, se = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, n * p, 4 * se);
}

TEST(RandomStream, NormalMoments) {
  auto r = seeded_rng(4);
  const int n = 100000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.015);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}
