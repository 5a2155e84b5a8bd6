#include <gtest/gtest.h>

#include <random>

#include "flyq/errors.hpp"
#include "flyq/spacetime.hpp"
#include "oracles.hpp"

using namespace flyq::spacetime;

namespace {

CausalRelation expected_relation(const Event& a, const Event& b) {
  const long long dt = b.t - a.t;
  const int s = oracle::sign_interval(dt, b.x - a.x, b.y - a.y, b.z - a.z);
  if (a == b) return CausalRelation::Coincident;
  if (s < 0) return CausalRelation::Spacelike;
  if (s == 0) return dt > 0 ? CausalRelation::LightlikeFuture : CausalRelation::LightlikePast;
  return dt > 0 ? CausalRelation::TimelikeFuture : CausalRelation::TimelikePast;
}

}  // namespace

TEST(Spacetime, FuzzedPairsMatchDirectClassification) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long long> c(-6, 6);
  for (int i = 0; i < 20000; ++i) {
    const Event a{c(rng), c(rng), c(rng), c(rng)};
    const Event b{c(rng), c(rng), c(rng), c(rng)};
    const auto r = causal_order(a, b);
    ASSERT_EQ(r, expected_relation(a, b));
    ASSERT_EQ(causal_order(b, a), mirror(r));
  }
}

TEST(Spacetime, LargeCoordinatesStayExact) {
  const std::int64_t big = 3'000'000'000'000LL;
  const Event p{0, 0, 0, 0};
  const Event on_cone{big, big, 0, 0};
  EXPECT_EQ(causal_order(p, on_cone), CausalRelation::LightlikeFuture);
  EXPECT_EQ(causal_order(p, Event{big + 1, big, 0, 0}), CausalRelation::TimelikeFuture);
  EXPECT_EQ(causal_order(p, Event{big - 1, big, 0, 0}), CausalRelation::Spacelike);
  EXPECT_EQ(interval_squared(p, on_cone), 0);
  EXPECT_THROW(interval_squared(p, Event{big, 0, 0, 0}), flyq::ConfigError);
}

TEST(Spacetime, RayPointsAreLightlike) {
  const Event origin{5, -3, 2, 1};
  for (int m : {2, 3, 5, 8, 17}) {
    for (auto mode : {DirectionMode::Planar, DirectionMode::Spherical}) {
      const auto set = generate_directions(m, mode);
      for (const auto& v : set.directions) {
        const auto q = point_on_ray(origin, v, 3);
        EXPECT_EQ(causal_order(origin, q), CausalRelation::LightlikeFuture);
        EXPECT_EQ(interval_squared(origin, q), 0);
      }
    }
  }
}

TEST(Spacetime, GeneratedUnveilPointsArePairwiseSpacelike) {
  for (int m : {2, 3, 4, 7, 16, 64}) {
    for (auto mode : {DirectionMode::Planar, DirectionMode::Spherical}) {
      const auto set = generate_directions(m, mode);
      ASSERT_EQ(static_cast<int>(set.directions.size()), m);
      EXPECT_GT(set.min_separation, 0.0);
      EXPECT_NEAR(set.min_separation, min_pairwise_angle(set.directions), 1e-12);
      std::vector<Event> q;
      for (const auto& v : set.directions) q.push_back(point_on_ray({}, v, steps_for_duration(v, 10)));
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) EXPECT_EQ(causal_order(q[i], q[j]), CausalRelation::Spacelike);
      }
    }
  }
}

TEST(Spacetime, TwoPlanarDirectionsAreTheOneDimensionalPair) {
  const auto set = generate_directions(2, DirectionMode::Planar);
  EXPECT_TRUE(set.directions[0].same_direction(LightDirection::one_dimensional(0, -1)));
  EXPECT_TRUE(set.directions[1].same_direction(LightDirection::one_dimensional(1, +1)));
}

TEST(Spacetime, RejectsNonUnitDirections) {
  EXPECT_THROW(LightDirection(0, 1, 1, 0, 1), flyq::ConfigError);
  EXPECT_THROW(LightDirection(0, 0, 0, 0, 1), flyq::ConfigError);
  EXPECT_NO_THROW(LightDirection(0, 3, 4, 0, 5));
}

TEST(Spacetime, StepsCoverDuration) {
  const LightDirection v(0, 3, 4, 0, 5);
  EXPECT_EQ(steps_for_duration(v, 10), 2);
  EXPECT_EQ(steps_for_duration(v, 11), 3);
  EXPECT_THROW(point_on_ray({}, v, 0), std::invalid_argument);
}

TEST(Spacetime, CommittedRegionExcludesPastOfReceipts) {
  const std::vector<Event> receipts{{9, -8, 0, 0}, {9, 8, 0, 0}};
  EXPECT_FALSE(committed_at({0, 0, 0, 0}, receipts));
  EXPECT_FALSE(committed_at({1, -8, 0, 0}, receipts));
  EXPECT_TRUE(committed_at({9, 0, 0, 0}, receipts));
  EXPECT_TRUE(committed_at({8, -8, 0, 0}, {receipts.begin() + 1, receipts.end()}));
  EXPECT_THROW(committed_at({}, std::vector<Event>{}), std::invalid_argument);
}

TEST(Spacetime, EarliestCommonFutureMatchesLatticeSearch) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long long> c(-10, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const Event a{c(rng), c(rng), 0, 0};
    const Event b{c(rng), c(rng), 0, 0};
    if ((a.t + a.x + b.t + b.x) % 2 != 0) {
      if (causal_order(a, b) == CausalRelation::Spacelike) {
        EXPECT_THROW(earliest_common_future(a, b), flyq::ConfigError);
      }
      continue;
    }
    const Event e = earliest_common_future(a, b);
    auto in_both = [&](const Event& p) {
      auto ra = causal_order(a, p), rb = causal_order(b, p);
      return (is_future(ra) || ra == CausalRelation::Coincident) && (is_future(rb) || rb == CausalRelation::Coincident);
    };
    ASSERT_TRUE(in_both(e));
    for (long long t = -12; t < e.t; ++t) {
      for (long long x = -40; x <= 40; ++x) ASSERT_FALSE(in_both({t, x, 0, 0}));
    }
  }
}

TEST(Spacetime, EarliestAtSiteIsMinimal) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long long> c(-9, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const Event site{c(rng), c(rng), c(rng), c(rng)};
    std::vector<Event> src{{c(rng), c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng), c(rng)}};
    const Event e = earliest_at_site(site, src);
    ASSERT_EQ(e.x, site.x);
    auto reached = [&](const Event& p) {
      for (const auto& s : src) {
        auto r = causal_order(s, p);
        if (!is_future(r) && r != CausalRelation::Coincident) return false;
      }
      return p.t >= site.t;
    };
    ASSERT_TRUE(reached(e));
    ASSERT_FALSE(e.t > site.t && reached({e.t - 1, e.x, e.y, e.z}));
  }
}
