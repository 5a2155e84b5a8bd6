#include <gtest/gtest.h>

#include "flyq/adversary.hpp"
#include "flyq/errors.hpp"

using namespace flyq;
using namespace flyq::adversary;

namespace {

protocol::ValidatedConfig cfg1d(int d) { return protocol::validated(protocol::SessionConfig::ideal_1d(d, 8)); }

protocol::ValidatedConfig cfg_planar(int d, int m) {
  const auto dirs = spacetime::generate_directions(m, spacetime::DirectionMode::Planar);
  return protocol::validated(protocol::SessionConfig::on_rays(d, dirs, 4));
}

}  // namespace

TEST(Adversary, SymmetricCloneReachesBound) {
  for (int d : {2, 3}) {
    const auto alice = clone_symmetric(d, 2);
    EXPECT_TRUE(alice->trace_preserving());
    const auto s = evaluate(*alice, cfg1d(d), 3000, 11);
    ASSERT_TRUE(s.defined());
    const double f = (d + 3.0) / (2.0 * (d + 1.0));
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(s.p[i], f, s.radius[i] + 1e-3);
    EXPECT_NEAR(s.sum, 1.0 + 2.0 / (d + 1), s.sum_radius + 1e-3);
    // Both clones pass together with probability 2/(d+1).
    EXPECT_NEAR(s.joint, 2.0 / (d + 1), s.joint_radius + 1e-3);
  }
}

TEST(Adversary, ThreeWayCloneOnPlanarRays) {
  const int d = 2, m = 3;
  const auto s = evaluate(*clone_symmetric(d, m), cfg_planar(d, m), 2000, 12);
  EXPECT_NEAR(s.sum, 1.0 + 2.0 * (m - 1) / (d + 1), s.sum_radius + 1e-3);
}

TEST(Adversary, AsymmetricCloneMatchesClosedForm) {
  const int d = 3;
  const auto p = cloning::AsymmetryParams::on_constraint(d, 0.9);
  const auto s = evaluate(*clone_asymmetric(d, p), cfg1d(d), 3000, 13);
  const auto [f0, f1] = cloning::asymmetric_fidelities(d, p);
  EXPECT_NEAR(s.p[0], f0, s.radius[0] + 1e-3);
  EXPECT_NEAR(s.p[1], f1, s.radius[1] + 1e-3);
}

TEST(Adversary, ScoreDoesNotDependOnThreadCount) {
  const auto alice = clone_symmetric(2, 2);
  const auto a = evaluate(*alice, cfg1d(2), 500, 14, 1);
  const auto b = evaluate(*alice, cfg1d(2), 500, 14, 4);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.sum, b.sum);
  EXPECT_EQ(csv_row(a), csv_row(b));
}

TEST(Adversary, SuperpositionNeverExceedsOne) {
  const auto s = evaluate(*superposed_commit(0.3, 0.7), cfg1d(3), 2000, 15);
  EXPECT_DOUBLE_EQ(s.sum, 1.0);
  EXPECT_DOUBLE_EQ(s.joint, 0.0);
  EXPECT_NEAR(s.p[0], 0.3, s.radius[0] + 1e-3);
  EXPECT_THROW(SuperposedStrategy({0.5, 0.6}), std::invalid_argument);
}

TEST(Adversary, MeasureResendFidelity) {
  // Measuring in a Haar basis and resending the outcome gives
  // E sum_k |c_k|^4 = 2/(d+1) per point.
  const int d = 3, m = 3;
  const auto s = evaluate(MeasureResendStrategy(BasisPolicy::HaarRandom), cfg_planar(d, m), 3000, 16);
  for (int i = 0; i < m; ++i) EXPECT_NEAR(s.p[i], 2.0 / (d + 1), s.radius[i] + 1e-3);
  EXPECT_LE(s.sum, s.bound + s.sum_radius);
}

TEST(Adversary, ChoiOfCloner) {
  const auto alice = clone_symmetric(2, 2);
  const auto j = alice->choi();
  EXPECT_NEAR(j.trace().real(), 2.0, 1e-10);
  EXPECT_LT((j - j.adjoint()).norm(), 1e-10);
}

TEST(Adversary, AcausalStrategyLeavesScoreUndefined) {
  const auto s = evaluate(AcausalRelayStrategy(), cfg1d(2), 20, 17);
  EXPECT_EQ(s.aborted, 20u);
  EXPECT_FALSE(s.defined());
}

TEST(Adversary, RegistryAndCsv) {
  EXPECT_EQ(csv_header(2), "name,d,m,p_0,p_1,sum,bound,gap");
  for (const auto& name : strategy_names()) EXPECT_NO_THROW(make_strategy(name, 2, 2));
  EXPECT_THROW(make_strategy("nope", 2, 2), ConfigError);
  EXPECT_THROW(make_strategy("superposed", 2, 3), ConfigError);
  const auto row = csv_row(evaluate(HonestStrategy(0), cfg1d(2), 10, 1));
  EXPECT_EQ(row.rfind("honest,2,2,", 0), 0u);
}
