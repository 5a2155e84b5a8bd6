#include <gtest/gtest.h>

#include "flyq/adversary.hpp"
#include "flyq/errors.hpp"
#include "flyq/protocol.hpp"

using namespace flyq;
using namespace flyq::protocol;
using spacetime::CausalRelation;

namespace {

ValidatedConfig ideal(int d, Transport t = Transport::SecuredChannel, std::uint64_t seed = 0) {
  auto c = SessionConfig::ideal_1d(d, 8, 1, seed);
  c.transport = t;
  return validated(c);
}

int count(const Transcript& t, Action a) {
  return static_cast<int>(std::count_if(t.records.begin(), t.records.end(), [&](const Record& r) { return r.action == a; }));
}

}  // namespace

TEST(Validation, AcceptsIdealGeometry) {
  EXPECT_TRUE(validate_config(SessionConfig::ideal_1d(4, 8)).ok());
  const auto dirs = spacetime::generate_directions(5, spacetime::DirectionMode::Spherical);
  EXPECT_TRUE(validate_config(SessionConfig::on_rays(3, dirs, 4)).ok());
}

TEST(Validation, ListsEveryViolation) {
  auto c = SessionConfig::ideal_1d(1, 8);
  c.unveil_points[0].t += 1;              // off the light ray
  c.receipt_points[1].t -= 5;             // receipt before the unveil point
  const auto r = validate_config(c);
  EXPECT_FALSE(r.ok());
  EXPECT_GE(r.errors.size(), 3u);
  EXPECT_THROW(validated(c), ConfigError);
}

TEST(Validation, RejectsTimelikeUnveilPoints) {
  auto c = SessionConfig::ideal_1d(2, 8);
  c.directions[1] = spacetime::LightDirection::one_dimensional(1, -1);
  c.unveil_points[1] = c.unveil_points[0];
  EXPECT_FALSE(validate_config(c).ok());
}

TEST(Validation, NonIdealNeedsFutureOfDelayedAction) {
  auto c = SessionConfig::ideal_1d(2, 8);
  c.geometry = Geometry::NonIdeal;
  c.processing_delay = 2;
  EXPECT_FALSE(validate_config(c).ok());  // ray points are not timelike from P
  for (auto& q : c.unveil_points) q.t += 3;
  for (auto& q : c.receipt_points) q.t += 3;
  EXPECT_TRUE(validate_config(c).ok());
  auto ideal_delay = SessionConfig::ideal_1d(2, 8);
  ideal_delay.processing_delay = 1;
  EXPECT_FALSE(validate_config(ideal_delay).ok());
}

TEST(Session, HonestCommitmentPassesAtCommittedPointOnly) {
  for (auto t : {Transport::SecuredChannel, Transport::Teleport}) {
    const auto cfg = ideal(3, t, 5);
    for (int b : {0, 1}) {
      const adversary::HonestStrategy alice(b);
      const auto tr = run_session(cfg, alice, unveil_everywhere());
      ASSERT_EQ(tr.status, SessionStatus::Completed);
      EXPECT_EQ(tr.verdict(b), Verdict::Pass);
      EXPECT_EQ(tr.verdict(1 - b), Verdict::NoShow);
      EXPECT_TRUE(causally_consistent(tr));
      EXPECT_EQ(count(tr, Action::Verify), 1);
      EXPECT_EQ(count(tr, Action::TeleportBroadcast), t == Transport::Teleport ? 1 : 0);
    }
  }
}

TEST(Session, TranscriptIsOrderedAndReproducible) {
  const auto cfg = ideal(2, Transport::Teleport, 9);
  const adversary::HonestStrategy alice(1);
  const auto a = run_session(cfg, alice, unveil_everywhere());
  const auto b = run_session(cfg, alice, unveil_everywhere());
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  for (std::size_t i = 1; i < a.records.size(); ++i) EXPECT_LE(a.records[i - 1].at.t, a.records[i].at.t);
}

TEST(Session, BobViewIsIndependentOfCommittedBit) {
  for (auto t : {Transport::SecuredChannel, Transport::Teleport}) {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto cfg = ideal(3, t, s);
      const auto v0 = bob_view_before_unveil(run_session(cfg, adversary::HonestStrategy(0), unveil_everywhere()));
      const auto v1 = bob_view_before_unveil(run_session(cfg, adversary::HonestStrategy(1), unveil_everywhere()));
      ASSERT_EQ(v0, v1) << "seed " << s;
    }
  }
}

TEST(Session, BobViewExcludesCommitterRecords) {
  const auto cfg = ideal(2, Transport::Teleport, 1);
  const auto tr = run_session(cfg, adversary::HonestStrategy(0), unveil_everywhere());
  const auto view = nlohmann::json::parse(bob_view_before_unveil(tr));
  for (const auto& r : view) EXPECT_NE(r["visibility"], "alice");
  EXPECT_NE(bob_view_before_unveil(tr).find("teleport-broadcast"), std::string::npos);
}

TEST(Session, AcausalRelayAborts) {
  const auto cfg = ideal(2);
  const auto tr = run_session(cfg, adversary::AcausalRelayStrategy(), unveil_everywhere());
  EXPECT_EQ(tr.status, SessionStatus::CausalityViolation);
  EXPECT_FALSE(tr.abort_reason.empty());
  EXPECT_EQ(count(tr, Action::Abort), 1);
}

TEST(Session, UnveilPolicySeesOnlyPastCone) {
  const auto cfg = ideal(2, Transport::Teleport, 3);
  std::size_t seen = 0;
  UnveilPolicy spy = [&](int point, std::span<const Record> past) {
    const auto q = cfg.config().unveil_points[point];
    for (const auto& r : past) {
      const auto rel = spacetime::causal_order(r.at, q);
      EXPECT_TRUE(spacetime::is_future(rel) || rel == CausalRelation::Coincident);
      EXPECT_NE(r.visibility, Visibility::BobOnly);
    }
    seen += past.size();
    return true;
  };
  run_session(cfg, adversary::HonestStrategy(0), spy);
  EXPECT_GT(seen, 0u);
}

TEST(Session, RegionSummaryMarksReceiptPast) {
  const auto cfg = ideal(2);
  const auto region = committed_region_summary(cfg);
  ASSERT_FALSE(region.samples.empty());
  EXPECT_FALSE(region.committed(cfg.config().commit_point));
  EXPECT_TRUE(region.committed({9, 0, 0, 0}));
}

TEST(Session, LabelledCopiesAreVerifiedSeparately) {
  const auto cfg = ideal(2, Transport::SecuredChannel, 4);
  const auto tr = run_labelled_session(cfg, adversary::HonestStrategy(0), 5, unveil_everywhere());
  ASSERT_EQ(tr.copies, 5);
  for (int c = 0; c < 5; ++c) {
    EXPECT_EQ(tr.verdict(0, c), Verdict::Pass);
    EXPECT_EQ(tr.verdict(1, c), Verdict::NoShow);
  }
}
