#include <gtest/gtest.h>

#include <cmath>

#include "flyq/adversary.hpp"
#include "flyq/errors.hpp"
#include "flyq/robustness.hpp"
#include "oracles.hpp"

using namespace flyq;
using namespace flyq::robustness;

namespace {

protocol::ValidatedConfig cfg1d(int d, std::uint64_t seed) {
  return protocol::validated(protocol::SessionConfig::ideal_1d(d, 8, 1, seed));
}

/// Pass probability of one honestly routed copy, from the leg model: the
/// copy survives every leg and the detector; any Weyl error leaves a
/// uniformly random Weyl image, which passes with probability 1/d on average.
double copy_pass(int d, const std::vector<LegNoise>& legs, double eff) {
  double survive = eff, clean = 1.0;
  for (const auto& l : legs) {
    survive *= 1.0 - l.loss;
    clean *= 1.0 - l.depolarizing;
  }
  return survive * (clean + (1.0 - clean) / d);
}

}  // namespace

TEST(Robustness, BinomialTailMatchesDirectSum) {
  for (int n : {1, 5, 20, 40}) {
    for (double p : {0.0, 0.1, 0.5, 0.83, 1.0}) {
      for (int k = -1; k <= n + 1; ++k) {
        ASSERT_NEAR(binomial_tail(n, p, k), oracle::binomial_tail(n, p, k), 1e-12) << n << " " << p << " " << k;
      }
    }
  }
}

TEST(Robustness, NoiseModelValidates) {
  EXPECT_THROW(NoiseModel({1.5, 0}, {}, {}), ConfigError);
  EXPECT_THROW(NoiseModel({}, {}, {}, -0.1), ConfigError);
  EXPECT_NEAR(NoiseModel::none().per_copy_pass(3), 1.0, 1e-15);
  const NoiseModel n({0.1, 0.2}, {0.05, 0.1}, {0.0, 0.3}, 0.9);
  EXPECT_NEAR(n.per_copy_pass(3), copy_pass(3, {{0.1, 0.2}, {0.05, 0.1}, {0.0, 0.3}}, 0.9), 1e-14);
}

TEST(Robustness, NoisyCopiesPassAtPredictedRate) {
  const int d = 2, copies = 20, trials = 300;
  const NoiseModel noise({0.05, 0.1}, {0.1, 0.1}, {0.05, 0.0}, 0.95);
  const double p = copy_pass(d, {{0.05, 0.1}, {0.1, 0.1}, {0.05, 0.0}}, 0.95);
  int pass = 0;
  for (int t = 0; t < trials; ++t) {
    const auto tr = protocol::run_labelled_session(cfg1d(d, t), adversary::HonestStrategy(0), copies,
                                                   protocol::unveil_only(0), &noise);
    for (int c = 0; c < copies; ++c) pass += tr.verdict(0, c) == protocol::Verdict::Pass;
  }
  const double n = copies * trials;
  EXPECT_NEAR(pass / n, p, 3.0 * std::sqrt(p * (1 - p) / n));
}

TEST(Robustness, HonestAcceptanceMatchesBinomial) {
  const int d = 2;
  for (auto [loss, m] : std::vector<std::pair<double, int>>{{0.1, 7}, {0.2, 8}, {0.05, 10}}) {
    const RedundancyParams params{10, m, d};
    const auto noise = NoiseModel::single_leg(loss);
    const double expect = oracle::binomial_tail(10, 1.0 - loss, m);
    EXPECT_NEAR(honest_accept_probability(params, noise), expect, 1e-12);
    const int trials = 400;
    int acc = 0;
    for (int t = 0; t < trials; ++t) {
      const auto r = run_redundant_session(cfg1d(d, 100 + t), params, noise, adversary::HonestStrategy(0),
                                           protocol::unveil_only(0));
      acc += r.accepted[0];
    }
    EXPECT_NEAR(acc / double(trials), expect, 3.0 * std::sqrt(expect * (1 - expect) / trials) + 1e-9);
  }
}

TEST(Robustness, CloningEveryCopyFollowsProductModel) {
  // Per copy: both clones pass with 2/(d+1), each marginal with F, never neither.
  const int d = 2, n = 6, m = 4, trials = 600;
  const double both = 2.0 / (d + 1), f = (d + 3.0) / (2.0 * (d + 1)), one = f - both;
  double p_both = 0.0;
  for (int k = 0; k <= n; ++k) {
    for (int i = 0; k + i <= n; ++i) {
      const int j = n - k - i;
      if (k + i < m || k + j < m) continue;
      double c = std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(i + 1.0) * std::tgamma(j + 1.0));
      p_both += c * std::pow(both, k) * std::pow(one, i) * std::pow(one, j);
    }
  }
  const RedundancyParams params{n, m, d};
  const auto alice = adversary::clone_symmetric(d, 2);
  int acc_both = 0, acc0 = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = run_redundant_session(cfg1d(d, 500 + t), params, NoiseModel::none(), *alice,
                                         protocol::unveil_everywhere());
    acc_both += r.accepted[0] && r.accepted[1];
    acc0 += r.accepted[0];
  }
  EXPECT_NEAR(acc_both / double(trials), p_both, 3.0 * std::sqrt(p_both * (1 - p_both) / trials));
  const double marg = oracle::binomial_tail(n, f, m);
  EXPECT_NEAR(acc0 / double(trials), marg, 3.0 * std::sqrt(marg * (1 - marg) / trials));
}

TEST(Robustness, CheatEpsilonClosedForms) {
  for (int d = 2; d <= 16; ++d) {
    EXPECT_NEAR(cheat_epsilon(d, 1, 1), 2.0 / (d + 1), 1e-15);
    const double fail = (d - 1.0) / (2.0 * (d + 1));
    for (int n : {3, 8, 15}) {
      double prev = 2.0;
      for (int m = 1; m <= n; ++m) {
        const double e = cheat_epsilon(d, n, m);
        EXPECT_NEAR(e, std::max(0.0, 1.0 - 2.0 * oracle::binomial_tail(n, fail, n - m + 1)), 1e-12);
        EXPECT_LE(e, prev + 1e-15);
        EXPECT_GE(cheat_epsilon(d, n, m, AttackModel::IidAsymmetric), e - 1e-12);
        prev = e;
      }
    }
  }
}

TEST(Robustness, KeepAndGuessBeatsSymmetricModel) {
  // a = 1 keeps the input at Q_0 and guesses at Q_1: p'_0 = 1, p'_1 = P(Bin(N,1/d) >= M).
  const int d = 2, n = 10, m = 9;
  const double keep_guess = oracle::binomial_tail(n, 1.0 / d, m);
  EXPECT_GT(keep_guess, cheat_epsilon(d, n, m));
  EXPECT_GE(cheat_epsilon(d, n, m, AttackModel::IidAsymmetric), keep_guess - 1e-12);
}

TEST(Robustness, RedundancyParameterChecks) {
  EXPECT_THROW((RedundancyParams{3, 4, 2}.validate()), ConfigError);
  EXPECT_THROW((RedundancyParams{3, 0, 2}.validate()), ConfigError);
  EXPECT_NEAR((RedundancyParams{16, 12, 2}.margin_sigmas()), 2.0, 1e-12);
}

TEST(Robustness, CollectiveProbeIsReproducible) {
  const auto a = collective_attack_probe(2, 2, 2, 5, 400);
  const auto b = collective_attack_probe(2, 2, 2, 5, 400);
  EXPECT_EQ(a.held_out, b.held_out);
  EXPECT_GE(a.iid_bound, 0.0);
  EXPECT_LE(a.held_out, 1.0);
  EXPECT_THROW(collective_attack_probe(4, 2, 1, 1), ConfigError);
}
