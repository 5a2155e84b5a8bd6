#include <gtest/gtest.h>

#include <cmath>

#include "flyq/cloning.hpp"
#include "flyq/errors.hpp"
#include "oracles.hpp"

using namespace flyq;
using namespace flyq::cloning;
using qudit::Complex;

namespace {

/// Marginals of S (psi psi^dag (x) I) S / Tr[...].
std::vector<oracle::Mat> projected_marginals(const PureState& psi, int m) {
  const int d = psi.dim();
  const auto s = oracle::symmetric_projector(d, m);
  oracle::Mat in = psi.projector();
  for (int k = 1; k < m; ++k) in = oracle::kron(in, oracle::Mat::Identity(d, d));
  oracle::Mat out = s * in * s;
  out /= out.trace().real();
  std::vector<oracle::Mat> marg;
  const std::vector<int> dims(m, d);
  for (int k = 0; k < m; ++k) marg.push_back(oracle::partial_trace(out, dims, k));
  return marg;
}

oracle::Vec maximally_entangled(int d) {
  oracle::Vec phi = oracle::Vec::Zero(d * d);
  for (int k = 0; k < d; ++k) phi(k * d + k) = 1.0 / std::sqrt(d);
  return phi;
}

}  // namespace

TEST(Cloning, ClosedForms) {
  EXPECT_NEAR(symmetric_fidelity(2, 2), 5.0 / 6.0, 1e-15);
  for (int d = 2; d <= 16; ++d) {
    EXPECT_NEAR(2 * symmetric_fidelity(d, 2), 1.0 + 2.0 / (d + 1), 1e-14);
    const auto sym = AsymmetryParams::symmetric(d);
    EXPECT_TRUE(sym.satisfies(d));
    const auto [f0, f1] = asymmetric_fidelities(d, sym);
    EXPECT_NEAR(f0, symmetric_fidelity(d, 2), 1e-14);
    EXPECT_NEAR(f1, symmetric_fidelity(d, 2), 1e-14);
  }
}

TEST(Cloning, SymmetricCloneMatchesProjectorConstruction) {
  for (int d : {2, 3}) {
    for (int m : {2, 3}) {
      Rng rng = make_rng(20, "t", d * 10 + m);
      const auto psi = qudit::haar_random_state(d, rng);
      const auto out = symmetric_clone(psi, m);
      const auto ref = projected_marginals(psi, m);
      ASSERT_EQ(static_cast<int>(out.clones.size()), m);
      for (int k = 0; k < m; ++k) {
        EXPECT_LT((out.clones[k].matrix() - ref[k]).norm(), 1e-10) << "d=" << d << " m=" << m;
        EXPECT_NEAR(out.fidelities[k], symmetric_fidelity(d, m), 1e-10);
      }
    }
  }
}

TEST(Cloning, SymmetricIsometryReproducesClones) {
  for (int d : {2, 3}) {
    for (int m : {2, 3}) {
      const auto v = symmetric_cloner_isometry(d, m);
      EXPECT_LT((v.adjoint() * v - qudit::Matrix::Identity(d, d)).norm(), 1e-10);
      const auto f = haar_average_fidelities(v, d, m, static_cast<int>(oracle::ipow(d, m - 1)));
      for (double x : f) EXPECT_NEAR(x, symmetric_fidelity(d, m), 1e-10);
    }
  }
  EXPECT_THROW(symmetric_cloner_isometry(16, 3), CapExceeded);
}

TEST(Cloning, AsymmetricCloneMatchesDirectConstruction) {
  for (int d : {2, 3, 4}) {
    Rng rng = make_rng(21, "t", d);
    for (double a : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      const auto p = AsymmetryParams::on_constraint(d, a);
      ASSERT_TRUE(p.satisfies(d));
      const auto psi = qudit::haar_random_state(d, rng);
      // a |psi>_A |Phi>_BC + b |psi>_B |Phi>_AC, order A B C.
      const oracle::Vec phi = maximally_entangled(d);
      oracle::Vec state = oracle::Vec::Zero(d * d * d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          for (int k = 0; k < d; ++k) {
            state(i * d * d + j * d + k) =
                p.a * psi.amplitudes()(i) * phi(j * d + k) + p.b * psi.amplitudes()(j) * phi(i * d + k);
          }
        }
      }
      ASSERT_NEAR(state.norm(), 1.0, 1e-10);
      const oracle::Mat rho = state * state.adjoint();
      const std::vector<int> dims{d, d, d};
      const auto out = asymmetric_clone(psi, p);
      EXPECT_LT((out.clones[0].matrix() - oracle::partial_trace(rho, dims, 0)).norm(), 1e-10);
      EXPECT_LT((out.clones[1].matrix() - oracle::partial_trace(rho, dims, 1)).norm(), 1e-10);
      const auto [f0, f1] = asymmetric_fidelities(d, p);
      EXPECT_NEAR(out.fidelities[0], f0, 1e-10);
      EXPECT_NEAR(out.fidelities[1], f1, 1e-10);
      EXPECT_LE(out.sum, 1.0 + 2.0 / (d + 1) + 1e-9);
    }
  }
  EXPECT_THROW(asymmetric_clone(PureState::basis(2, 0), {0.5, 0.5}), std::invalid_argument);
}

TEST(Cloning, BoundReportsCloseTheGap) {
  for (int d = 2; d <= 6; ++d) {
    for (int m = 2; m <= 3; ++m) {
      const auto r = bound_sum_fidelity(d, m);
      EXPECT_NEAR(r.bound, 1.0 + 2.0 * (m - 1) / (d + 1), 1e-15);
      EXPECT_LE(std::abs(r.gap), 1e-9);
      EXPECT_NEAR(r.envelope, 1.0 + 2.0 * m / d, 1e-15);
      EXPECT_LE(r.achieved, r.envelope + 1e-9);
    }
  }
  EXPECT_THROW(bound_sum_fidelity(1, 2), std::invalid_argument);
}

TEST(Cloning, ConstraintSweepPeaksAtSymmetricPoint) {
  for (int d : {2, 3, 4, 9}) {
    const auto s = sweep_constraint(d, 10001);
    EXPECT_EQ(s.argmax, 5000u);
    EXPECT_NEAR(s.at_max.a, s.at_max.b, 1e-9);
    EXPECT_NEAR(s.max_sum, 1.0 + 2.0 / (d + 1), 1e-9);
  }
}

TEST(Cloning, HaarAverageIdentityMatchesMonteCarlo) {
  // A random isometry C^2 -> C^2 (x) C^2 (x) C^2.
  const int d = 2, m = 2, anc = 2;
  Rng rng = make_rng(22, "t");
  const qudit::Matrix u = qudit::haar_unitary(d * d * anc, rng);
  const qudit::Matrix v = u.leftCols(d);
  const auto exact = haar_average_fidelities(v, d, m, anc);
  const int n = 6000;
  std::vector<double> mc(m, 0.0), sq(m, 0.0);
  const std::vector<int> dims{d, d, anc};
  for (int i = 0; i < n; ++i) {
    const auto psi = qudit::haar_random_state(d, rng);
    const oracle::Vec out = v * psi.amplitudes();
    const oracle::Mat rho = out * out.adjoint();
    for (int k = 0; k < m; ++k) {
      const double f = (psi.amplitudes().adjoint() * oracle::partial_trace(rho, dims, k) * psi.amplitudes())(0).real();
      mc[k] += f;
      sq[k] += f * f;
    }
  }
  for (int k = 0; k < m; ++k) {
    const double mean = mc[k] / n;
    const double sd = std::sqrt(std::max(0.0, sq[k] / n - mean * mean) / n);
    EXPECT_NEAR(mean, exact[k], 3.0 * sd + 1e-4);
  }
}

TEST(Cloning, AttackSearchStaysBelowBound) {
  for (int d : {2, 3}) {
    const auto r = randomized_attack_search(d, 2, 48, 7, 1);
    EXPECT_LE(r.best_sum, r.bound + 1e-6);
    // Keep the input at one point and guess at the other.
    EXPECT_GE(r.best_sum, 1.0 + 1.0 / d - 1e-9);
    const auto again = randomized_attack_search(d, 2, 48, 7, 3);
    EXPECT_EQ(r.best_sum, again.best_sum);
  }
  EXPECT_EQ(randomized_attack_search(2, 2, 0, 1).best_sum, 1.0);
}

TEST(Cloning, SymmetrizationEqualizesOutputs) {
  const int d = 3;
  const auto p = AsymmetryParams::on_constraint(d, 0.8);
  MultiCloneMap map = [&](const PureState& psi) { return asymmetric_clone(psi, p).clones; };
  Rng rng = make_rng(23, "t");
  const auto s = symmetrize(map, qudit::haar_random_state(d, rng), 2, 3000, rng);
  const auto [f0, f1] = asymmetric_fidelities(d, p);
  EXPECT_NEAR(s.original[0], f0, 1e-9);
  EXPECT_NEAR(s.original[1], f1, 1e-9);
  EXPECT_NEAR(s.twirled[0], s.twirled[1], s.twirled_radius[0] + s.twirled_radius[1]);
  EXPECT_NEAR(s.twirled_sum, s.original_sum, s.twirled_radius[0] + s.twirled_radius[1]);
}
