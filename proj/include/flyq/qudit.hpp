#pragma once

// Finite-dimensional quantum states: pure states, density matrices,
// channels in Choi form, Weyl (shift/clock) operators and qudit teleportation.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "flyq/rng.hpp"
#include "flyq/spacetime.hpp"

namespace flyq::qudit {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Tolerance for algebraic identities (norms, traces, Hermiticity).
inline constexpr double kAlgebraicTol = 1e-12;
/// Tolerance for eigenvalue positivity.
inline constexpr double kEigenTol = 1e-10;
/// Largest dense matrix dimension (multi-qudit operators).
inline constexpr int kMaxDenseDim = 4096;

class PureState {
 public:
  /// Throws std::invalid_argument if dim < 2 or the norm differs from 1 by
  /// more than kAlgebraicTol.
  explicit PureState(Vector amplitudes);

  /// Normalizes first; throws on a zero vector.
  static PureState normalized(Vector amplitudes);
  static PureState basis(int d, int k);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Matrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity and unit trace (kAlgebraicTol) and positivity
  /// (eigenvalues >= -kEigenTol). Throws std::invalid_argument otherwise.
  explicit DensityMatrix(Matrix m);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int d);
  /// For results of operations that preserve the invariants by
  /// construction; checked only by debug assertions.
  static DensityMatrix trusted(Matrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  double purity() const;

 private:
  struct Trusted {};
  DensityMatrix(Matrix m, Trusted);
  Matrix m_;
};

/// Returns a list of violated invariants (empty when valid).
std::vector<std::string> density_violations(const Matrix& m);

/// Haar-random pure state by complex-Gaussian normalization.
PureState haar_random_state(int d, Rng& rng);

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
Matrix haar_unitary(int d, Rng& rng);

/// <psi| rho |psi>.
double fidelity_with_pure(const DensityMatrix& rho, const PureState& psi);
/// |<phi|psi>|^2.
double fidelity_with_pure(const PureState& phi, const PureState& psi);

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

enum class TestOutcome { Pass, Fail };

/// Projective test {|expected><expected|, I - |expected><expected|}.
/// Passes with probability fidelity_with_pure(returned, expected).
TestOutcome projective_verify(const PureState& expected, const DensityMatrix& returned, Rng& rng);
TestOutcome projective_verify(const PureState& expected, const PureState& returned, Rng& rng);

/// X^a Z^b with X|k> = |k+1 mod d>, Z|k> = w^k |k>, w = exp(2 pi i / d),
/// indexed by j = a * d + b.
class WeylOperator {
 public:
  /// Throws std::invalid_argument unless d >= 2 and 0 <= j < d^2.
  WeylOperator(int d, int j);

  int dim() const { return d_; }
  int index() const { return a_ * d_ + b_; }
  int shift() const { return a_; }
  int clock() const { return b_; }

  Matrix matrix() const;
  Vector apply(const Vector& v) const;
  Vector apply_inverse(const Vector& v) const;
  PureState apply(const PureState& psi) const;
  PureState apply_inverse(const PureState& psi) const;

 private:
  int d_, a_, b_;
};

inline WeylOperator weyl(int d, int j) { return WeylOperator(d, j); }

/// A maximally entangled pair shared between two spacetime points.
struct TeleportResource {
  int d = 2;
  /// (|00> + |11> + ...)/sqrt(d), source half first.
  Vector pair;
  spacetime::Event source;
  spacetime::Event target;

  static TeleportResource make(int d, spacetime::Event source, spacetime::Event target);

  /// Reduced state of the source (side = 0) or target (side = 1) half.
  DensityMatrix reduced(int side) const;
};

struct TeleportResult {
  /// Classical Bell-measurement outcome, uniform on {0, ..., d^2 - 1}.
  int index = 0;
  /// Equal to weyl(d, index) applied to the input (up to global phase).
  PureState remote;
};

/// Full d-dimensional teleportation: generalized Bell measurement on the input
/// and the source half, outcome sampled by the Born rule.
TeleportResult teleport(const PureState& input, const TeleportResource& resource, Rng& rng);

/// Kronecker product a (x) b.
Matrix tensor(const Matrix& a, const Matrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Traces out every subsystem except `keep`. `dims` lists the subsystem
/// dimensions, most significant first.
Matrix partial_trace(const Matrix& m, std::span<const int> dims, std::size_t keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::size_t keep);

/// Reduced state of subsystem `keep` of a pure joint vector.
Matrix reduced_from_vector(const Vector& v, std::span<const int> dims, std::size_t keep);

/// Choi matrix J = sum_ij |i><j| (x) E(|i><j|), input factor first.
Matrix identity_choi(int d);
Matrix depolarizing_choi(int d);
/// Choi matrix of the channel rho -> V rho V^dagger.
Matrix isometry_choi(const Matrix& v);

/// E(rho) = Tr_in[(rho^T (x) I) J]. Throws std::invalid_argument when J is not
/// positive semidefinite or not trace preserving beyond tolerance, and
/// DimensionMismatch on shape errors.
DensityMatrix apply_channel(const Matrix& choi, const DensityMatrix& rho);

/// Amplitudes as [[re, im], ...].
nlohmann::json to_json(const PureState& psi);
nlohmann::json to_json(const DensityMatrix& rho);

}  // namespace flyq::qudit
