#pragma once

// Universal cloning machines and the fidelity-sum bounds they realize.

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "flyq/qudit.hpp"
#include "flyq/rng.hpp"

namespace flyq::cloning {

using qudit::DensityMatrix;
using qudit::Matrix;
using qudit::PureState;
using qudit::Vector;

/// Constraint tolerance for a^2 + b^2 + 2ab/d = 1.
inline constexpr double kConstraintTol = 1e-10;

/// Amplitudes of the asymmetric 1 -> 2 cloner.
struct AsymmetryParams {
  double a = 1.0;
  double b = 0.0;

  /// The nonnegative b that puts (a, b) on the constraint curve for d.
  /// Throws std::invalid_argument unless 0 <= a <= 1.
  static AsymmetryParams on_constraint(int d, double a);
  /// The symmetric point a = b.
  static AsymmetryParams symmetric(int d);

  bool satisfies(int d, double tol = kConstraintTol) const;
};

struct CloneOutput {
  std::vector<DensityMatrix> clones;
  /// Fidelity of each clone with the source state.
  std::vector<double> fidelities;
  double sum = 0.0;
};

struct BoundReport {
  int d = 0;
  int m = 0;
  /// 1 + 2(m - 1)/(d + 1).
  double bound = 0.0;
  /// Fidelity sum of the explicit symmetric cloner.
  double achieved = 0.0;
  double gap = 0.0;
  /// 1 + 2m/d.
  double envelope = 0.0;
};

/// Per-clone fidelity (2m + d - 1)/(m(d + 1)) of the optimal symmetric 1 -> m cloner.
double symmetric_fidelity(int d, int m);

/// Closed forms 1 - (d-1)b^2/d and 1 - (d-1)a^2/d.
std::pair<double, double> asymmetric_fidelities(int d, const AsymmetryParams& p);

/// Optimal universal symmetric 1 -> m cloner: psi (x) (I/d)^(m-1) projected
/// onto the symmetric subspace of m qudits, renormalized, reduced to each
/// clone. Throws CapExceeded when d^(2m-1) exceeds the joint-state cap.
CloneOutput symmetric_clone(const PureState& psi, int m);

/// Explicit tripartite construction a|psi>_A|Phi>_BC + b|psi>_B|Phi>_AC.
/// Clone 0 is A, clone 1 is B. Throws std::invalid_argument if the params
/// miss the constraint by more than kConstraintTol.
CloneOutput asymmetric_clone(const PureState& psi, const AsymmetryParams& params);

/// The isometry C^d -> (C^d)^m (x) C^(d^(m-1)) whose clone marginals are
/// those of symmetric_clone. Output order: clones 0..m-1, then the ancilla.
Matrix symmetric_cloner_isometry(int d, int m);

/// The isometry C^d -> C^d (x) C^d (x) C^d of asymmetric_clone (A, B, C).
Matrix asymmetric_cloner_isometry(int d, const AsymmetryParams& params);

/// Closed-form optimum, constructive value and envelope. Throws
/// std::invalid_argument unless d >= 2 and m >= 2.
BoundReport bound_sum_fidelity(int d, int m);

nlohmann::json to_json(const BoundReport& r);

struct ConstraintSweep {
  std::size_t points = 0;
  std::size_t argmax = 0;
  AsymmetryParams at_max;
  double max_sum = 0.0;
};

/// Evaluates 2 - (d-1)(a^2 + b^2)/d on `points` evenly spaced angles of the
/// constraint curve from (1, 0) to (0, 1).
ConstraintSweep sweep_constraint(int d, std::size_t points);

/// A strategy as a map from the input state to its m output states.
using MultiCloneMap = std::function<std::vector<DensityMatrix>(const PureState&)>;

struct SymmetrizedScore {
  /// Mean fidelity of each output over the Haar input sample.
  std::vector<double> original;
  /// Same after a uniformly random relabelling of outputs per sample.
  std::vector<double> twirled;
  /// 3 sigma radii of the twirled means.
  std::vector<double> twirled_radius;
  double original_sum = 0.0;
  double twirled_sum = 0.0;
};

/// Monte-Carlo unitary-and-permutation twirl of a strategy over `samples`
/// Haar-random conjugations of `reference`.
SymmetrizedScore symmetrize(const MultiCloneMap& map, const PureState& reference, int m,
                            std::size_t samples, Rng& rng);

/// Exact Haar-averaged fidelity of each clone of an isometric dilation
/// V : C^d -> (C^d)^m (x) C^anc, via (d F_e + 1)/(d + 1).
std::vector<double> haar_average_fidelities(const Matrix& v, int d, int m, int anc);

struct SearchResult {
  double best_sum = 1.0;
  std::vector<double> best_fidelities;
  double bound = 0.0;
  std::size_t trials = 0;
};

/// Random isometric dilations refined by hill-climbing, maximizing the
/// Haar-averaged fidelity sum. trials = 0 returns the honest baseline 1.
/// Requires d <= 5, m <= 3; runs on up to `threads` workers (0 = hardware).
/// The result depends only on (d, m, trials, seed).
SearchResult randomized_attack_search(int d, int m, std::size_t trials, std::uint64_t seed,
                                      unsigned threads = 0);

}  // namespace flyq::cloning
