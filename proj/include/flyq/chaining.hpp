#pragma once

// Chained commitments masked by random Weyl operators, and the two-state
// redundant encoding with its provisional and final verdicts.

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "flyq/protocol.hpp"
#include "flyq/qudit.hpp"
#include "flyq/rng.hpp"
#include "flyq/spacetime.hpp"

namespace flyq::chaining {

using protocol::Verdict;
using qudit::PureState;
using spacetime::Event;

/// How level k+1 is sized from level k. Both use m_{k+1} = d_k^2.
enum class LevelSizing {
  /// d_{k+1} = 4 m_{k+1}.
  Secure,
  /// d_{k+1} = m_{k+1}: smaller, with large wiggle room; exercises the
  /// mechanics at depth 3.
  Compact,
};

std::string_view to_string(LevelSizing s);

struct LevelParams {
  int level = 0;
  int d = 2;
  int m = 2;
  /// 1 + 2(m - 1)/(d + 1).
  double bound = 0.0;
};

/// Level 0 has (d0, m = 2). Throws CapExceeded when a level needs more than
/// 4096 directions or dimensions, or the chain more than 20000 sessions.
std::vector<LevelParams> chain_levels(int depth, int d0, LevelSizing sizing);

struct ChainConfig {
  Event commit_point{};
  int d0 = 2;
  /// Coordinate time from a level's commitment point to its branch points.
  std::int64_t interval = 8;
  /// Number of masked levels; the chain has depth + 1 levels.
  int depth = 1;
  LevelSizing sizing = LevelSizing::Secure;
  std::int64_t receipt_lag = 1;
  std::uint64_t seed = 0;
};

/// Commit at level L to a value other than the mask used at level L - 1.
struct ChainTamper {
  int level = -1;
};

struct ChainSession {
  int id = 0;
  int level = 0;
  int parent = -1;
  /// Branch point of the parent at which this session starts.
  int parent_point = -1;
  Event commit_point{};
  int d = 2;
  int m = 2;
  std::vector<spacetime::LightDirection> directions;
  std::vector<Event> unveil_points;
  std::vector<Event> receipt_points;
  /// Committer side: committed value and whether this is the real path.
  int value = 0;
  bool real = false;
  std::vector<std::optional<int>> mask;
  /// Bob side.
  PureState issued = PureState::basis(2, 0);
  /// What the committer handed back at each branch point.
  std::vector<std::optional<PureState>> returned;
  std::vector<int> children;
};

struct Chain {
  ChainConfig config;
  std::vector<LevelParams> levels;
  std::vector<ChainSession> sessions;
  int bit = 0;

  /// Sessions nested by level. Amplitudes are included only on request.
  nlohmann::json to_json(bool with_states = false) const;
};

/// Runs the committer's side of a chained commitment of `bit`. Sessions are
/// opened at every branch point, real or counterfactual; final-level
/// sessions return nothing until the unveiling.
Chain chain_commit(int bit, const ChainConfig& cfg, ChainTamper tamper = {});

/// True iff each session starts at its parent's branch point and every branch
/// point and receipt lies in the causal future of its session's start.
bool causally_consistent(const Chain& chain);

struct ChainVerdict {
  int bit = -1;
  /// Verification outcome per level on the decoded path.
  std::vector<Verdict> levels;
  bool all_pass = false;
  /// Highest level whose verification failed.
  std::optional<int> failing_level;
  /// Earliest event at the final receipt site that has every receipt on the
  /// decoded path in its causal past.
  Event decision_point{};
};

/// Decodes the chain backwards from the final unmasked return and verifies
/// every level.
ChainVerdict unveil_chain(const Chain& chain, Rng& nature);

/// Bob's test of one return against the session's issued state, after
/// undoing the Weyl operator `unmask` if given.
Verdict test_return(const ChainSession& s, int point, std::optional<int> unmask, Rng& nature);

/// The final-level session holding the unveiling, if any.
std::optional<int> final_session(const Chain& chain);

enum class DualStrategy { Honest, TemporaryCheat };

struct DualCommitment {
  protocol::ValidatedConfig cfg;
  int bit = 0;
  DualStrategy strategy = DualStrategy::Honest;
  /// Bob's states rho_0 and rho_1.
  PureState rho0;
  PureState rho1;
  /// held[line] lists which of rho_0 (0) and rho_1 (1) travel along L_line.
  std::vector<std::vector<int>> held;
};

/// rho_0 follows the standard convention, rho_1 the reversed one. The
/// temporary cheat sends both along L_0. Requires a 1D two-ray config.
DualCommitment dual_commit(int bit, const protocol::ValidatedConfig& cfg, DualStrategy strategy,
                           SessionStreams& streams);

enum class FinalVerdict { Accepted, CheatDetected, Incomplete };
std::string_view to_string(FinalVerdict v);

struct DualVerdict {
  int point = 0;
  int claim = 0;
  Verdict provisional = Verdict::NoShow;
  std::optional<Verdict> opposite;
  FinalVerdict final = FinalVerdict::Incomplete;
  Event provisional_at{};
  /// Earliest point in the common causal future of Q'_0 and Q'_1.
  Event final_at{};
};

/// Unveils `claim` at Q_point, then (if asked) at the opposite line. A
/// committer lacking the required state returns a Haar-random guess.
DualVerdict dual_unveil(const DualCommitment& c, int point, int claim, bool return_opposite,
                        SessionStreams& streams);

nlohmann::json to_json(const DualVerdict& v);

}  // namespace flyq::chaining
