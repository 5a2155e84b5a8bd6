#pragma once

// One commitment session: geometry validation, Bob's preparation and tests,
// the committer's lab, and the causally ordered transcript.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flyq/joint_state.hpp"
#include "flyq/qudit.hpp"
#include "flyq/rng.hpp"
#include "flyq/spacetime.hpp"

namespace flyq::protocol {

using qudit::Matrix;
using qudit::PureState;
using spacetime::Event;
using spacetime::LightDirection;
using SystemId = qudit::JointState::SystemId;

/// Largest supported qudit dimension.
inline constexpr int kMaxQuditDim = 32;

enum class Geometry { Ideal, NonIdeal };
enum class Transport { SecuredChannel, Teleport };

std::string_view to_string(Geometry g);
std::string_view to_string(Transport t);

struct SessionConfig {
  int d = 2;
  Event commit_point{};
  std::vector<LightDirection> directions;
  /// Q_i, one per direction.
  std::vector<Event> unveil_points;
  /// Q'_i, where Bob completes the test of a return made at Q_i.
  std::vector<Event> receipt_points;
  /// Bob prepares this many ticks before the handoff at P.
  std::int64_t bob_lead = 1;
  /// Committer's processing time at P (non-ideal geometry only).
  std::int64_t processing_delay = 0;
  Geometry geometry = Geometry::Ideal;
  Transport transport = Transport::SecuredChannel;
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(directions.size()); }

  /// P at the origin, Q_0 = (reach, -reach), Q_1 = (reach, reach), each Q'_i
  /// `receipt_lag` ticks after Q_i at the same site.
  static SessionConfig ideal_1d(int d, std::int64_t reach, std::int64_t receipt_lag = 1,
                                std::uint64_t seed = 0);

  /// Q_i = point_on_ray(P, v_i, steps) for every direction of the set.
  static SessionConfig on_rays(int d, const spacetime::DirectionSet& dirs, std::int64_t steps,
                               std::int64_t receipt_lag = 1, Event p = {}, std::uint64_t seed = 0);
};

struct ValidationResult;
class ValidatedConfig;
ValidationResult validate_config(SessionConfig cfg);

/// A config that passed validate_config. Only validate_config creates one.
class ValidatedConfig {
 public:
  const SessionConfig& config() const { return cfg_; }
  int d() const { return cfg_.d; }
  int m() const { return cfg_.m(); }
  std::uint64_t seed() const { return cfg_.seed; }
  /// The session start after processing delay: where the committer acts at P.
  Event action_point() const;
  /// Same geometry, different seed.
  ValidatedConfig with_seed(std::uint64_t seed) const;

 private:
  explicit ValidatedConfig(SessionConfig cfg) : cfg_(std::move(cfg)) {}
  friend ValidationResult validate_config(SessionConfig cfg);
  SessionConfig cfg_;
};

struct ValidationResult {
  std::optional<ValidatedConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value(); }
};

/// Checks every geometric invariant and lists all violations.
ValidationResult validate_config(SessionConfig cfg);

/// validate_config, throwing ConfigError with all messages on failure.
ValidatedConfig validated(SessionConfig cfg);

enum class Actor { Bob, Alice };
enum class Visibility { Public, BobOnly, AliceOnly };
enum class Action {
  Prepare,
  Handoff,
  Operate,
  Measure,
  Relay,
  TeleportBroadcast,
  Correct,
  Return,
  Verify,
  NoShow,
  Abort,
};

std::string_view to_string(Actor a);
std::string_view to_string(Visibility v);
std::string_view to_string(Action a);

struct Record {
  Actor actor = Actor::Bob;
  Event at{};
  Action action = Action::Prepare;
  Visibility visibility = Visibility::Public;
  /// Where the carried object or signal was sent from, for messages.
  std::optional<Event> sent_from;
  int copy = 0;
  int point = -1;
  nlohmann::json payload;
  std::uint64_t seq = 0;
};

nlohmann::json to_json(const Record& r);

enum class Verdict { Pass, Fail, NoShow };
std::string_view to_string(Verdict v);

enum class SessionStatus { Completed, CausalityViolation };

struct RegionSample {
  std::string label;
  Event point{};
  bool committed = false;
};

/// Where Bob may consider the committer bound: outside the causal past of
/// every receipt point.
struct RegionSummary {
  std::vector<Event> receipt_points;
  std::vector<RegionSample> samples;
  bool committed(const Event& p) const;
};

RegionSummary committed_region_summary(const ValidatedConfig& cfg);

struct Transcript {
  int d = 0;
  int m = 0;
  int copies = 1;
  std::vector<Record> records;
  /// verdicts[copy][point].
  std::vector<std::vector<Verdict>> verdicts;
  SessionStatus status = SessionStatus::Completed;
  std::string abort_reason;
  RegionSummary region;

  Verdict verdict(int point, int copy = 0) const;
  nlohmann::json to_json() const;
};

/// Bob-visible records strictly before the earliest unveil point, serialized.
std::string bob_view_before_unveil(const Transcript& t);

/// True iff every message record is received in the causal future of (or
/// at) its send event and records are in transcript order.
bool causally_consistent(const Transcript& t);

class AliceLab;

/// What the committer holds after acting at P.
struct CommitPlan {
  /// The system the committer's agent at Q_i holds (or will collect there).
  std::vector<std::optional<SystemId>> at_point;
  std::vector<SystemId> retained;
};

struct UnveilOutput {
  SystemId system = 0;
  /// The issued label claimed for the returned qudit.
  int label = 0;
};

/// A committer strategy. Implementations must be immutable: evaluate() calls
/// them concurrently from several threads.
class AliceStrategy {
 public:
  virtual ~AliceStrategy() = default;
  virtual std::string name() const = 0;

  /// Acts at P on the handed-over system.
  virtual CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const = 0;

  /// The committer's agent at Q_i decides what to return. The default hands
  /// over whatever the plan put at this point.
  virtual std::optional<UnveilOutput> unveil(AliceLab& lab, const CommitPlan& plan, int point,
                                             int copy) const;
};

/// The committer's view of a session.
///
/// Every operation acts at the lab's current event on systems located there,
/// and every relay is checked against the light cone. Bob's issued states
/// and the global quantum state are not reachable through this interface.
class AliceLab {
 public:
  int d() const;
  int m() const;
  const Event& commit_point() const;
  std::span<const Event> unveil_points() const;
  std::span<const LightDirection> directions() const;
  Transport transport() const;
  Event now() const { return now_; }
  Rng& rng() { return *alice_; }

  SystemId prepare(const PureState& psi);
  void apply_unitary(SystemId s, const Matrix& u);
  std::vector<SystemId> apply_isometry(SystemId s, const Matrix& v, std::span<const int> out_dims);
  std::vector<SystemId> apply(SystemId s, const qudit::Isometry& v);
  SystemId combine(std::span<const SystemId> parts);
  /// Measures in the basis given by the columns of `basis` and discards the
  /// collapsed system.
  int measure(SystemId s, const Matrix& basis);

  /// Moves a system to `to`. Throws CausalityViolation unless `to` is in the
  /// causal future of (or at) the system's location.
  void relay(SystemId s, const Event& to);

  /// Honest transport towards Q_i: a secured channel along v_i, or
  /// teleportation through a pre-shared pair with the index broadcast at
  /// the current event. Returns the system that will sit at Q_i.
  SystemId route(SystemId s, int point);

  /// At Q_i: applies any pending teleportation correction (the broadcast
  /// must have arrived) and returns the system.
  SystemId collect(SystemId s);

  Event location(SystemId s) const;
  int dim(SystemId s) const;

  /// Committer-visible records in the causal past of now().
  std::vector<Record> past_view() const;

 private:
  friend class SessionEngine;
  AliceLab() = default;

  void require_here(SystemId s) const;
  void log(Action a, nlohmann::json payload, std::optional<Event> from = std::nullopt);

  const ValidatedConfig* cfg_ = nullptr;
  qudit::JointState* world_ = nullptr;
  std::vector<Record>* records_ = nullptr;
  std::uint64_t* seq_ = nullptr;
  Rng* alice_ = nullptr;
  Rng* nature_ = nullptr;
  int copy_ = 0;
  Event now_{};
  std::map<SystemId, Event> where_;
  struct Pending {
    qudit::WeylOperator correction;
    Event broadcast;
  };
  std::map<SystemId, Pending> pending_;
};

/// Decides whether the committer's agent at Q_i attempts an unveiling,
/// given only committer-visible records from the past cone of Q_i.
using UnveilPolicy = std::function<bool(int point, std::span<const Record> past)>;

UnveilPolicy unveil_everywhere();
UnveilPolicy unveil_only(int point);

enum class Leg { BobToP, PToQ, QToReceipt };

struct LegEffect {
  bool lost = false;
  /// Index of a Weyl error applied to the carried state.
  std::optional<int> error;
};

/// Channel model applied to the qudits Bob issues.
class TransmissionNoise {
 public:
  virtual ~TransmissionNoise() = default;
  virtual LegEffect transmit(Leg leg, int dim, Rng& channel) const = 0;
  /// Detector click at the receipt point.
  virtual bool detect(Rng& channel) const = 0;
};

/// One qudit, one copy.
Transcript run_session(const ValidatedConfig& cfg, const AliceStrategy& alice,
                       const UnveilPolicy& policy, const TransmissionNoise* noise = nullptr);

/// `copies` labelled qudits issued together at P. Copies are processed in
/// independent joint states, so strategies act on each copy separately.
Transcript run_labelled_session(const ValidatedConfig& cfg, const AliceStrategy& alice, int copies,
                                const UnveilPolicy& policy, const TransmissionNoise* noise = nullptr);

}  // namespace flyq::protocol
