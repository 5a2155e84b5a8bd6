#include "flyq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "flyq/errors.hpp"

namespace flyq::protocol {
namespace {

using spacetime::CausalRelation;
using spacetime::causal_order;

bool future_or_here(const Event& from, const Event& to) {
  const CausalRelation r = causal_order(from, to);
  return spacetime::is_future(r) || r == CausalRelation::Coincident;
}

nlohmann::json event_json(const Event& e) { return nlohmann::json::array({e.t, e.x, e.y, e.z}); }

// Ray step count k > 0 with q - p = k (den, n), or 0 when q is not on the ray.
std::int64_t ray_steps(const Event& p, const LightDirection& v, const Event& q) {
  const std::int64_t dt = q.t - p.t;
  if (dt <= 0 || dt % v.den() != 0) return 0;
  const std::int64_t k = dt / v.den();
  if (q.x - p.x != k * v.nx() || q.y - p.y != k * v.ny() || q.z - p.z != k * v.nz()) return 0;
  return k;
}

std::string point_name(const char* base, std::size_t i) { return std::string(base) + "_" + std::to_string(i); }

}  // namespace

std::string_view to_string(Geometry g) { return g == Geometry::Ideal ? "ideal" : "non-ideal"; }
std::string_view to_string(Transport t) {
  return t == Transport::SecuredChannel ? "secured-channel" : "teleport";
}

std::string_view to_string(Actor a) { return a == Actor::Bob ? "bob" : "alice"; }

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::Public: return "public";
    case Visibility::BobOnly: return "bob";
    case Visibility::AliceOnly: return "alice";
  }
  return "unknown";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Prepare: return "prepare";
    case Action::Handoff: return "handoff";
    case Action::Operate: return "operate";
    case Action::Measure: return "measure";
    case Action::Relay: return "relay";
    case Action::TeleportBroadcast: return "teleport-broadcast";
    case Action::Correct: return "correct";
    case Action::Return: return "return";
    case Action::Verify: return "verify";
    case Action::NoShow: return "no-show";
    case Action::Abort: return "abort";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NoShow: return "no-show";
  }
  return "unknown";
}

SessionConfig SessionConfig::ideal_1d(int d, std::int64_t reach, std::int64_t receipt_lag,
                                      std::uint64_t seed) {
  SessionConfig c;
  c.d = d;
  c.directions = {LightDirection::one_dimensional(0, -1), LightDirection::one_dimensional(1, +1)};
  c.unveil_points = {Event{reach, -reach, 0, 0}, Event{reach, reach, 0, 0}};
  c.receipt_points = {Event{reach + receipt_lag, -reach, 0, 0}, Event{reach + receipt_lag, reach, 0, 0}};
  c.seed = seed;
  return c;
}

SessionConfig SessionConfig::on_rays(int d, const spacetime::DirectionSet& dirs, std::int64_t steps,
                                     std::int64_t receipt_lag, Event p, std::uint64_t seed) {
  SessionConfig c;
  c.d = d;
  c.commit_point = p;
  c.directions = dirs.directions;
  for (const auto& v : dirs.directions) {
    const Event q = spacetime::point_on_ray(p, v, steps);
    c.unveil_points.push_back(q);
    c.receipt_points.push_back(Event{q.t + receipt_lag, q.x, q.y, q.z});
  }
  c.seed = seed;
  return c;
}

Event ValidatedConfig::action_point() const {
  const Event& p = cfg_.commit_point;
  return Event{p.t + cfg_.processing_delay, p.x, p.y, p.z};
}

ValidatedConfig ValidatedConfig::with_seed(std::uint64_t seed) const {
  SessionConfig c = cfg_;
  c.seed = seed;
  return ValidatedConfig(std::move(c));
}

ValidationResult validate_config(SessionConfig cfg) {
  ValidationResult out;
  auto& errors = out.errors;
  if (cfg.d < 2 || cfg.d > kMaxQuditDim) {
    errors.push_back("d = " + std::to_string(cfg.d) + " outside [2, " + std::to_string(kMaxQuditDim) + "]");
  }
  if (cfg.m() < 2) errors.push_back("need at least two directions");
  if (cfg.unveil_points.size() != cfg.directions.size() || cfg.receipt_points.size() != cfg.directions.size()) {
    errors.push_back("directions, unveil points and receipt points must have equal counts");
    return out;
  }
  if (cfg.bob_lead < 0) errors.push_back("bob_lead must be nonnegative");
  if (cfg.processing_delay < 0) errors.push_back("processing_delay must be nonnegative");
  if (cfg.geometry == Geometry::Ideal && cfg.processing_delay != 0) {
    errors.push_back("ideal geometry requires zero processing delay");
  }
  const std::size_t m = cfg.directions.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (cfg.directions[i].same_direction(cfg.directions[j])) {
        errors.push_back("directions " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
  const Event& p = cfg.commit_point;
  const Event start{p.t + std::max<std::int64_t>(0, cfg.processing_delay), p.x, p.y, p.z};
  try {
    for (std::size_t i = 0; i < m; ++i) {
      const Event& q = cfg.unveil_points[i];
      const std::string qn = point_name("Q", i);
      if (cfg.geometry == Geometry::Ideal) {
        if (ray_steps(p, cfg.directions[i], q) == 0) {
          errors.push_back(qn + " " + spacetime::to_string(q) + " is not on the light ray from P along v_" +
                           std::to_string(i));
        }
      } else {
        if (causal_order(p, q) != CausalRelation::TimelikeFuture || !future_or_here(start, q)) {
          errors.push_back(qn + " is not in the timelike future of P after the processing delay");
        }
        // The displacement must point closest to v_i.
        const long double sx = q.x - p.x, sy = q.y - p.y, sz = q.z - p.z;
        const long double norm = std::sqrt(sx * sx + sy * sy + sz * sz);
        if (norm == 0) {
          errors.push_back(qn + " has no spatial displacement from P");
        } else {
          std::size_t best = 0;
          long double best_cos = -2;
          for (std::size_t k = 0; k < m; ++k) {
            const auto& v = cfg.directions[k];
            const long double c = (sx * v.nx() + sy * v.ny() + sz * v.nz()) / (norm * v.den());
            if (c > best_cos) {
              best_cos = c;
              best = k;
            }
          }
          if (best != i) errors.push_back(qn + " lies closer to v_" + std::to_string(best) + " than to v_" + std::to_string(i));
        }
      }
      if (!future_or_here(q, cfg.receipt_points[i])) {
        errors.push_back(point_name("Q'", i) + " is not in the causal future of " + qn);
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const CausalRelation r = causal_order(cfg.unveil_points[i], cfg.unveil_points[j]);
        if (r != CausalRelation::Spacelike) {
          errors.push_back(point_name("Q", i) + " and " + point_name("Q", j) + " are " +
                           std::string(spacetime::to_string(r)) + ", not spacelike");
        }
      }
    }
  } catch (const ConfigError& e) {
    errors.push_back(e.what());
  }
  if (errors.empty()) out.config = ValidatedConfig(std::move(cfg));
  return out;
}

ValidatedConfig validated(SessionConfig cfg) {
  auto r = validate_config(std::move(cfg));
  if (!r.ok()) {
    std::string msg = "invalid session geometry:";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return *r.config;
}

nlohmann::json to_json(const Record& r) {
  nlohmann::json j{{"seq", r.seq},
                   {"actor", to_string(r.actor)},
                   {"at", event_json(r.at)},
                   {"action", to_string(r.action)},
                   {"visibility", to_string(r.visibility)},
                   {"copy", r.copy}};
  if (r.point >= 0) j["point"] = r.point;
  if (r.sent_from) j["sent_from"] = event_json(*r.sent_from);
  if (!r.payload.is_null()) j["payload"] = r.payload;
  return j;
}

bool RegionSummary::committed(const Event& p) const { return spacetime::committed_at(p, receipt_points); }

RegionSummary committed_region_summary(const ValidatedConfig& cfg) {
  const SessionConfig& c = cfg.config();
  RegionSummary r;
  r.receipt_points = c.receipt_points;
  auto add = [&](std::string label, const Event& e) {
    r.samples.push_back(RegionSample{std::move(label), e, r.committed(e)});
  };
  add("P", c.commit_point);
  for (std::size_t i = 0; i < c.unveil_points.size(); ++i) add(point_name("Q", i), c.unveil_points[i]);
  for (std::size_t i = 0; i < c.receipt_points.size(); ++i) add(point_name("Q'", i), c.receipt_points[i]);
  return r;
}

Verdict Transcript::verdict(int point, int copy) const {
  return verdicts.at(static_cast<std::size_t>(copy)).at(static_cast<std::size_t>(point));
}

nlohmann::json Transcript::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) recs.push_back(protocol::to_json(r));
  nlohmann::json v = nlohmann::json::array();
  for (const auto& row : verdicts) {
    nlohmann::json jr = nlohmann::json::array();
    for (Verdict x : row) jr.push_back(to_string(x));
    v.push_back(std::move(jr));
  }
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : region.samples) {
    samples.push_back({{"label", s.label}, {"point", event_json(s.point)}, {"committed", s.committed}});
  }
  nlohmann::json receipts = nlohmann::json::array();
  for (const auto& e : region.receipt_points) receipts.push_back(event_json(e));
  nlohmann::json j{{"d", d},
                   {"m", m},
                   {"copies", copies},
                   {"status", status == SessionStatus::Completed ? "completed" : "causality-violation"},
                   {"records", std::move(recs)},
                   {"verdicts", std::move(v)},
                   {"committed_region", {{"receipt_points", std::move(receipts)}, {"samples", std::move(samples)}}}};
  if (!abort_reason.empty()) j["abort_reason"] = abort_reason;
  return j;
}

std::string bob_view_before_unveil(const Transcript& t) {
  // Cut at the earliest Q_i, taken from the region samples.
  std::int64_t cut = std::numeric_limits<std::int64_t>::max();
  for (const auto& s : t.region.samples) {
    if (s.label.starts_with("Q_")) cut = std::min(cut, s.point.t);
  }
  nlohmann::json view = nlohmann::json::array();
  for (const auto& r : t.records) {
    if (r.visibility == Visibility::AliceOnly || r.at.t >= cut) continue;
    view.push_back(to_json(r));
  }
  return view.dump();
}

bool causally_consistent(const Transcript& t) {
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const Record& r = t.records[i];
    if (r.sent_from && !future_or_here(*r.sent_from, r.at)) return false;
    if (i > 0) {
      const Record& p = t.records[i - 1];
      if (std::tie(p.at.t, p.actor, p.seq) > std::tie(r.at.t, r.actor, r.seq)) return false;
    }
  }
  return true;
}

std::optional<UnveilOutput> AliceStrategy::unveil(AliceLab& lab, const CommitPlan& plan, int point,
                                                  int copy) const {
  const auto i = static_cast<std::size_t>(point);
  if (i >= plan.at_point.size() || !plan.at_point[i]) return std::nullopt;
  return UnveilOutput{lab.collect(*plan.at_point[i]), copy};
}

int AliceLab::d() const { return cfg_->d(); }
int AliceLab::m() const { return cfg_->m(); }
const Event& AliceLab::commit_point() const { return cfg_->config().commit_point; }
std::span<const Event> AliceLab::unveil_points() const { return cfg_->config().unveil_points; }
std::span<const LightDirection> AliceLab::directions() const { return cfg_->config().directions; }
Transport AliceLab::transport() const { return cfg_->config().transport; }

void AliceLab::log(Action a, nlohmann::json payload, std::optional<Event> from) {
  records_->push_back(Record{Actor::Alice, now_, a, Visibility::AliceOnly, from, copy_, -1,
                             std::move(payload), (*seq_)++});
}

void AliceLab::require_here(SystemId s) const {
  const auto it = where_.find(s);
  if (it == where_.end()) throw std::invalid_argument("system " + std::to_string(s) + " is not held by the committer");
  if (it->second != now_) {
    throw CausalityViolation("system " + std::to_string(s) + " is at " + spacetime::to_string(it->second) +
                             ", not at the acting event " + spacetime::to_string(now_));
  }
}

Event AliceLab::location(SystemId s) const {
  const auto it = where_.find(s);
  if (it == where_.end()) throw std::invalid_argument("system " + std::to_string(s) + " is not held by the committer");
  return it->second;
}

int AliceLab::dim(SystemId s) const { return world_->dim(s); }

SystemId AliceLab::prepare(const PureState& psi) {
  const SystemId id = world_->add(psi);
  where_[id] = now_;
  log(Action::Operate, {{"op", "prepare"}, {"system", id}, {"dim", psi.dim()}});
  return id;
}

void AliceLab::apply_unitary(SystemId s, const Matrix& u) {
  require_here(s);
  world_->apply_unitary(s, u);
  log(Action::Operate, {{"op", "unitary"}, {"system", s}});
}

std::vector<SystemId> AliceLab::apply_isometry(SystemId s, const Matrix& v, std::span<const int> out_dims) {
  return apply(s, qudit::Isometry::make(v, std::vector<int>(out_dims.begin(), out_dims.end())));
}

std::vector<SystemId> AliceLab::apply(SystemId s, const qudit::Isometry& v) {
  require_here(s);
  auto ids = world_->apply(s, v);
  where_.erase(s);
  for (SystemId id : ids) where_[id] = now_;
  log(Action::Operate, {{"op", "isometry"}, {"system", s}, {"outputs", ids}});
  return ids;
}

SystemId AliceLab::combine(std::span<const SystemId> parts) {
  for (SystemId s : parts) require_here(s);
  const SystemId id = world_->combine(parts);
  for (SystemId s : parts) where_.erase(s);
  where_[id] = now_;
  log(Action::Operate, {{"op", "combine"}, {"parts", std::vector<SystemId>(parts.begin(), parts.end())}, {"system", id}});
  return id;
}

int AliceLab::measure(SystemId s, const Matrix& basis) {
  require_here(s);
  const int k = world_->measure(s, basis, uniform01(*nature_));
  world_->remove(s);
  where_.erase(s);
  log(Action::Measure, {{"system", s}, {"outcome", k}});
  return k;
}

void AliceLab::relay(SystemId s, const Event& to) {
  const Event from = location(s);
  if (from == to) return;
  if (!future_or_here(from, to)) {
    throw CausalityViolation("relay of system " + std::to_string(s) + " from " + spacetime::to_string(from) +
                             " to " + spacetime::to_string(to) + " leaves the future light cone");
  }
  where_[s] = to;
  records_->push_back(Record{Actor::Alice, to, Action::Relay, Visibility::AliceOnly, from, copy_, -1,
                             {{"system", s}}, (*seq_)++});
}

SystemId AliceLab::route(SystemId s, int point) {
  require_here(s);
  if (point < 0 || point >= m()) throw std::invalid_argument("route: point index out of range");
  const Event& q = cfg_->config().unveil_points[static_cast<std::size_t>(point)];
  if (transport() == Transport::SecuredChannel) {
    relay(s, q);
    return s;
  }
  const int k = world_->dim(s);
  const auto res = qudit::TeleportResource::make(k, now_, q);
  const SystemId pair = world_->add(PureState(res.pair));
  const int halves[2] = {k, k};
  const auto ends = world_->apply_isometry(pair, Matrix::Identity(k * k, k * k), halves);
  const int j = world_->bell_measure_discard(s, ends[0], uniform01(*nature_));
  where_.erase(s);
  where_[ends[1]] = q;  // the target half was sent to Q_i in advance
  pending_.insert_or_assign(ends[1], Pending{qudit::weyl(k, j), now_});
  records_->push_back(Record{Actor::Alice, now_, Action::TeleportBroadcast, Visibility::Public, now_, copy_, -1,
                             {{"index", j}}, (*seq_)++});
  return ends[1];
}

SystemId AliceLab::collect(SystemId s) {
  const auto it = pending_.find(s);
  if (it == pending_.end()) return s;
  if (!future_or_here(it->second.broadcast, now_)) {
    throw CausalityViolation("teleportation correction at " + spacetime::to_string(now_) +
                             " before the index broadcast arrives");
  }
  require_here(s);
  world_->apply_weyl_inverse(s, it->second.correction);
  log(Action::Correct, {{"system", s}, {"index", it->second.correction.index()}}, it->second.broadcast);
  pending_.erase(it);
  return s;
}

std::vector<Record> AliceLab::past_view() const {
  std::vector<Record> out;
  for (const auto& r : *records_) {
    if (r.visibility == Visibility::BobOnly) continue;
    if (future_or_here(r.at, now_)) out.push_back(r);
  }
  return out;
}

UnveilPolicy unveil_everywhere() {
  return [](int, std::span<const Record>) { return true; };
}

UnveilPolicy unveil_only(int point) {
  return [point](int i, std::span<const Record>) { return i == point; };
}

class SessionEngine {
 public:
  SessionEngine(const ValidatedConfig& cfg, const AliceStrategy& alice, int copies, const UnveilPolicy& policy,
                const TransmissionNoise* noise)
      : cfg_(cfg), alice_(alice), copies_(copies), policy_(policy), noise_(noise),
        streams_(SessionStreams::derive(cfg.seed())), acting_(cfg.action_point()) {}

  Transcript run();

 private:
  struct Copy {
    qudit::JointState world;
    AliceLab lab;
    CommitPlan plan;
    std::optional<PureState> issued;
  };

  void bob(Event at, Action a, Visibility v, std::optional<Event> from, int copy, int point, nlohmann::json payload) {
    records_.push_back(Record{Actor::Bob, at, a, v, from, copy, point, std::move(payload), seq_++});
  }
  bool apply_leg(Copy& c, SystemId s, Leg leg);
  Verdict test(Copy& c, SystemId s, const PureState& expected);
  void unveil_at(int point);

  const ValidatedConfig& cfg_;
  const AliceStrategy& alice_;
  int copies_;
  const UnveilPolicy& policy_;
  const TransmissionNoise* noise_;
  SessionStreams streams_;
  std::vector<std::unique_ptr<Copy>> state_;
  std::vector<Record> records_;
  std::uint64_t seq_ = 0;
  std::vector<std::vector<Verdict>> verdicts_;
  Event acting_{};
};

bool SessionEngine::apply_leg(Copy& c, SystemId s, Leg leg) {
  if (noise_ == nullptr) return true;
  const LegEffect e = noise_->transmit(leg, c.world.dim(s), streams_.channel);
  if (e.lost) return false;
  if (e.error) c.world.apply_weyl(s, qudit::weyl(c.world.dim(s), *e.error));
  return true;
}

Verdict SessionEngine::test(Copy& c, SystemId s, const PureState& expected) {
  const int d = cfg_.d();
  const int k = c.world.dim(s);
  if (k == d + 1) {
    // Vacuum-extended carrier: the extra level means nothing was sent.
    qudit::Vector vac = qudit::Vector::Zero(k);
    vac(d) = 1.0;
    if (c.world.project(s, vac, uniform01(streams_.nature))) return Verdict::NoShow;
    qudit::Vector target = qudit::Vector::Zero(k);
    target.head(d) = expected.amplitudes();
    return c.world.project(s, target, uniform01(streams_.nature)) ? Verdict::Pass : Verdict::Fail;
  }
  if (k != d) return Verdict::Fail;
  return c.world.project(s, expected.amplitudes(), uniform01(streams_.nature)) ? Verdict::Pass : Verdict::Fail;
}

void SessionEngine::unveil_at(int point) {
  const auto pi = static_cast<std::size_t>(point);
  const Event q = cfg_.config().unveil_points[pi];
  const Event receipt = cfg_.config().receipt_points[pi];
  for (int ci = 0; ci < copies_; ++ci) {
    Copy& c = *state_[static_cast<std::size_t>(ci)];
    c.lab.now_ = acting_ = q;
    std::optional<UnveilOutput> out;
    const auto past = c.lab.past_view();
    if (policy_(point, past)) out = alice_.unveil(c.lab, c.plan, point, ci);
    if (!out) {
      bob(receipt, Action::NoShow, Visibility::BobOnly, std::nullopt, ci, point, {{"label", ci}});
      continue;
    }
    c.lab.relay(out->system, q);
    records_.push_back(Record{Actor::Alice, q, Action::Return, Visibility::Public, q, ci, point,
                              {{"label", out->label}}, seq_++});
    c.lab.where_.erase(out->system);
    c.lab.pending_.erase(out->system);

    const bool valid = out->label >= 0 && out->label < copies_ &&
                       verdicts_[static_cast<std::size_t>(out->label)][pi] == Verdict::NoShow;
    const int slot = valid ? out->label : ci;
    Verdict v = Verdict::NoShow;
    if (!apply_leg(c, out->system, Leg::PToQ) || !apply_leg(c, out->system, Leg::QToReceipt) ||
        (noise_ != nullptr && !noise_->detect(streams_.channel))) {
      v = Verdict::NoShow;
    } else if (!valid) {
      v = Verdict::Fail;
    } else {
      v = test(c, out->system, *state_[static_cast<std::size_t>(slot)]->issued);
    }
    auto& cell = verdicts_[static_cast<std::size_t>(slot)][pi];
    if (cell == Verdict::NoShow) cell = v;
    bob(receipt, v == Verdict::NoShow ? Action::NoShow : Action::Verify, Visibility::BobOnly, q, slot, point,
        {{"label", out->label}, {"verdict", to_string(v)}});
  }
}

Transcript SessionEngine::run() {
  const SessionConfig& c = cfg_.config();
  const int d = cfg_.d();
  Transcript t;
  t.d = d;
  t.m = cfg_.m();
  t.copies = copies_;
  t.region = committed_region_summary(cfg_);
  verdicts_.assign(static_cast<std::size_t>(copies_), std::vector<Verdict>(static_cast<std::size_t>(t.m), Verdict::NoShow));

  const Event& p = c.commit_point;
  const Event prep{p.t - c.bob_lead, p.x, p.y, p.z};
  for (int ci = 0; ci < copies_; ++ci) {
    auto cp = std::make_unique<Copy>();
    cp->issued = qudit::haar_random_state(d, streams_.bob);
    cp->lab.cfg_ = &cfg_;
    cp->lab.world_ = &cp->world;
    cp->lab.records_ = &records_;
    cp->lab.seq_ = &seq_;
    cp->lab.alice_ = &streams_.alice;
    cp->lab.nature_ = &streams_.nature;
    cp->lab.copy_ = ci;
    bob(prep, Action::Prepare, Visibility::BobOnly, std::nullopt, ci, -1,
        {{"label", ci}, {"state", qudit::to_json(*cp->issued)}});
    bob(p, Action::Handoff, Visibility::Public, prep, ci, -1, {{"label", ci}});
    state_.push_back(std::move(cp));
  }

  try {
    for (int ci = 0; ci < copies_; ++ci) {
      Copy& cp = *state_[static_cast<std::size_t>(ci)];
      const SystemId incoming = cp.world.add(*cp.issued);
      if (!apply_leg(cp, incoming, Leg::BobToP)) continue;
      cp.lab.where_[incoming] = cfg_.action_point();
      cp.lab.now_ = acting_ = cfg_.action_point();
      cp.plan = alice_.commit(cp.lab, incoming, ci);
    }
    std::vector<int> order(static_cast<std::size_t>(t.m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return c.unveil_points[static_cast<std::size_t>(a)].t < c.unveil_points[static_cast<std::size_t>(b)].t;
    });
    for (int i : order) unveil_at(i);
  } catch (const CausalityViolation& e) {
    t.status = SessionStatus::CausalityViolation;
    t.abort_reason = e.what();
    records_.push_back(Record{Actor::Alice, acting_, Action::Abort, Visibility::Public, std::nullopt, 0, -1,
                              {{"reason", t.abort_reason}}, seq_++});
  }

  std::stable_sort(records_.begin(), records_.end(), [](const Record& a, const Record& b) {
    return std::tie(a.at.t, a.actor, a.seq) < std::tie(b.at.t, b.actor, b.seq);
  });
  t.records = std::move(records_);
  t.verdicts = std::move(verdicts_);
  return t;
}

Transcript run_session(const ValidatedConfig& cfg, const AliceStrategy& alice, const UnveilPolicy& policy,
                       const TransmissionNoise* noise) {
  return run_labelled_session(cfg, alice, 1, policy, noise);
}

Transcript run_labelled_session(const ValidatedConfig& cfg, const AliceStrategy& alice, int copies,
                                const UnveilPolicy& policy, const TransmissionNoise* noise) {
  if (copies < 1) throw std::invalid_argument("need at least one copy");
  SessionEngine engine(cfg, alice, copies, policy, noise);
  return engine.run();
}

}  // namespace flyq::protocol
