#include "flyq/chaining.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

#include "flyq/errors.hpp"

namespace flyq::chaining {

namespace {

constexpr int kMaxLevelSize = 4096;
constexpr long long kMaxSessions = 20000;

int uniform_int(Rng& rng, int n) {
  std::uniform_int_distribution<int> dist(0, n - 1);
  return dist(rng);
}

double level_bound(int d, int m) { return 1.0 + 2.0 * (m - 1) / (d + 1.0); }

struct Builder {
  const ChainConfig& cfg;
  const std::vector<LevelParams>& levels;
  std::vector<std::vector<spacetime::LightDirection>> dirs;
  ChainTamper tamper;
  SessionStreams streams;
  std::vector<ChainSession> out;

  int build(int level, int parent, int parent_point, const Event& at, int value, bool real) {
    const LevelParams& lp = levels[level];
    const int id = static_cast<int>(out.size());
    {
      ChainSession s;
      s.id = id;
      s.level = level;
      s.parent = parent;
      s.parent_point = parent_point;
      s.commit_point = at;
      s.d = lp.d;
      s.m = lp.m;
      s.directions = dirs[level];
      for (const auto& v : s.directions) {
        Event q = spacetime::point_on_ray(at, v, spacetime::steps_for_duration(v, cfg.interval));
        s.unveil_points.push_back(q);
        s.receipt_points.push_back(Event{q.t + cfg.receipt_lag, q.x, q.y, q.z});
      }
      s.value = value;
      s.real = real;
      s.mask.assign(lp.m, std::nullopt);
      s.issued = qudit::haar_random_state(lp.d, streams.bob);
      s.returned.assign(lp.m, std::nullopt);
      s.children.assign(lp.m, -1);
      out.push_back(std::move(s));
    }

    const bool final_level = level + 1 == static_cast<int>(levels.size());
    if (final_level) {
      // Held for the unveiling, which hands it back unmasked.
      if (real) out[id].returned[value] = out[id].issued;
      return id;
    }

    const int child_m = levels[level + 1].m;
    for (int i = 0; i < lp.m; ++i) {
      int child_value = 0;
      bool child_real = false;
      if (real && i == value) {
        const int j = uniform_int(streams.alice, lp.d * lp.d);
        out[id].mask[i] = j;
        out[id].returned[i] = qudit::weyl(lp.d, j).apply(out[id].issued);
        child_value = tamper.level == level + 1 ? (j + 1) % child_m : j;
        child_real = true;
      } else {
        out[id].returned[i] = qudit::haar_random_state(lp.d, streams.alice);
        child_value = uniform_int(streams.alice, child_m);
      }
      const Event q = out[id].unveil_points[i];
      const int child = build(level + 1, id, i, q, child_value, child_real);
      out[id].children[i] = child;
    }
    return id;
  }
};

nlohmann::json event_json(const Event& e) { return {e.t, e.x, e.y, e.z}; }

}  // namespace

std::string_view to_string(LevelSizing s) {
  return s == LevelSizing::Secure ? "secure" : "compact";
}

std::vector<LevelParams> chain_levels(int depth, int d0, LevelSizing sizing) {
  if (depth < 1) throw ConfigError("chain depth must be at least 1");
  if (d0 < 2) throw ConfigError("chain base dimension must be at least 2");
  std::vector<LevelParams> levels;
  levels.push_back({0, d0, 2, level_bound(d0, 2)});
  long long sessions = 1;
  long long here = 1;
  for (int k = 0; k < depth; ++k) {
    const long long prev_d = levels.back().d;
    const long long m = prev_d * prev_d;
    const long long d = sizing == LevelSizing::Secure ? 4 * m : m;
    if (m > kMaxLevelSize || d > kMaxLevelSize) {
      throw CapExceeded("chain level " + std::to_string(k + 1) + " needs d = " + std::to_string(d) +
                        ", m = " + std::to_string(m) + " (cap " + std::to_string(kMaxLevelSize) + ")");
    }
    here *= levels.back().m;
    sessions += here;
    if (sessions > kMaxSessions) {
      throw CapExceeded("chain needs " + std::to_string(sessions) + " sessions (cap " +
                        std::to_string(kMaxSessions) + ")");
    }
    levels.push_back({k + 1, static_cast<int>(d), static_cast<int>(m), level_bound(static_cast<int>(d),
                                                                                   static_cast<int>(m))});
  }
  return levels;
}

Chain chain_commit(int bit, const ChainConfig& cfg, ChainTamper tamper) {
  if (bit != 0 && bit != 1) throw ConfigError("committed bit must be 0 or 1");
  if (cfg.interval <= 0) throw ConfigError("chain interval must be positive");
  if (cfg.receipt_lag < 0) throw ConfigError("receipt lag must be nonnegative");
  auto levels = chain_levels(cfg.depth, cfg.d0, cfg.sizing);
  if (tamper.level == 0 || tamper.level > cfg.depth) {
    throw ConfigError("tamper level must lie in [1, depth]");
  }

  Builder b{cfg, levels, {}, tamper, SessionStreams::derive(cfg.seed), {}};
  b.dirs.push_back({spacetime::LightDirection::one_dimensional(0, -1),
                    spacetime::LightDirection::one_dimensional(1, +1)});
  // Later levels move orthogonally to the first, so the final point is
  // strictly timelike from P.
  for (std::size_t k = 1; k < levels.size(); ++k) {
    b.dirs.push_back(
        spacetime::generate_directions(levels[k].m, spacetime::DirectionMode::Planar, spacetime::Plane::YZ)
            .directions);
  }
  b.build(0, -1, -1, cfg.commit_point, bit, true);

  Chain chain;
  chain.config = cfg;
  chain.levels = std::move(levels);
  chain.sessions = std::move(b.out);
  chain.bit = bit;
  return chain;
}

bool causally_consistent(const Chain& chain) {
  for (const auto& s : chain.sessions) {
    if (s.parent >= 0) {
      const auto& p = chain.sessions[s.parent];
      if (p.unveil_points[s.parent_point] != s.commit_point) return false;
      if (p.children[s.parent_point] != s.id) return false;
    } else if (s.commit_point != chain.config.commit_point) {
      return false;
    }
    for (int i = 0; i < s.m; ++i) {
      if (!is_future(spacetime::causal_order(s.commit_point, s.unveil_points[i]))) return false;
      const auto rel = spacetime::causal_order(s.unveil_points[i], s.receipt_points[i]);
      if (!is_future(rel) && rel != spacetime::CausalRelation::Coincident) return false;
    }
  }
  return true;
}

std::optional<int> final_session(const Chain& chain) {
  const int last = static_cast<int>(chain.levels.size()) - 1;
  for (const auto& s : chain.sessions) {
    if (s.level != last) continue;
    if (std::any_of(s.returned.begin(), s.returned.end(), [](const auto& r) { return r.has_value(); })) {
      return s.id;
    }
  }
  return std::nullopt;
}

Verdict test_return(const ChainSession& s, int point, std::optional<int> unmask, Rng& nature) {
  if (point < 0 || point >= s.m) throw std::out_of_range("branch point index out of range");
  const auto& r = s.returned[point];
  if (!r) return Verdict::NoShow;
  const PureState state = unmask ? qudit::weyl(s.d, *unmask).apply_inverse(*r) : *r;
  return qudit::projective_verify(s.issued, state, nature) == qudit::TestOutcome::Pass ? Verdict::Pass
                                                                                     : Verdict::Fail;
}

ChainVerdict unveil_chain(const Chain& chain, Rng& nature) {
  const int depth = static_cast<int>(chain.levels.size()) - 1;
  ChainVerdict v;
  v.levels.assign(depth + 1, Verdict::NoShow);
  const auto fin = final_session(chain);
  if (!fin) {
    v.failing_level = depth;
    v.decision_point = chain.config.commit_point;
    return v;
  }

  const ChainSession* cur = &chain.sessions[*fin];
  int j = static_cast<int>(std::find_if(cur->returned.begin(), cur->returned.end(),
                                        [](const auto& r) { return r.has_value(); }) -
                           cur->returned.begin());
  const Event site = cur->receipt_points[j];
  std::vector<Event> path{site};
  v.levels[depth] = test_return(*cur, j, std::nullopt, nature);

  // The value committed one level up names the Weyl mask to undo below it.
  for (int k = depth - 1; k >= 0; --k) {
    const ChainSession& parent = chain.sessions[cur->parent];
    const int b = cur->parent_point;
    v.levels[k] = test_return(parent, b, j, nature);
    path.push_back(parent.receipt_points[b]);
    j = b;
    cur = &parent;
  }
  v.bit = j;
  for (int k = depth; k >= 0; --k) {
    if (v.levels[k] != Verdict::Pass) {
      v.failing_level = k;
      break;
    }
  }
  v.all_pass = !v.failing_level.has_value();
  v.decision_point = spacetime::earliest_at_site(site, path);
  return v;
}

nlohmann::json Chain::to_json(bool with_states) const {
  nlohmann::json levels_json = nlohmann::json::array();
  for (const auto& lp : levels) {
    levels_json.push_back({{"level", lp.level}, {"d", lp.d}, {"m", lp.m}, {"bound", lp.bound},
                           {"sessions", nlohmann::json::array()}});
  }
  for (const auto& s : sessions) {
    nlohmann::json points = nlohmann::json::array();
    for (int i = 0; i < s.m; ++i) {
      nlohmann::json p{{"unveil", event_json(s.unveil_points[i])},
                       {"receipt", event_json(s.receipt_points[i])},
                       {"returned", s.returned[i].has_value()},
                       {"child", s.children[i]}};
      if (s.mask[i]) p["mask"] = *s.mask[i];
      if (with_states && s.returned[i]) p["state"] = qudit::to_json(*s.returned[i]);
      points.push_back(std::move(p));
    }
    nlohmann::json js{{"id", s.id},
                      {"parent", s.parent},
                      {"parent_point", s.parent_point},
                      {"commit_point", event_json(s.commit_point)},
                      {"committer", {{"value", s.value}, {"real", s.real}}},
                      {"points", std::move(points)}};
    if (with_states) js["issued"] = qudit::to_json(s.issued);
    levels_json[s.level]["sessions"].push_back(std::move(js));
  }
  return {{"bit", bit},
          {"depth", config.depth},
          {"sizing", std::string(to_string(config.sizing))},
          {"interval", config.interval},
          {"levels", std::move(levels_json)}};
}

// ---------------------------------------------------------------------------

std::string_view to_string(FinalVerdict v) {
  switch (v) {
    case FinalVerdict::Accepted: return "accepted";
    case FinalVerdict::CheatDetected: return "cheat-detected";
    case FinalVerdict::Incomplete: return "incomplete";
  }
  return "?";
}

DualCommitment dual_commit(int bit, const protocol::ValidatedConfig& cfg, DualStrategy strategy,
                           SessionStreams& streams) {
  if (bit != 0 && bit != 1) throw ConfigError("committed bit must be 0 or 1");
  const auto& c = cfg.config();
  if (c.m() != 2 || !c.directions[0].is_one_dimensional() || !c.directions[1].is_one_dimensional()) {
    throw ConfigError("the two-state encoding needs a 1D config with two rays");
  }
  DualCommitment out{cfg, bit, strategy, qudit::haar_random_state(cfg.d(), streams.bob),
                     qudit::haar_random_state(cfg.d(), streams.bob), {{}, {}}};
  if (strategy == DualStrategy::Honest) {
    out.held[bit].push_back(0);
    out.held[1 - bit].push_back(1);
  } else {
    out.held[0] = {0, 1};
  }
  return out;
}

DualVerdict dual_unveil(const DualCommitment& c, int point, int claim, bool return_opposite,
                        SessionStreams& streams) {
  if (point != 0 && point != 1) throw ConfigError("unveil point must be 0 or 1");
  if (claim != 0 && claim != 1) throw ConfigError("claimed bit must be 0 or 1");
  const auto& cfg = c.cfg.config();

  // Claiming b at Q_p means rho_0 is on L_p iff p == b, and rho_1 is on the other line.
  auto unveil_at = [&](int p) {
    const int which = p == claim ? 0 : 1;
    const PureState& expected = which == 0 ? c.rho0 : c.rho1;
    const auto& here = c.held[p];
    const bool have = std::find(here.begin(), here.end(), which) != here.end();
    const PureState returned = have ? expected : qudit::haar_random_state(cfg.d, streams.alice);
    return qudit::projective_verify(expected, returned, streams.nature) == qudit::TestOutcome::Pass
               ? Verdict::Pass
               : Verdict::Fail;
  };

  DualVerdict v;
  v.point = point;
  v.claim = claim;
  v.provisional = unveil_at(point);
  v.provisional_at = cfg.receipt_points[point];
  v.final_at = spacetime::earliest_common_future(cfg.receipt_points[0], cfg.receipt_points[1]);
  if (return_opposite) v.opposite = unveil_at(1 - point);

  if (v.provisional == Verdict::Fail || (v.opposite && *v.opposite == Verdict::Fail)) {
    v.final = FinalVerdict::CheatDetected;
  } else if (!v.opposite) {
    v.final = FinalVerdict::Incomplete;
  } else {
    v.final = FinalVerdict::Accepted;
  }
  return v;
}

nlohmann::json to_json(const DualVerdict& v) {
  nlohmann::json j{{"point", v.point},
                   {"claim", v.claim},
                   {"provisional", std::string(protocol::to_string(v.provisional))},
                   {"provisional_at", event_json(v.provisional_at)},
                   {"final", std::string(to_string(v.final))},
                   {"final_at", event_json(v.final_at)}};
  j["opposite"] = v.opposite ? nlohmann::json(std::string(protocol::to_string(*v.opposite))) : nlohmann::json();
  return j;
}

}  // namespace flyq::chaining
