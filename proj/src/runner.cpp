#include "flyq/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <thread>

#include "flyq/chaining.hpp"
#include "flyq/errors.hpp"

namespace flyq::cli {

namespace {

using protocol::SessionConfig;
using spacetime::Event;
using spacetime::LightDirection;

constexpr std::size_t kChunk = 64;

unsigned resolve_threads(unsigned threads) {
  return threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
}

/// Runs body(begin, end, tally) over fixed chunks of [0, n) and returns the
/// tallies in chunk order, so merging does not depend on scheduling.
template <class Tally>
std::vector<Tally> chunked(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t, Tally&)>& body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Tally> out(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::size_t c = next++; c < chunks && !failed; c = next++) {
        body(c * kChunk, std::min(n, (c + 1) * kChunk), out[c]);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  const unsigned k = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(chunks, 1)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double rate_radius(double p, std::size_t n) {
  return n == 0 ? 0.0 : 3.0 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

Metric rate(std::string name, std::size_t hits, std::size_t n) {
  const double p = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
  return {std::move(name), p, rate_radius(p, n)};
}

std::uint64_t seed_of(const Scenario& s) { return static_cast<std::uint64_t>(s.seed); }

std::size_t trials_of(const Scenario& s) {
  if (s.trials <= 0) throw ConfigError("trials must be positive for mode " + std::string(to_string(s.mode)));
  return static_cast<std::size_t>(s.trials);
}

std::vector<std::pair<std::string, std::string>> base_params(const Scenario& s) {
  return {{"mode", std::string(to_string(s.mode))},
          {"d", std::to_string(s.quantum.d)},
          {"m", std::to_string(s.quantum.m)},
          {"trials", std::to_string(s.trials)},
          {"seed", std::to_string(s.seed)}};
}

protocol::UnveilPolicy policy_of(const Scenario& s) {
  const auto& at = s.adversary.unveil_at;
  if (at.empty()) return protocol::unveil_everywhere();
  return [at](int point, std::span<const protocol::Record>) {
    return std::find(at.begin(), at.end(), point) != at.end();
  };
}

// --- modes -----------------------------------------------------------------

void run_scored(const Scenario& s, unsigned threads, RunResult& out) {
  const auto cfg = build_config(s);
  const auto alice = adversary::make_strategy(s.adversary.strategy, cfg.d(), cfg.m(), strategy_params(s));
  const auto score = adversary::evaluate(*alice, cfg, trials_of(s), seed_of(s), threads);

  ResultRow row{s.name, base_params(s), {}, 0.0};
  row.params.emplace_back("strategy", alice->name());
  row.params.emplace_back("transport", s.geometry.transport);
  // Undefined once any session aborted.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool ok = score.defined();
  for (int i = 0; i < cfg.m(); ++i) {
    row.metrics.push_back({"p_" + std::to_string(i), ok ? score.p[i] : nan, ok ? score.radius[i] : nan});
  }
  row.metrics.push_back({"sum", ok ? score.sum : nan, ok ? score.sum_radius : nan});
  row.metrics.push_back({"joint", ok ? score.joint : nan, ok ? score.joint_radius : nan});
  row.metrics.push_back({"bound", score.bound, std::nullopt});
  row.metrics.push_back({"gap", ok ? score.gap : nan, ok ? score.sum_radius : nan});
  row.metrics.push_back({"wiggle", score.bound - 1.0, std::nullopt});
  row.metrics.push_back({"completed", static_cast<double>(score.completed), std::nullopt});
  row.metrics.push_back({"aborted", static_cast<double>(score.aborted), std::nullopt});
  out.rows.push_back(std::move(row));

  if (score.aborted > 0) out.causality_violation = true;
  if (score.defined() && score.sum - score.sum_radius > score.bound + 1e-9) out.bound_violation = true;

  const auto t0 = protocol::run_session(cfg.with_seed(derive_seed(seed_of(s), "trial", 0)), *alice, policy_of(s));
  out.archive.push_back({{"scenario", s.name}, {"transcript", t0.to_json()}});
}

void run_redundant(const Scenario& s, unsigned threads, RunResult& out) {
  const auto cfg = build_config(s);
  const auto alice = adversary::make_strategy(s.adversary.strategy, cfg.d(), cfg.m(), strategy_params(s));
  const auto noise = build_noise(s);
  const robustness::RedundancyParams params{s.redundancy.copies, s.redundancy.threshold, cfg.d()};
  params.validate();
  const auto policy = policy_of(s);
  const std::size_t n = trials_of(s);
  const int m = cfg.m();

  struct Tally {
    std::vector<std::size_t> accepted;
    std::vector<std::size_t> passes;
    std::size_t all = 0;
    std::size_t aborted = 0;
  };
  const auto tallies = chunked<Tally>(n, threads, [&](std::size_t b, std::size_t e, Tally& t) {
    t.accepted.assign(m, 0);
    t.passes.assign(m, 0);
    for (std::size_t i = b; i < e; ++i) {
      const auto r = robustness::run_redundant_session(cfg.with_seed(derive_seed(seed_of(s), "trial", i)), params,
                                                       noise, *alice, policy);
      if (r.transcript.status != protocol::SessionStatus::Completed) {
        ++t.aborted;
        continue;
      }
      bool every = true;
      for (int k = 0; k < m; ++k) {
        t.accepted[k] += r.accepted[k];
        t.passes[k] += static_cast<std::size_t>(r.passes[k]);
        every = every && r.accepted[k];
      }
      t.all += every;
    }
  });
  Tally total{std::vector<std::size_t>(m, 0), std::vector<std::size_t>(m, 0), 0, 0};
  for (const auto& t : tallies) {
    for (int k = 0; k < m; ++k) {
      total.accepted[k] += t.accepted[k];
      total.passes[k] += t.passes[k];
    }
    total.all += t.all;
    total.aborted += t.aborted;
  }

  ResultRow row{s.name, base_params(s), {}, 0.0};
  row.params.emplace_back("strategy", alice->name());
  row.params.emplace_back("copies", std::to_string(params.copies));
  row.params.emplace_back("threshold", std::to_string(params.threshold));
  const std::size_t done = n - total.aborted;
  for (int k = 0; k < m; ++k) row.metrics.push_back(rate("accept_" + std::to_string(k), total.accepted[k], done));
  row.metrics.push_back(rate("accept_all", total.all, done));
  for (int k = 0; k < m; ++k) {
    row.metrics.push_back(rate("copy_pass_" + std::to_string(k), total.passes[k], done * params.copies));
  }
  row.metrics.push_back({"honest_accept_closed_form", robustness::honest_accept_probability(params, noise), std::nullopt});
  row.metrics.push_back({"per_copy_pass_closed_form", noise.per_copy_pass(cfg.d()), std::nullopt});
  row.metrics.push_back({"eps_symmetric",
                         robustness::cheat_epsilon(cfg.d(), params.copies, params.threshold,
                                                   robustness::AttackModel::IidSymmetric),
                         std::nullopt});
  row.metrics.push_back({"eps_asymmetric",
                         robustness::cheat_epsilon(cfg.d(), params.copies, params.threshold,
                                                   robustness::AttackModel::IidAsymmetric),
                         std::nullopt});
  row.metrics.push_back({"margin_sigmas", params.margin_sigmas(), std::nullopt});
  row.metrics.push_back({"aborted", static_cast<double>(total.aborted), std::nullopt});
  out.rows.push_back(std::move(row));
  if (total.aborted > 0) out.causality_violation = true;

  const auto r0 = robustness::run_redundant_session(cfg.with_seed(derive_seed(seed_of(s), "trial", 0)), params,
                                                    noise, *alice, policy);
  out.archive.push_back({{"scenario", s.name}, {"passes", r0.passes}, {"transcript", r0.transcript.to_json()}});
}

chaining::ChainConfig chain_config(const Scenario& s, std::uint64_t seed) {
  chaining::ChainConfig c;
  c.commit_point = s.geometry.commit_point;
  c.d0 = s.quantum.d;
  c.interval = s.chain.interval;
  c.depth = s.chain.depth;
  c.sizing = s.chain.sizing == "compact" ? chaining::LevelSizing::Compact : chaining::LevelSizing::Secure;
  c.receipt_lag = s.geometry.receipt_lag;
  c.seed = seed;
  return c;
}

void run_chained(const Scenario& s, unsigned threads, RunResult& out) {
  if (s.quantum.m != 2) throw ConfigError("chained mode commits a bit: quantum.m must be 2");
  const auto levels = chaining::chain_levels(s.chain.depth, s.quantum.d, chain_config(s, 0).sizing);
  const chaining::ChainTamper tamper{s.chain.tamper == 0 ? -1 : s.chain.tamper};
  const std::size_t n = trials_of(s);
  const int depth = s.chain.depth;

  struct Tally {
    std::size_t recovered = 0, all_pass = 0, consistent = 0;
    std::vector<std::size_t> level_pass;
  };
  const auto tallies = chunked<Tally>(n, threads, [&](std::size_t b, std::size_t e, Tally& t) {
    t.level_pass.assign(depth + 1, 0);
    for (std::size_t i = b; i < e; ++i) {
      const auto seed = derive_seed(seed_of(s), "trial", i);
      const auto chain = chaining::chain_commit(s.chain.bit, chain_config(s, seed), tamper);
      Rng nature = make_rng(seed, "unveil");
      const auto v = chaining::unveil_chain(chain, nature);
      t.all_pass += v.all_pass;
      t.recovered += v.all_pass && v.bit == s.chain.bit;
      t.consistent += chaining::causally_consistent(chain);
      for (int k = 0; k <= depth; ++k) t.level_pass[k] += v.levels[k] == protocol::Verdict::Pass;
    }
  });
  Tally total{0, 0, 0, std::vector<std::size_t>(depth + 1, 0)};
  for (const auto& t : tallies) {
    total.recovered += t.recovered;
    total.all_pass += t.all_pass;
    total.consistent += t.consistent;
    for (int k = 0; k <= depth; ++k) total.level_pass[k] += t.level_pass[k];
  }

  ResultRow row{s.name, base_params(s), {}, 0.0};
  row.params.emplace_back("depth", std::to_string(depth));
  row.params.emplace_back("sizing", s.chain.sizing);
  row.params.emplace_back("bit", std::to_string(s.chain.bit));
  row.params.emplace_back("tamper", std::to_string(s.chain.tamper));
  row.metrics.push_back(rate("recovered", total.recovered, n));
  row.metrics.push_back(rate("all_pass", total.all_pass, n));
  row.metrics.push_back(rate("causally_consistent", total.consistent, n));
  for (int k = 0; k <= depth; ++k) row.metrics.push_back(rate("level_" + std::to_string(k) + "_pass", total.level_pass[k], n));
  row.metrics.push_back({"final_d", static_cast<double>(levels.back().d), std::nullopt});
  row.metrics.push_back({"final_m", static_cast<double>(levels.back().m), std::nullopt});
  row.metrics.push_back({"final_bound", levels.back().bound, std::nullopt});
  out.rows.push_back(std::move(row));

  const auto seed0 = derive_seed(seed_of(s), "trial", 0);
  const auto chain0 = chaining::chain_commit(s.chain.bit, chain_config(s, seed0), tamper);
  Rng nature = make_rng(seed0, "unveil");
  const auto v0 = chaining::unveil_chain(chain0, nature);
  nlohmann::json verdict{{"bit", v0.bit}, {"all_pass", v0.all_pass},
                         {"decision_point", spacetime::to_string(v0.decision_point)}};
  verdict["failing_level"] = v0.failing_level ? nlohmann::json(*v0.failing_level) : nlohmann::json();
  out.archive.push_back({{"scenario", s.name}, {"chain", chain0.to_json()}, {"verdict", std::move(verdict)}});
}

void run_dual(const Scenario& s, unsigned threads, RunResult& out) {
  const auto cfg = build_config(s);
  const auto strategy =
      s.dual.strategy == "temporary-cheat" ? chaining::DualStrategy::TemporaryCheat : chaining::DualStrategy::Honest;
  const std::size_t n = trials_of(s);

  struct Tally {
    std::size_t provisional = 0, accepted = 0, detected = 0, incomplete = 0;
  };
  const auto tallies = chunked<Tally>(n, threads, [&](std::size_t b, std::size_t e, Tally& t) {
    for (std::size_t i = b; i < e; ++i) {
      auto streams = SessionStreams::derive(derive_seed(seed_of(s), "trial", i));
      const auto c = chaining::dual_commit(s.dual.bit, cfg, strategy, streams);
      const auto v = chaining::dual_unveil(c, s.dual.point, s.dual.claim, s.dual.return_opposite, streams);
      t.provisional += v.provisional == protocol::Verdict::Pass;
      t.accepted += v.final == chaining::FinalVerdict::Accepted;
      t.detected += v.final == chaining::FinalVerdict::CheatDetected;
      t.incomplete += v.final == chaining::FinalVerdict::Incomplete;
    }
  });
  Tally total;
  for (const auto& t : tallies) {
    total.provisional += t.provisional;
    total.accepted += t.accepted;
    total.detected += t.detected;
    total.incomplete += t.incomplete;
  }

  // The cheat holds both states on L_0; Bob's test of a guess passes with 1/d.
  double expected = 0.0;
  if (strategy == chaining::DualStrategy::TemporaryCheat && (s.dual.return_opposite || s.dual.point == 1)) {
    expected = 1.0 - 1.0 / cfg.d();
  }

  ResultRow row{s.name, base_params(s), {}, 0.0};
  row.params.emplace_back("strategy", s.dual.strategy);
  row.params.emplace_back("point", std::to_string(s.dual.point));
  row.params.emplace_back("claim", std::to_string(s.dual.claim));
  row.metrics.push_back(rate("provisional_pass", total.provisional, n));
  row.metrics.push_back(rate("accepted", total.accepted, n));
  row.metrics.push_back(rate("detected", total.detected, n));
  row.metrics.push_back(rate("incomplete", total.incomplete, n));
  row.metrics.push_back({"expected_detection", expected, std::nullopt});
  out.rows.push_back(std::move(row));

  auto streams = SessionStreams::derive(derive_seed(seed_of(s), "trial", 0));
  const auto c0 = chaining::dual_commit(s.dual.bit, cfg, strategy, streams);
  const auto v0 = chaining::dual_unveil(c0, s.dual.point, s.dual.claim, s.dual.return_opposite, streams);
  out.archive.push_back({{"scenario", s.name}, {"verdict", chaining::to_json(v0)}});
}

void run_epsilon_table(const Scenario& s, RunResult& out) {
  const int d = s.quantum.d;
  if (d < 2) throw ConfigError("quantum.d must be at least 2");
  if (s.redundancy.copies < 1) throw ConfigError("redundancy.copies must be at least 1");
  const auto noise = build_noise(s);
  for (int n = 1; n <= s.redundancy.copies; ++n) {
    for (int k = 1; k <= n; ++k) {
      const robustness::RedundancyParams p{n, k, d};
      ResultRow row{s.name, {{"mode", "epsilon-table"}, {"d", std::to_string(d)}}, {}, 0.0};
      row.params.emplace_back("copies", std::to_string(n));
      row.params.emplace_back("threshold", std::to_string(k));
      row.metrics.push_back({"eps_symmetric", robustness::cheat_epsilon(d, n, k, robustness::AttackModel::IidSymmetric),
                             std::nullopt});
      row.metrics.push_back({"eps_asymmetric",
                             robustness::cheat_epsilon(d, n, k, robustness::AttackModel::IidAsymmetric), std::nullopt});
      row.metrics.push_back({"honest_accept", robustness::honest_accept_probability(p, noise), std::nullopt});
      row.metrics.push_back({"margin_sigmas", p.margin_sigmas(), std::nullopt});
      out.rows.push_back(std::move(row));
    }
  }
}

std::string csv_cell(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

const Metric* ResultRow::find(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

protocol::ValidatedConfig build_config(const Scenario& s) {
  const auto& G = s.geometry;
  SessionConfig c;
  c.d = s.quantum.d;
  c.commit_point = G.commit_point;
  c.bob_lead = G.bob_lead;
  c.processing_delay = G.processing_delay;
  c.geometry = s.mode == Mode::NonIdeal ? protocol::Geometry::NonIdeal : protocol::Geometry::Ideal;
  c.transport = G.transport == "teleport" ? protocol::Transport::Teleport : protocol::Transport::SecuredChannel;
  c.seed = seed_of(s);

  try {
    if (!G.directions.empty()) {
      for (std::size_t i = 0; i < G.directions.size(); ++i) {
        const auto& q = G.directions[i];
        c.directions.emplace_back(static_cast<int>(i), q[0], q[1], q[2], q[3]);
      }
    } else if (G.layout == "1d") {
      if (s.quantum.m != 2) throw ConfigError("layout '1d' needs quantum.m = 2");
      c.directions = {LightDirection::one_dimensional(0, -1), LightDirection::one_dimensional(1, +1)};
    } else {
      const auto mode = G.layout == "planar" ? spacetime::DirectionMode::Planar : spacetime::DirectionMode::Spherical;
      const auto plane = G.plane == "yz" ? spacetime::Plane::YZ : spacetime::Plane::XY;
      c.directions = spacetime::generate_directions(s.quantum.m, mode, plane).directions;
    }
    if (c.m() != s.quantum.m) {
      throw ConfigError("quantum.m = " + std::to_string(s.quantum.m) + " but " + std::to_string(c.m()) +
                        " directions are given");
    }

    if (!G.unveil_points.empty()) {
      c.unveil_points = G.unveil_points;
    } else {
      if (G.reach <= 0) throw ConfigError("geometry.reach must be positive");
      const std::int64_t shift = c.geometry == protocol::Geometry::NonIdeal ? G.processing_delay + G.slack : 0;
      for (const auto& v : c.directions) {
        Event q = spacetime::point_on_ray(G.commit_point, v, spacetime::steps_for_duration(v, G.reach));
        q.t += shift;
        c.unveil_points.push_back(q);
      }
    }
    if (!G.receipt_points.empty()) {
      c.receipt_points = G.receipt_points;
    } else {
      for (const auto& q : c.unveil_points) c.receipt_points.push_back({q.t + G.receipt_lag, q.x, q.y, q.z});
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  return protocol::validated(std::move(c));
}

adversary::StrategyParams strategy_params(const Scenario& s) {
  adversary::StrategyParams p;
  p.value = s.adversary.value;
  p.p0 = s.adversary.p0;
  p.asymmetry_a = s.adversary.asymmetry_a.value_or(cloning::AsymmetryParams::symmetric(s.quantum.d).a);
  p.basis = s.adversary.basis == "computational" ? adversary::BasisPolicy::Computational
                                                 : adversary::BasisPolicy::HaarRandom;
  return p;
}

robustness::NoiseModel build_noise(const Scenario& s) {
  const auto& N = s.noise;
  auto leg = [](const LegBlock& l) { return robustness::LegNoise{l.loss, l.depolarizing}; };
  return robustness::NoiseModel(leg(N.bob_to_p), leg(N.p_to_q), leg(N.q_to_receipt), N.detector_efficiency);
}

RunResult run_point(const Scenario& s, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  if (!s.noise.is_none() && s.mode != Mode::Redundant && s.mode != Mode::EpsilonTable) {
    throw ConfigError("a [noise] block needs mode 'redundant' or 'epsilon-table'");
  }
  switch (s.mode) {
    case Mode::Ideal:
    case Mode::NonIdeal: run_scored(s, threads, out); break;
    case Mode::Redundant: run_redundant(s, threads, out); break;
    case Mode::Chained: run_chained(s, threads, out); break;
    case Mode::Dual: run_dual(s, threads, out); break;
    case Mode::EpsilonTable: run_epsilon_table(s, out); break;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : out.rows) r.runtime_s = secs;
  return out;
}

RunResult run_scenario(const Scenario& s, unsigned threads) {
  const auto points = expand_grid(s);
  const unsigned total = resolve_threads(threads);
  const unsigned outer = std::min<unsigned>(total, static_cast<unsigned>(points.size()));
  const unsigned inner = std::max(1u, total / outer);

  std::vector<RunResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_point(points[i].scenario, inner);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < outer; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // The first failing point in grid order wins.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& r = results[i];
    for (auto& row : r.rows) {
      for (const auto& a : points[i].assignments) row.params.push_back(a);
      out.rows.push_back(std::move(row));
    }
    for (auto& a : r.archive) out.archive.push_back(std::move(a));
    out.causality_violation = out.causality_violation || r.causality_violation;
    out.bound_violation = out.bound_violation || r.bound_violation;
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const std::vector<ResultRow>& rows, bool timing) {
  std::vector<std::string> params, metrics;
  auto add = [](std::vector<std::string>& cols, const std::string& c) {
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
  };
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.params) add(params, k);
    for (const auto& m : r.metrics) {
      add(metrics, m.name);
      if (m.radius) add(metrics, m.name + "_radius");
    }
  }
  std::string out = "scenario";
  for (const auto& c : params) out += "," + csv_cell(c);
  for (const auto& c : metrics) out += "," + csv_cell(c);
  if (timing) out += ",runtime_s";
  out += '\n';
  for (const auto& r : rows) {
    out += csv_cell(r.scenario);
    for (const auto& c : params) {
      out += ',';
      for (const auto& [k, v] : r.params) {
        if (k == c) {
          out += csv_cell(v);
          break;
        }
      }
    }
    for (const auto& c : metrics) {
      out += ',';
      for (const auto& m : r.metrics) {
        if (m.name == c) {
          out += format_number(m.value);
          break;
        }
        if (m.radius && m.name + "_radius" == c) {
          out += format_number(*m.radius);
          break;
        }
      }
    }
    if (timing) out += "," + format_number(r.runtime_s);
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const std::vector<ResultRow>& rows, bool timing) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& m : r.metrics) {
      nlohmann::json e{{"value", m.value}};
      if (m.radius) e["radius"] = *m.radius;
      metrics[m.name] = std::move(e);
    }
    nlohmann::json row{{"scenario", r.scenario}, {"params", std::move(params)}, {"metrics", std::move(metrics)}};
    if (timing) row["runtime_s"] = r.runtime_s;
    arr.push_back(std::move(row));
  }
  return nlohmann::json{{"rows", std::move(arr)}};
}

}  // namespace flyq::cli
