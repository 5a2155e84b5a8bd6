// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "flyq/adversary.hpp"
#include "flyq/chaining.hpp"
#include "flyq/cloning.hpp"
#include "flyq/protocol.hpp"
#include "flyq/qudit.hpp"
#include "flyq/robustness.hpp"
#include "flyq/spacetime.hpp"
#include "oracles.hpp"

using namespace flyq;

namespace {

constexpr double kExact = 1e-9;
constexpr double kSearchSlack = 1e-6;
constexpr double kSigmas = 3.0;
// Closed forms evaluated through the binomial tail agree to a few ulp.
constexpr double kUlpRel = 1e-15;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

/// Fidelity sum of the explicit symmetric 1 -> m cloner, Haar-averaged exactly.
double constructive_sum(int d, int m) {
  const auto v = cloning::symmetric_cloner_isometry(d, m);
  double s = 0.0;
  for (double f : cloning::haar_average_fidelities(v, d, m, static_cast<int>(oracle::ipow(d, m - 1)))) s += f;
  return s;
}

Outcome security_bound() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int d = 2; d <= 16; ++d) {
    const double bound = 1.0 + 2.0 / (d + 1);
    double err = std::abs(constructive_sum(d, 2) - bound);
    // Also the clones of one concrete Haar input.
    Rng rng = make_rng(1, "acceptance-1", d);
    err = std::max(err, std::abs(cloning::symmetric_clone(qudit::haar_random_state(d, rng), 2).sum - bound));
    worst = std::max(worst, err);
    o.require(err <= kExact, fmt("d=%g off by %g", d, err));
  }
  const double t = seconds_since(t0);
  o.require(t < 10.0, fmt("took %g s", t));
  if (o.pass) o.detail = fmt("max |sum - bound| = %.3g over d=2..16, %.2f s", worst, t);
  return o;
}

Outcome mary_bound() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int d = 2; d <= 8; ++d) {
    for (int m : {2, 3}) {
      const double bound = 1.0 + 2.0 * (m - 1) / (d + 1.0);
      const double sum = constructive_sum(d, m);
      worst = std::max(worst, std::abs(sum - bound));
      o.require(std::abs(sum - bound) <= kExact, fmt("d=%g m=%g off by %g", d, m, sum - bound));
      o.require(sum <= 1.0 + 2.0 * m / d + kExact, fmt("d=%g m=%g above 1 + 2m/d", d, m));
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 60.0, fmt("took %g s", t));
  if (o.pass) o.detail = fmt("max |sum - bound| = %.3g over 14 (d,m), %.2f s", worst, t);
  return o;
}

Outcome lagrange_optimum() {
  Outcome o;
  for (int d : {2, 3, 4}) {
    const auto s = cloning::sweep_constraint(d, 10001);
    const double bound = 1.0 + 2.0 / (d + 1);
    o.require(std::abs(s.max_sum - bound) <= kExact, fmt("d=%g peak %g", d, s.max_sum));
    o.require(std::abs(s.at_max.a - s.at_max.b) <= 1e-6, fmt("d=%g peak at a-b=%g", d, s.at_max.a - s.at_max.b));
    o.require(s.at_max.satisfies(d), fmt("d=%g peak off the constraint", d));
  }
  if (o.pass) o.detail = "10001 points per d, peak at a=b for d in {2,3,4}";
  return o;
}

Outcome no_super_bound() {
  Outcome o;
  double excess = -1.0;
  for (int d : {2, 3}) {
    const auto r = cloning::randomized_attack_search(d, 2, 1000, 4242 + d);
    excess = std::max(excess, r.best_sum - r.bound);
    o.require(r.best_sum <= r.bound + kSearchSlack, fmt("d=%g best %g > bound", d, r.best_sum));
  }
  if (o.pass) o.detail = fmt("1000 dilations for d=2,3; best - bound = %.3g", excess);
  return o;
}

Outcome completeness() {
  Outcome o;
  std::size_t passed = 0, total = 0;
  int k = 0;
  for (auto t : {protocol::Transport::SecuredChannel, protocol::Transport::Teleport}) {
    for (int bit : {0, 1}) {
      auto c = protocol::SessionConfig::ideal_1d(2 + k, 8);
      c.transport = t;
      const auto s = adversary::evaluate(adversary::HonestStrategy(bit), protocol::validated(c), 2500, 50 + k);
      passed += static_cast<std::size_t>(std::llround(s.p[bit] * 2500));
      total += 2500;
      ++k;
    }
  }
  o.require(passed == total, fmt("%g of %g passed", passed, total));
  o.detail = std::to_string(passed) + "/" + std::to_string(total);
  return o;
}

Outcome hiding() {
  Outcome o;
  int pairs = 0;
  for (auto t : {protocol::Transport::SecuredChannel, protocol::Transport::Teleport}) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      auto c = protocol::SessionConfig::ideal_1d(3, 8, 1, seed);
      c.transport = t;
      const auto cfg = protocol::validated(c);
      const auto v0 = protocol::bob_view_before_unveil(
          protocol::run_session(cfg, adversary::HonestStrategy(0), protocol::unveil_everywhere()));
      const auto v1 = protocol::bob_view_before_unveil(
          protocol::run_session(cfg, adversary::HonestStrategy(1), protocol::unveil_everywhere()));
      o.require(v0 == v1, fmt("views differ at seed %g", static_cast<double>(seed)));
      ++pairs;
    }
  }
  o.detail = std::to_string(pairs) + " paired views compared";
  return o;
}

Outcome causality() {
  Outcome o;
  using spacetime::CausalRelation;
  Rng rng = make_rng(7, "acceptance-7");
  std::uniform_int_distribution<std::int64_t> coord(-50, 50);
  for (int i = 0; i < 100000; ++i) {
    const spacetime::Event a{coord(rng), coord(rng), coord(rng), coord(rng)};
    spacetime::Event b{coord(rng), coord(rng), coord(rng), coord(rng)};
    if (i % 4 == 0) b = spacetime::Event{a.t + 30, a.x + 18, a.y - 24, a.z};  // on the cone
    const auto ab = spacetime::causal_order(a, b);
    const auto ba = spacetime::causal_order(b, a);
    const int s = oracle::sign_interval(b.t - a.t, b.x - a.x, b.y - a.y, b.z - a.z);
    CausalRelation want;
    if (a == b) {
      want = CausalRelation::Coincident;
    } else if (s < 0) {
      want = CausalRelation::Spacelike;
    } else if (s == 0) {
      want = b.t > a.t ? CausalRelation::LightlikeFuture : CausalRelation::LightlikePast;
    } else {
      want = b.t > a.t ? CausalRelation::TimelikeFuture : CausalRelation::TimelikePast;
    }
    o.require(ab == want, "misclassified pair " + spacetime::to_string(a) + " " + spacetime::to_string(b));
    o.require(ba == spacetime::mirror(ab), "relation not antisymmetric");
  }
  const spacetime::Event p{3, -2, 5, 1};
  for (int m = 2; m <= 12; ++m) {
    for (auto mode : {spacetime::DirectionMode::Planar, spacetime::DirectionMode::Spherical}) {
      const auto dirs = spacetime::generate_directions(m, mode);
      std::vector<spacetime::Event> q;
      for (const auto& v : dirs.directions) {
        const auto e = spacetime::point_on_ray(p, v, spacetime::steps_for_duration(v, 240));
        o.require(spacetime::causal_order(p, e) == CausalRelation::LightlikeFuture, "ray point not lightlike");
        q.push_back(e);
      }
      for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = i + 1; j < q.size(); ++j) {
          o.require(spacetime::causal_order(q[i], q[j]) == CausalRelation::Spacelike,
                    fmt("Q pair not spacelike at m=%g", m));
        }
      }
    }
  }
  const auto tr = protocol::run_session(protocol::validated(protocol::SessionConfig::ideal_1d(2, 8)),
                                        adversary::AcausalRelayStrategy(), protocol::unveil_everywhere());
  o.require(tr.status == protocol::SessionStatus::CausalityViolation, "acausal strategy did not abort");
  if (o.pass) o.detail = "1e5 pairs, m=2..12 planar and spherical, acausal relay aborted";
  return o;
}

Outcome teleportation() {
  Outcome o;
  const int d = 3, n = 10000;
  std::vector<int> counts(d * d, 0);
  Rng rng = make_rng(8, "acceptance-8");
  const auto res = qudit::TeleportResource::make(d, {0, 0, 0, 0}, {8, 8, 0, 0});
  for (int i = 0; i < n; ++i) ++counts[qudit::teleport(qudit::haar_random_state(d, rng), res, rng).index];
  double chi2 = 0.0;
  const double e = n / static_cast<double>(d * d);
  for (int c : counts) chi2 += (c - e) * (c - e) / e;
  const double z = oracle::chi_square_z(chi2, d * d - 1);
  o.require(z < kSigmas, fmt("chi-square %g (z = %g)", chi2, z));

  double worst = 0.0;
  for (int dd : {2, 3, 5, 8}) {
    const auto psi = qudit::haar_random_state(dd, rng);
    qudit::Matrix avg = qudit::Matrix::Zero(dd, dd);
    for (int j = 0; j < dd * dd; ++j) avg += qudit::weyl(dd, j).apply(psi).projector();
    avg /= dd * dd;
    const double td =
        qudit::trace_distance(qudit::DensityMatrix::trusted(avg), qudit::DensityMatrix::maximally_mixed(dd));
    worst = std::max(worst, td);
    o.require(td <= kExact, fmt("masked average at d=%g is %g from I/d", dd, td));
  }
  if (o.pass) o.detail = fmt("chi2 = %.2f on 8 dof (z = %.2f); masked trace distance %.2g", chi2, z, worst);
  return o;
}

Outcome redundancy() {
  Outcome o;
  const int d = 2, n = 16, trials = 300;
  double worst_z = 0.0;
  for (double loss : {0.05, 0.15, 0.3}) {
    for (int m : {8, 11, 14}) {
      const robustness::RedundancyParams params{n, m, d};
      const auto noise = robustness::NoiseModel::single_leg(loss);
      const double p = robustness::honest_accept_probability(params, noise);
      o.require(std::abs(p - oracle::binomial_tail(n, 1.0 - loss, m)) <= 1e-12, "closed form mismatch");
      int acc = 0;
      for (int t = 0; t < trials; ++t) {
        const auto cfg = protocol::validated(protocol::SessionConfig::ideal_1d(d, 8, 1, derive_seed(9, "grid", t)));
        acc += robustness::run_redundant_session(cfg, params, noise, adversary::HonestStrategy(0),
                                                 protocol::unveil_only(0))
                   .accepted[0];
      }
      const double rate = acc / static_cast<double>(trials);
      const double s = sigma(p, trials);
      const double dev = std::abs(rate - p);
      if (s > 0) worst_z = std::max(worst_z, dev / s);
      o.require(dev <= kSigmas * s + 1e-12, fmt("loss %g M %g: rate %g", loss, m, rate));
    }
  }
  for (int dd = 2; dd <= 32; ++dd) {
    const double want = 2.0 / (dd + 1);
    o.require(std::abs(robustness::cheat_epsilon(dd, 1, 1) - want) <= kUlpRel * want,
              fmt("eps(%g,1,1) != 2/(d+1)", dd));
    for (int copies : {2, 5, 10, 20}) {
      for (auto model : {robustness::AttackModel::IidSymmetric, robustness::AttackModel::IidAsymmetric}) {
        double prev = 2.0;
        for (int m = 1; m <= copies; ++m) {
          const double eps = robustness::cheat_epsilon(dd, copies, m, model);
          o.require(eps <= prev + 1e-15, fmt("eps not monotone at d=%g N=%g M=%g", dd, copies, m));
          prev = eps;
        }
      }
    }
  }
  if (o.pass) o.detail = fmt("9 (loss, M) points, worst deviation %.2f sigma; eps checks on d=2..32", worst_z);
  return o;
}

Outcome chains() {
  Outcome o;
  int recovered = 0, total = 0;
  struct Case {
    int depth;
    chaining::LevelSizing sizing;
    int runs;
  };
  for (const auto& c : {Case{1, chaining::LevelSizing::Secure, 400}, Case{2, chaining::LevelSizing::Secure, 400},
                        Case{3, chaining::LevelSizing::Compact, 200}}) {
    for (int r = 0; r < c.runs; ++r) {
      chaining::ChainConfig cfg;
      cfg.depth = c.depth;
      cfg.sizing = c.sizing;
      cfg.seed = derive_seed(10, "chain", total);
      const int bit = r % 2;
      const auto chain = chaining::chain_commit(bit, cfg);
      Rng nature = make_rng(cfg.seed, "unveil");
      const auto v = chaining::unveil_chain(chain, nature);
      const bool ok = v.all_pass && v.bit == bit && chaining::causally_consistent(chain);
      recovered += ok;
      ++total;
    }
  }
  o.require(recovered == total, fmt("%g of %g chains recovered", recovered, total));

  std::string dual;
  for (int d : {2, 4, 8}) {
    const int runs = 4000;
    const auto cfg = protocol::validated(protocol::SessionConfig::ideal_1d(d, 8));
    int detected = 0;
    for (int r = 0; r < runs; ++r) {
      auto streams = SessionStreams::derive(11, static_cast<std::uint64_t>(d * runs + r));
      const auto cmt = chaining::dual_commit(0, cfg, chaining::DualStrategy::TemporaryCheat, streams);
      const auto v = chaining::dual_unveil(cmt, 0, 1, true, streams);
      o.require(v.provisional == protocol::Verdict::Pass, "temporary cheat failed the provisional check");
      detected += v.final == chaining::FinalVerdict::CheatDetected;
    }
    const double p = 1.0 - 1.0 / d;
    const double rate = detected / static_cast<double>(runs);
    o.require(std::abs(rate - p) <= kSigmas * sigma(p, runs), fmt("d=%g detection %g vs %g", d, rate, p));
    dual += fmt(" d=%g:%.4f", d, rate);
  }
  if (o.pass) o.detail = std::to_string(recovered) + "/" + std::to_string(total) + " chains; detection" + dual;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"security-bound", security_bound}, {"m-ary-bound", mary_bound},
      {"lagrange-optimum", lagrange_optimum}, {"no-super-bound", no_super_bound},
      {"completeness", completeness},     {"hiding", hiding},
      {"causality", causality},           {"teleportation", teleportation},
      {"redundancy", redundancy},         {"chaining", chains},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %-17s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index++, name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
