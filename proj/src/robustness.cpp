#include "flyq/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "flyq/cloning.hpp"
#include "flyq/errors.hpp"

namespace flyq::robustness {
namespace {

using qudit::Complex;
using qudit::Matrix;
using qudit::Vector;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
}

std::size_t leg_index(protocol::Leg l) {
  switch (l) {
    case protocol::Leg::BobToP: return 0;
    case protocol::Leg::PToQ: return 1;
    case protocol::Leg::QToReceipt: return 2;
  }
  return 0;
}

Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = {re, im};
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Probability that at least `threshold` of the qubits at positions
// first..first+n-1 pass their projective tests onto `tests`.
double accept_probability(const Vector& v, std::size_t first, int n, int threshold,
                          const std::vector<Vector>& tests, std::size_t total_qubits, std::size_t anc) {
  std::function<double(const Vector&, int, int)> recurse = [&](const Vector& w, int c, int passed) -> double {
    if (passed + (n - c) < threshold) return 0.0;
    if (c == n) return w.squaredNorm();
    const std::size_t stride = (std::size_t{1} << (total_qubits - 1 - (first + static_cast<std::size_t>(c)))) * anc;
    const Vector& phi = tests[static_cast<std::size_t>(c)];
    Vector on(w.size()), off(w.size());
    for (Eigen::Index idx = 0; idx < w.size(); ++idx) {
      if ((static_cast<std::size_t>(idx) / stride) % 2 != 0) continue;
      const Eigen::Index hi = idx + static_cast<Eigen::Index>(stride);
      const Complex amp = std::conj(phi(0)) * w(idx) + std::conj(phi(1)) * w(hi);
      on(idx) = phi(0) * amp;
      on(hi) = phi(1) * amp;
      off(idx) = w(idx) - on(idx);
      off(hi) = w(hi) - on(hi);
    }
    return recurse(on, c + 1, passed + 1) + recurse(off, c + 1, passed);
  };
  return recurse(v, 0, 0);
}

struct ProbeInput {
  Vector joint;
  std::vector<Vector> parts;
};

std::vector<ProbeInput> product_inputs(int copies, std::size_t count, Rng& rng) {
  std::vector<ProbeInput> out;
  for (std::size_t k = 0; k < count; ++k) {
    ProbeInput in;
    in.joint = Vector::Ones(1);
    for (int c = 0; c < copies; ++c) {
      in.parts.push_back(qudit::haar_random_state(2, rng).amplitudes());
      in.joint = qudit::tensor(Matrix(in.joint), Matrix(in.parts.back())).col(0);
    }
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<double> margins(const Matrix& v, const std::vector<ProbeInput>& inputs, int copies, int threshold) {
  const auto n = static_cast<std::size_t>(copies);
  const std::size_t anc = std::size_t{1} << n;
  std::vector<double> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    const Vector w = v * in.joint;
    const double p0 = accept_probability(w, 0, copies, threshold, in.parts, 2 * n, anc);
    const double p1 = accept_probability(w, n, copies, threshold, in.parts, 2 * n, anc);
    out.push_back(p0 + p1 - 1.0);
  }
  return out;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

NoiseModel::NoiseModel(LegNoise bob_to_p, LegNoise p_to_q, LegNoise q_to_receipt, double detector_efficiency)
    : legs_{bob_to_p, p_to_q, q_to_receipt}, efficiency_(detector_efficiency) {
  for (const auto& l : legs_) {
    check_probability(l.loss, "loss probability");
    check_probability(l.depolarizing, "depolarizing probability");
  }
  check_probability(efficiency_, "detector efficiency");
  survival_ = efficiency_;
  error_free_ = 1.0;
  for (const auto& l : legs_) {
    survival_ *= 1.0 - l.loss;
    error_free_ *= 1.0 - l.depolarizing;
  }
}

NoiseModel NoiseModel::none() { return NoiseModel({}, {}, {}, 1.0); }

NoiseModel NoiseModel::single_leg(double loss, double depolarizing) {
  return NoiseModel({}, LegNoise{loss, depolarizing}, {}, 1.0);
}

const LegNoise& NoiseModel::leg(protocol::Leg l) const { return legs_[leg_index(l)]; }

protocol::LegEffect NoiseModel::transmit(protocol::Leg leg, int dim, Rng& channel) const {
  const LegNoise& l = legs_[leg_index(leg)];
  protocol::LegEffect e;
  if (l.loss > 0.0 && uniform01(channel) < l.loss) {
    e.lost = true;
    return e;
  }
  if (l.depolarizing > 0.0 && uniform01(channel) < l.depolarizing) {
    std::uniform_int_distribution<int> j(0, dim * dim - 1);
    e.error = j(channel);
  }
  return e;
}

bool NoiseModel::detect(Rng& channel) const {
  return efficiency_ >= 1.0 || uniform01(channel) < efficiency_;
}

double NoiseModel::per_copy_pass(int d) const {
  // A uniformly random Weyl error leaves I/d, which passes with probability 1/d.
  return survival_ * (error_free_ + (1.0 - error_free_) / d);
}

void RedundancyParams::validate() const {
  if (copies < 1) throw ConfigError("copy count N must be >= 1");
  if (threshold < 1 || threshold > copies) {
    throw ConfigError("threshold M = " + std::to_string(threshold) + " outside [1, N = " + std::to_string(copies) + "]");
  }
  if (d < 2) throw ConfigError("qudit dimension must be >= 2");
}

double RedundancyParams::margin_sigmas() const {
  return (threshold - copies / 2.0) / (std::sqrt(static_cast<double>(copies)) / 2.0);
}

RedundantResult run_redundant_session(const protocol::ValidatedConfig& cfg, const RedundancyParams& params,
                                      const NoiseModel& noise, const protocol::AliceStrategy& alice,
                                      const protocol::UnveilPolicy& policy) {
  params.validate();
  if (params.d != cfg.d()) throw ConfigError("redundancy d differs from the session d");
  if (static_cast<std::size_t>(params.copies) * static_cast<std::size_t>(params.d) > qudit::kMaxJointDim) {
    throw CapExceeded("N * d exceeds the desk-scale cap");
  }
  RedundantResult r;
  r.transcript = protocol::run_labelled_session(cfg, alice, params.copies, policy, &noise);
  for (int i = 0; i < cfg.m(); ++i) {
    int n = 0;
    for (int c = 0; c < params.copies; ++c) n += r.transcript.verdict(i, c) == protocol::Verdict::Pass;
    r.passes.push_back(n);
    r.accepted.push_back(n >= params.threshold);
  }
  return r;
}

double binomial_tail(int n, double p, int k) {
  if (n < 0) throw std::invalid_argument("binomial_tail needs n >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_tail needs p in [0, 1]");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // P(X >= k) = I_p(k, n - k + 1)
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

double honest_accept_probability(const RedundancyParams& params, const NoiseModel& noise) {
  params.validate();
  return binomial_tail(params.copies, noise.per_copy_pass(params.d), params.threshold);
}

std::string_view to_string(AttackModel a) {
  return a == AttackModel::IidSymmetric ? "iid-symmetric" : "iid-asymmetric";
}

double cheat_epsilon(int d, int copies, int threshold, AttackModel model) {
  RedundancyParams{copies, threshold, d}.validate();
  if (model == AttackModel::IidSymmetric) {
    // Per-copy failure probability 1 - F* = (d - 1)/(2(d + 1)); eps = 1 - 2 P(X < M).
    const double fail = (d - 1.0) / (2.0 * (d + 1.0));
    const double below = binomial_tail(copies, fail, copies - threshold + 1);
    return std::max(0.0, 1.0 - 2.0 * below);
  }
  constexpr std::size_t kPoints = 2001;
  double best = 0.0;
  for (std::size_t i = 0; i < kPoints; ++i) {
    const double theta = (std::numbers::pi / 2.0) * static_cast<double>(i) / (kPoints - 1);
    const double r = 1.0 / std::sqrt(1.0 + std::sin(2.0 * theta) / d);
    const auto [f0, f1] = cloning::asymmetric_fidelities(d, {r * std::cos(theta), r * std::sin(theta)});
    best = std::max(best, binomial_tail(copies, f0, threshold) + binomial_tail(copies, f1, threshold) - 1.0);
  }
  return best;
}

ProbeResult collective_attack_probe(int copies, int threshold, std::size_t restarts, std::uint64_t seed,
                                    std::size_t held_out) {
  if (copies < 1 || copies > 3) throw CapExceeded("collective probe supports 1 <= N <= 3");
  RedundancyParams{copies, threshold, 2}.validate();
  if (held_out < 2) throw std::invalid_argument("held-out set needs at least two inputs");
  ProbeResult res;
  res.copies = copies;
  res.threshold = threshold;
  res.restarts = restarts;
  res.iid_bound = std::max(cheat_epsilon(2, copies, threshold, AttackModel::IidSymmetric),
                           cheat_epsilon(2, copies, threshold, AttackModel::IidAsymmetric));

  const auto n = static_cast<std::size_t>(copies);
  const Eigen::Index in_dim = Eigen::Index{1} << n;
  const Eigen::Index out_dim = (Eigen::Index{1} << (2 * n)) * in_dim;
  Rng train_rng = make_rng(seed, "probe-train");
  const auto train = product_inputs(copies, 32, train_rng);

  Matrix best_v;
  double best = -2.0;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, "probe-restart", r);
    Matrix v = random_isometry(out_dim, in_dim, rng);
    double value = mean(margins(v, train, copies, threshold));
    double sigma = 0.3;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int step = 0; step < 60; ++step) {
      Matrix noise(out_dim, in_dim);
      for (Eigen::Index j = 0; j < in_dim; ++j) {
        for (Eigen::Index i = 0; i < out_dim; ++i) {
          const double re = g(rng);
          const double im = g(rng);
          noise(i, j) = {re, im};
        }
      }
      Eigen::HouseholderQR<Matrix> qr(v + sigma * noise);
      Matrix trial = qr.householderQ() * Matrix::Identity(out_dim, in_dim);
      const double tv = mean(margins(trial, train, copies, threshold));
      if (tv > value) {
        value = tv;
        v = std::move(trial);
        sigma = std::min(1.0, sigma * 1.2);
      } else {
        sigma = std::max(1e-4, sigma * 0.9);
      }
    }
    if (value > best) {
      best = value;
      best_v = v;
    }
  }
  res.train = std::max(best, 0.0);
  if (restarts == 0) return res;

  Rng test_rng = make_rng(seed, "probe-holdout");
  const auto test = margins(best_v, product_inputs(copies, held_out, test_rng), copies, threshold);
  const double mu = mean(test);
  double var = 0.0;
  for (double x : test) var += (x - mu) * (x - mu);
  var /= static_cast<double>(test.size() - 1);
  res.held_out = mu;
  res.held_out_radius = 3.0 * std::sqrt(var / static_cast<double>(test.size()));
  res.exceeds_iid = res.held_out - res.held_out_radius > res.iid_bound;
  return res;
}

}  // namespace flyq::robustness
