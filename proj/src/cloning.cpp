#include "flyq/cloning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "flyq/errors.hpp"
#include "flyq/joint_state.hpp"

namespace flyq::cloning {
namespace {

void require_dim(int d) {
  if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2, got " + std::to_string(d));
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// (1/m!) sum over permutations of the first m digits (base d) of each index;
// `anc` is the number of trailing ancilla values.
Vector symmetrize_leading(const Vector& v, int d, int m, std::size_t anc) {
  const std::size_t clones = ipow(static_cast<std::size_t>(d), m);
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  Vector out = Vector::Zero(v.size());
  std::vector<int> digits(static_cast<std::size_t>(m));
  for (std::size_t c = 0; c < clones; ++c) {
    std::size_t rem = c;
    for (int k = m - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<int>(rem % static_cast<std::size_t>(d));
      rem /= static_cast<std::size_t>(d);
    }
    for (const auto& p : perms) {
      std::size_t src = 0;
      for (int k = 0; k < m; ++k) src = src * static_cast<std::size_t>(d) + static_cast<std::size_t>(digits[static_cast<std::size_t>(p[static_cast<std::size_t>(k)])]);
      out.segment(static_cast<Eigen::Index>(c * anc), static_cast<Eigen::Index>(anc)) +=
          v.segment(static_cast<Eigen::Index>(src * anc), static_cast<Eigen::Index>(anc));
    }
  }
  return out / static_cast<double>(perms.size());
}

CloneOutput marginals(const Vector& joint, const PureState& psi, int m, std::span<const int> dims) {
  CloneOutput out;
  for (int k = 0; k < m; ++k) {
    out.clones.push_back(DensityMatrix::trusted(qudit::reduced_from_vector(joint, dims, static_cast<std::size_t>(k))));
    out.fidelities.push_back(qudit::fidelity_with_pure(out.clones.back(), psi));
    out.sum += out.fidelities.back();
  }
  return out;
}

Matrix thin_q(const Matrix& g) {
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = {re, im};
    }
  }
  return g;
}

struct Candidate {
  double sum = -1.0;
  std::vector<double> fidelities;
};

constexpr std::size_t kChunk = 32;
constexpr int kClimbSteps = 80;

Candidate climb(Matrix v, int d, int m, int anc, Rng& rng) {
  auto fids = haar_average_fidelities(v, d, m, anc);
  double best = std::accumulate(fids.begin(), fids.end(), 0.0);
  double sigma = 0.3;
  for (int step = 0; step < kClimbSteps; ++step) {
    Matrix trial = thin_q(v + sigma * gaussian(v.rows(), v.cols(), rng));
    auto tf = haar_average_fidelities(trial, d, m, anc);
    const double s = std::accumulate(tf.begin(), tf.end(), 0.0);
    if (s > best) {
      best = s;
      fids = std::move(tf);
      v = std::move(trial);
      sigma = std::min(1.0, sigma * 1.2);
    } else {
      sigma = std::max(1e-4, sigma * 0.9);
    }
  }
  return Candidate{best, std::move(fids)};
}

}  // namespace

AsymmetryParams AsymmetryParams::on_constraint(int d, double a) {
  require_dim(d);
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("asymmetry amplitude a must lie in [0, 1]");
  // b^2 + (2a/d) b + a^2 - 1 = 0, nonnegative root.
  const double p = a / d;
  const double b = -p + std::sqrt(p * p - a * a + 1.0);
  return AsymmetryParams{a, std::max(0.0, b)};
}

AsymmetryParams AsymmetryParams::symmetric(int d) {
  require_dim(d);
  const double a = 1.0 / std::sqrt(2.0 + 2.0 / d);
  return AsymmetryParams{a, a};
}

bool AsymmetryParams::satisfies(int d, double tol) const {
  return a >= 0.0 && b >= 0.0 && std::abs(a * a + b * b + 2.0 * a * b / d - 1.0) <= tol;
}

double symmetric_fidelity(int d, int m) {
  require_dim(d);
  if (m < 1) throw std::invalid_argument("clone count must be >= 1");
  return static_cast<double>(2 * m + d - 1) / (static_cast<double>(m) * (d + 1));
}

std::pair<double, double> asymmetric_fidelities(int d, const AsymmetryParams& p) {
  const double k = static_cast<double>(d - 1) / d;
  return {1.0 - k * p.b * p.b, 1.0 - k * p.a * p.a};
}

Matrix symmetric_cloner_isometry(int d, int m) {
  require_dim(d);
  if (m < 1) throw std::invalid_argument("clone count must be >= 1");
  const std::size_t anc = ipow(static_cast<std::size_t>(d), m - 1);
  const std::size_t rows = ipow(static_cast<std::size_t>(d), m) * anc;
  if (rows > qudit::kMaxJointDim) {
    throw CapExceeded("symmetric 1->" + std::to_string(m) + " cloner at d = " + std::to_string(d) +
                      " exceeds the joint-state cap");
  }
  const double scale = std::sqrt(d / binomial(d + m - 1, m));
  Matrix v(static_cast<Eigen::Index>(rows), d);
  for (int k = 0; k < d; ++k) {
    // sum_s |k>|s>|s>, s running over the m-1 blank qudits
    Vector w = Vector::Zero(static_cast<Eigen::Index>(rows));
    for (std::size_t s = 0; s < anc; ++s) {
      w(static_cast<Eigen::Index>((static_cast<std::size_t>(k) * anc + s) * anc + s)) = 1.0;
    }
    v.col(k) = scale * symmetrize_leading(w, d, m, anc);
  }
  return v;
}

CloneOutput symmetric_clone(const PureState& psi, int m) {
  const int d = psi.dim();
  if (m == 1) {
    return CloneOutput{{DensityMatrix::from_pure(psi)}, {1.0}, 1.0};
  }
  const Matrix v = symmetric_cloner_isometry(d, m);
  const Vector joint = v * psi.amplitudes();
  std::vector<int> dims(static_cast<std::size_t>(m), d);
  dims.push_back(static_cast<int>(ipow(static_cast<std::size_t>(d), m - 1)));
  return marginals(joint, psi, m, dims);
}

Matrix asymmetric_cloner_isometry(int d, const AsymmetryParams& params) {
  require_dim(d);
  if (!params.satisfies(d)) {
    throw std::invalid_argument("asymmetry parameters violate a^2 + b^2 + 2ab/d = 1");
  }
  const auto du = static_cast<Eigen::Index>(d);
  const double r = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix v = Matrix::Zero(du * du * du, du);
  for (Eigen::Index k = 0; k < du; ++k) {
    for (Eigen::Index s = 0; s < du; ++s) {
      v((k * du + s) * du + s, k) += params.a * r;  // |k>_A |ss>_BC
      v((s * du + k) * du + s, k) += params.b * r;  // |k>_B |ss>_AC
    }
  }
  return v;
}

CloneOutput asymmetric_clone(const PureState& psi, const AsymmetryParams& params) {
  const int d = psi.dim();
  const Vector joint = asymmetric_cloner_isometry(d, params) * psi.amplitudes();
  const int dims[3] = {d, d, d};
  return marginals(joint, psi, 2, dims);
}

BoundReport bound_sum_fidelity(int d, int m) {
  require_dim(d);
  if (m < 2) throw std::invalid_argument("bound needs m >= 2");
  BoundReport r;
  r.d = d;
  r.m = m;
  r.bound = 1.0 + 2.0 * (m - 1) / (d + 1.0);
  r.envelope = 1.0 + 2.0 * m / static_cast<double>(d);
  Rng rng = make_rng(0x5eed, "bound", static_cast<std::uint64_t>(d * 64 + m));
  r.achieved = symmetric_clone(qudit::haar_random_state(d, rng), m).sum;
  r.gap = r.bound - r.achieved;
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"d", r.d}, {"m", r.m}, {"bound", r.bound}, {"achieved", r.achieved},
          {"gap", r.gap}, {"envelope", r.envelope}};
}

ConstraintSweep sweep_constraint(int d, std::size_t points) {
  require_dim(d);
  if (points < 2) throw std::invalid_argument("sweep needs at least two points");
  ConstraintSweep out;
  out.points = points;
  out.max_sum = -1.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double theta = (std::numbers::pi / 2.0) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double r = 1.0 / std::sqrt(1.0 + std::sin(2.0 * theta) / d);
    const AsymmetryParams p{r * std::cos(theta), r * std::sin(theta)};
    const auto [f0, f1] = asymmetric_fidelities(d, p);
    if (f0 + f1 > out.max_sum) {
      out.max_sum = f0 + f1;
      out.argmax = i;
      out.at_max = p;
    }
  }
  return out;
}

SymmetrizedScore symmetrize(const MultiCloneMap& map, const PureState& reference, int m,
                            std::size_t samples, Rng& rng) {
  if (samples == 0) throw std::invalid_argument("symmetrize needs at least one sample");
  const int d = reference.dim();
  const auto mu = static_cast<std::size_t>(m);
  std::vector<double> orig(mu, 0.0), tw(mu, 0.0), tw_sq(mu, 0.0);
  std::vector<int> perm(mu);
  for (std::size_t s = 0; s < samples; ++s) {
    const Matrix u = qudit::haar_unitary(d, rng);
    const PureState phi = PureState::normalized(u * reference.amplitudes());
    const auto outputs = map(phi);
    if (outputs.size() != mu) throw DimensionMismatch("strategy returned the wrong number of outputs");
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < mu; ++i) {
      // Conjugating back by U^dagger leaves the fidelity with `reference`
      // equal to the fidelity of the raw output with phi.
      orig[i] += qudit::fidelity_with_pure(outputs[i], phi);
      const double f = qudit::fidelity_with_pure(outputs[static_cast<std::size_t>(perm[i])], phi);
      tw[i] += f;
      tw_sq[i] += f * f;
    }
  }
  SymmetrizedScore out;
  const auto n = static_cast<double>(samples);
  for (std::size_t i = 0; i < mu; ++i) {
    out.original.push_back(orig[i] / n);
    out.twirled.push_back(tw[i] / n);
    const double var = std::max(0.0, tw_sq[i] / n - (tw[i] / n) * (tw[i] / n));
    out.twirled_radius.push_back(3.0 * std::sqrt(var / n));
    out.original_sum += out.original.back();
    out.twirled_sum += out.twirled.back();
  }
  return out;
}

std::vector<double> haar_average_fidelities(const Matrix& v, int d, int m, int anc) {
  const std::size_t du = static_cast<std::size_t>(d);
  const std::size_t rows = ipow(du, m) * static_cast<std::size_t>(anc);
  if (static_cast<std::size_t>(v.rows()) != rows || v.cols() != d) {
    throw DimensionMismatch("dilation shape does not match (d, m, anc)");
  }
  std::vector<double> out;
  for (int k = 0; k < m; ++k) {
    // Digit k of an output index and the index with that digit removed.
    const std::size_t stride = ipow(du, m - 1 - k) * static_cast<std::size_t>(anc);
    Vector w = Vector::Zero(static_cast<Eigen::Index>(rows / du));
    for (std::size_t idx = 0; idx < rows; ++idx) {
      const std::size_t digit = (idx / stride) % du;
      const std::size_t rest = (idx / (stride * du)) * stride + idx % stride;
      w(static_cast<Eigen::Index>(rest)) += v(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(digit));
    }
    const double fe = w.squaredNorm() / static_cast<double>(d * d);
    out.push_back((d * fe + 1.0) / (d + 1.0));
  }
  return out;
}

SearchResult randomized_attack_search(int d, int m, std::size_t trials, std::uint64_t seed,
                                      unsigned threads) {
  require_dim(d);
  if (d > 5 || m < 2 || m > 3) throw CapExceeded("attack search is limited to d <= 5 and 2 <= m <= 3");
  SearchResult result;
  result.bound = 1.0 + 2.0 * (m - 1) / (d + 1.0);
  result.trials = trials;
  if (trials == 0) {
    result.best_fidelities.assign(static_cast<std::size_t>(m), 0.0);
    result.best_fidelities[0] = 1.0;
    return result;
  }
  const int anc = static_cast<int>(std::min(ipow(static_cast<std::size_t>(d), m - 1), ipow(static_cast<std::size_t>(d), 3)));
  const auto rows = static_cast<Eigen::Index>(ipow(static_cast<std::size_t>(d), m) * static_cast<std::size_t>(anc));

  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<Candidate> best(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      Rng rng = make_rng(seed, "attack-search", c);
      const std::size_t end = std::min(trials, (c + 1) * kChunk);
      for (std::size_t t = c * kChunk; t < end; ++t) {
        Matrix v;
        if (t == 0) {
          // keep-and-guess: clone 0 is the input, the rest are |0>
          v = Matrix::Zero(rows, d);
          const std::size_t stride = static_cast<std::size_t>(rows) / static_cast<std::size_t>(d);
          for (int a = 0; a < d; ++a) v(static_cast<Eigen::Index>(static_cast<std::size_t>(a) * stride), a) = 1.0;
        } else {
          v = thin_q(gaussian(rows, d, rng));
        }
        Candidate cand = climb(std::move(v), d, m, anc, rng);
        if (cand.sum > best[c].sum) best[c] = std::move(cand);
      }
    }
  };
  unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n = static_cast<unsigned>(std::min<std::size_t>(n, chunks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto it = std::max_element(best.begin(), best.end(),
                                   [](const Candidate& x, const Candidate& y) { return x.sum < y.sum; });
  result.best_sum = it->sum;
  result.best_fidelities = it->fidelities;
  return result;
}

}  // namespace flyq::cloning
