#include "flyq/adversary.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "flyq/errors.hpp"

namespace flyq::adversary {
namespace {

constexpr std::size_t kEvalChunk = 64;

struct Tally {
  std::size_t completed = 0;
  std::size_t aborted = 0;
  std::vector<std::size_t> passes;
  std::size_t joint = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

HonestStrategy::HonestStrategy(int value) : value_(value) {
  if (value < 0) throw std::invalid_argument("committed value must be nonnegative");
}

CommitPlan HonestStrategy::commit(AliceLab& lab, SystemId incoming, int) const {
  if (value_ >= lab.m()) throw std::invalid_argument("committed value exceeds the direction count");
  CommitPlan plan;
  plan.at_point.resize(static_cast<std::size_t>(lab.m()));
  plan.at_point[static_cast<std::size_t>(value_)] = lab.route(incoming, value_);
  return plan;
}

IsometricStrategy::IsometricStrategy(std::string name, Matrix v, std::vector<int> out_dims,
                                     std::vector<int> routes)
    : name_(std::move(name)), iso_(qudit::Isometry::make(std::move(v), std::move(out_dims))),
      routes_(std::move(routes)) {
  if (routes_.size() != iso_.out_dims().size()) {
    throw std::invalid_argument("need one route entry per isometry output");
  }
}

CommitPlan IsometricStrategy::commit(AliceLab& lab, SystemId incoming, int) const {
  const auto ids = lab.apply(incoming, iso_);
  CommitPlan plan;
  plan.at_point.resize(static_cast<std::size_t>(lab.m()));
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const int r = routes_[k];
    if (r >= 0 && r < lab.m()) {
      plan.at_point[static_cast<std::size_t>(r)] = lab.route(ids[k], r);
    } else {
      plan.retained.push_back(ids[k]);
    }
  }
  return plan;
}

Matrix IsometricStrategy::choi() const { return qudit::isometry_choi(iso_.matrix()); }

bool IsometricStrategy::trace_preserving(double tol) const {
  const Matrix& v = iso_.matrix();
  if (v.rows() * v.cols() > qudit::kMaxDenseDim) return (v.adjoint() * v).isIdentity(tol);
  const Matrix j = choi();
  const Eigen::Index din = v.cols();
  const Eigen::Index dout = v.rows();
  for (Eigen::Index a = 0; a < din; ++a) {
    for (Eigen::Index b = 0; b < din; ++b) {
      const qudit::Complex tr = j.block(a * dout, b * dout, dout, dout).trace();
      if (std::abs(tr - qudit::Complex(a == b ? 1.0 : 0.0)) > tol) return false;
    }
  }
  return true;
}

std::unique_ptr<IsometricStrategy> clone_symmetric(int d, int m) {
  std::vector<int> dims(static_cast<std::size_t>(m), d);
  int anc = 1;
  for (int i = 1; i < m; ++i) anc *= d;
  dims.push_back(anc);
  std::vector<int> routes(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) routes[static_cast<std::size_t>(i)] = i;
  routes.push_back(-1);
  return std::make_unique<IsometricStrategy>("clone-symmetric", cloning::symmetric_cloner_isometry(d, m),
                                             std::move(dims), std::move(routes));
}

std::unique_ptr<IsometricStrategy> clone_asymmetric(int d, const cloning::AsymmetryParams& params) {
  return std::make_unique<IsometricStrategy>("clone-asymmetric", cloning::asymmetric_cloner_isometry(d, params),
                                             std::vector<int>{d, d, d}, std::vector<int>{0, 1, -1});
}

SuperposedStrategy::SuperposedStrategy(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.size() < 2) throw std::invalid_argument("superposed commitment needs at least two weights");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("superposition weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("superposition weights must sum to 1");
}

CommitPlan SuperposedStrategy::commit(AliceLab& lab, SystemId incoming, int) const {
  const int d = lab.dim(incoming);
  const int m = lab.m();
  if (static_cast<int>(weights_.size()) != m) throw std::invalid_argument("weight count differs from m");
  qudit::Vector reg(m);
  for (int i = 0; i < m; ++i) reg(i) = std::sqrt(weights_[static_cast<std::size_t>(i)]);
  const SystemId a = lab.prepare(qudit::PureState::normalized(reg));
  const SystemId parts[2] = {incoming, a};
  const SystemId joint = lab.combine(parts);

  // |k>|c> -> carriers with |k> on carrier c and vacuum elsewhere, then |c>.
  const int carrier = d + 1;
  std::size_t out = static_cast<std::size_t>(m);
  for (int i = 0; i < m; ++i) out *= static_cast<std::size_t>(carrier);
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(out), d * m);
  for (int k = 0; k < d; ++k) {
    for (int c = 0; c < m; ++c) {
      std::size_t idx = 0;
      for (int i = 0; i < m; ++i) idx = idx * static_cast<std::size_t>(carrier) + static_cast<std::size_t>(i == c ? k : d);
      idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(c);
      v(static_cast<Eigen::Index>(idx), k * m + c) = 1.0;
    }
  }
  std::vector<int> dims(static_cast<std::size_t>(m), carrier);
  dims.push_back(m);
  const auto ids = lab.apply_isometry(joint, v, dims);
  CommitPlan plan;
  plan.at_point.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) plan.at_point[static_cast<std::size_t>(i)] = lab.route(ids[static_cast<std::size_t>(i)], i);
  plan.retained.push_back(ids.back());
  return plan;
}

std::unique_ptr<SuperposedStrategy> superposed_commit(double p0, double p1) {
  return std::make_unique<SuperposedStrategy>(std::vector<double>{p0, p1});
}

CommitPlan MeasureResendStrategy::commit(AliceLab& lab, SystemId incoming, int) const {
  const int d = lab.dim(incoming);
  const Matrix basis = policy_ == BasisPolicy::HaarRandom ? qudit::haar_unitary(d, lab.rng())
                                                          : Matrix(Matrix::Identity(d, d));
  const int k = lab.measure(incoming, basis);
  const qudit::PureState estimate = qudit::PureState::normalized(basis.col(k));
  CommitPlan plan;
  plan.at_point.resize(static_cast<std::size_t>(lab.m()));
  for (int i = 0; i < lab.m(); ++i) {
    plan.at_point[static_cast<std::size_t>(i)] = lab.route(lab.prepare(estimate), i);
  }
  return plan;
}

CommitPlan AcausalRelayStrategy::commit(AliceLab& lab, SystemId incoming, int) const {
  CommitPlan plan;
  plan.at_point.resize(static_cast<std::size_t>(lab.m()));
  plan.at_point[0] = lab.route(incoming, 0);
  return plan;
}

std::optional<protocol::UnveilOutput> AcausalRelayStrategy::unveil(AliceLab& lab, const CommitPlan& plan,
                                                                   int point, int copy) const {
  if (point == 0 && plan.at_point[0]) {
    const SystemId s = lab.collect(*plan.at_point[0]);
    lab.relay(s, lab.unveil_points()[1]);  // spacelike: must throw
    return protocol::UnveilOutput{s, copy};
  }
  return std::nullopt;
}

StrategyScore evaluate(const AliceStrategy& strategy, const protocol::ValidatedConfig& cfg, std::size_t trials,
                       std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw std::invalid_argument("evaluate needs at least one trial");
  const int m = cfg.m();
  const std::size_t chunks = (trials + kEvalChunk - 1) / kEvalChunk;
  std::vector<Tally> tallies(chunks);
  std::atomic<std::size_t> next{0};
  const auto policy = protocol::unveil_everywhere();
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    try {
      for (std::size_t c = next++; c < chunks && !failed; c = next++) {
        Tally& t = tallies[c];
        t.passes.assign(static_cast<std::size_t>(m), 0);
        const std::size_t end = std::min(trials, (c + 1) * kEvalChunk);
        for (std::size_t i = c * kEvalChunk; i < end; ++i) {
          const auto run = protocol::run_session(cfg.with_seed(derive_seed(seed, "trial", i)), strategy, policy);
          if (run.status != protocol::SessionStatus::Completed) {
            ++t.aborted;
            continue;
          }
          ++t.completed;
          int n = 0;
          for (int k = 0; k < m; ++k) {
            if (run.verdict(k) == protocol::Verdict::Pass) {
              ++t.passes[static_cast<std::size_t>(k)];
              ++n;
            }
          }
          if (n == m) ++t.joint;
          t.sum += n;
          t.sum_sq += static_cast<double>(n) * n;
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  unsigned n = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n = static_cast<unsigned>(std::min<std::size_t>(n, chunks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  Tally total;
  total.passes.assign(static_cast<std::size_t>(m), 0);
  for (const auto& t : tallies) {
    total.completed += t.completed;
    total.aborted += t.aborted;
    total.joint += t.joint;
    total.sum += t.sum;
    total.sum_sq += t.sum_sq;
    for (std::size_t k = 0; k < t.passes.size(); ++k) total.passes[k] += t.passes[k];
  }

  StrategyScore s;
  s.name = strategy.name();
  s.d = cfg.d();
  s.m = m;
  s.trials = trials;
  s.completed = total.completed;
  s.aborted = total.aborted;
  s.bound = 1.0 + 2.0 * (m - 1) / (cfg.d() + 1.0);
  if (total.completed == 0) return s;
  const auto nc = static_cast<double>(total.completed);
  for (std::size_t k = 0; k < total.passes.size(); ++k) {
    const double p = static_cast<double>(total.passes[k]) / nc;
    s.p.push_back(p);
    s.radius.push_back(3.0 * std::sqrt(p * (1.0 - p) / nc));
  }
  s.sum = total.sum / nc;
  const double var = std::max(0.0, total.sum_sq / nc - s.sum * s.sum);
  s.sum_radius = 3.0 * std::sqrt(var / nc);
  s.joint = static_cast<double>(total.joint) / nc;
  s.joint_radius = 3.0 * std::sqrt(s.joint * (1.0 - s.joint) / nc);
  s.gap = s.bound - s.sum;
  return s;
}

std::string csv_header(int m) {
  std::string h = "name,d,m";
  for (int i = 0; i < m; ++i) h += ",p_" + std::to_string(i);
  return h + ",sum,bound,gap";
}

std::string csv_row(const StrategyScore& s) {
  std::string r = s.name + "," + std::to_string(s.d) + "," + std::to_string(s.m);
  for (double p : s.p) r += "," + fmt(p);
  return r + "," + fmt(s.sum) + "," + fmt(s.bound) + "," + fmt(s.gap);
}

nlohmann::json to_json(const StrategyScore& s) {
  return {{"name", s.name},       {"d", s.d},
          {"m", s.m},             {"trials", s.trials},
          {"completed", s.completed}, {"aborted", s.aborted},
          {"p", s.p},             {"p_radius", s.radius},
          {"sum", s.sum},         {"sum_radius", s.sum_radius},
          {"joint", s.joint},     {"joint_radius", s.joint_radius},
          {"bound", s.bound},     {"gap", s.gap}};
}

std::vector<std::string> strategy_names() {
  return {"honest", "clone-symmetric", "clone-asymmetric", "superposed", "measure-resend", "acausal-relay"};
}

std::unique_ptr<AliceStrategy> make_strategy(std::string_view name, int d, int m, const StrategyParams& params) {
  try {
    if (name == "honest") return std::make_unique<HonestStrategy>(params.value);
    if (name == "clone-symmetric") return clone_symmetric(d, m);
    if (name == "clone-asymmetric") {
      if (m != 2) throw ConfigError("clone-asymmetric needs m = 2");
      return clone_asymmetric(d, cloning::AsymmetryParams::on_constraint(d, params.asymmetry_a));
    }
    if (name == "superposed") {
      if (m != 2) throw ConfigError("superposed needs m = 2");
      return superposed_commit(params.p0, 1.0 - params.p0);
    }
    if (name == "measure-resend") return std::make_unique<MeasureResendStrategy>(params.basis);
    if (name == "acausal-relay") return std::make_unique<AcausalRelayStrategy>();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

}  // namespace flyq::adversary
