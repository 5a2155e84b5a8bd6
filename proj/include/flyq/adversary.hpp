#pragma once

// Committer strategies, honest and cheating, and the harness that scores them.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flyq/cloning.hpp"
#include "flyq/protocol.hpp"

namespace flyq::adversary {

using protocol::AliceLab;
using protocol::AliceStrategy;
using protocol::CommitPlan;
using protocol::SystemId;
using qudit::Matrix;

/// Routes the qudit along v_value.
class HonestStrategy : public AliceStrategy {
 public:
  explicit HonestStrategy(int value);
  std::string name() const override { return "honest"; }
  CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const override;
  int value() const { return value_; }

 private:
  int value_;
};

/// Applies a fixed isometry at P and routes selected outputs.
class IsometricStrategy : public AliceStrategy {
 public:
  /// routes[k] is the point output k is sent to, or -1 to keep it at P.
  IsometricStrategy(std::string name, Matrix v, std::vector<int> out_dims, std::vector<int> routes);

  std::string name() const override { return name_; }
  CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const override;

  const qudit::Isometry& isometry() const { return iso_; }
  /// Choi matrix of the commit-phase channel onto all outputs.
  Matrix choi() const;
  /// Tr_out J = I within tol; falls back to V^dagger V = I when the Choi
  /// matrix exceeds the dense cap.
  bool trace_preserving(double tol = 1e-10) const;

 private:
  std::string name_;
  qudit::Isometry iso_;
  std::vector<int> routes_;
};

/// Optimal symmetric 1 -> m cloner, clone i routed along v_i.
std::unique_ptr<IsometricStrategy> clone_symmetric(int d, int m);
/// Asymmetric 1 -> 2 cloner: clone A along v_0, clone B along v_1.
std::unique_ptr<IsometricStrategy> clone_asymmetric(int d, const cloning::AsymmetryParams& params);

/// Coherent superposition of honest commitments: sum_i sqrt(p_i) |i>_A
/// controls which ray carries the qudit. Carriers are (d+1)-level systems
/// whose top level is the vacuum.
class SuperposedStrategy : public AliceStrategy {
 public:
  /// Throws std::invalid_argument unless the weights are nonnegative and sum to 1.
  explicit SuperposedStrategy(std::vector<double> weights);
  std::string name() const override { return "superposed"; }
  CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const override;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

std::unique_ptr<SuperposedStrategy> superposed_commit(double p0, double p1);

enum class BasisPolicy { HaarRandom, Computational };

/// Measures the qudit and sends its estimate along every ray.
class MeasureResendStrategy : public AliceStrategy {
 public:
  explicit MeasureResendStrategy(BasisPolicy policy) : policy_(policy) {}
  std::string name() const override { return "measure-resend"; }
  CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const override;

 private:
  BasisPolicy policy_;
};

/// Test hook: commits to 0, then at Q_0 tries to forward the qudit to Q_1.
class AcausalRelayStrategy : public AliceStrategy {
 public:
  std::string name() const override { return "acausal-relay"; }
  CommitPlan commit(AliceLab& lab, SystemId incoming, int copy) const override;
  std::optional<protocol::UnveilOutput> unveil(AliceLab& lab, const CommitPlan& plan, int point,
                                               int copy) const override;
};

struct StrategyScore {
  std::string name;
  int d = 0;
  int m = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  std::size_t aborted = 0;
  /// Empirical pass rate at each point and its 3 sigma binomial radius.
  std::vector<double> p;
  std::vector<double> radius;
  double sum = 0.0;
  /// 3 sigma radius of the sum from the per-trial spread.
  double sum_radius = 0.0;
  /// Rate of passing at every point in the same run.
  double joint = 0.0;
  double joint_radius = 0.0;
  /// 1 + 2(m-1)/(d+1).
  double bound = 0.0;
  double gap = 0.0;

  /// False when any trial aborted: the score is then undefined.
  bool defined() const { return aborted == 0 && completed > 0; }
};

/// Runs `trials` sessions unveiling at every Q_i. Trial t uses the session
/// seed derive_seed(seed, "trial", t), so the result does not depend on the
/// thread count.
StrategyScore evaluate(const AliceStrategy& strategy, const protocol::ValidatedConfig& cfg,
                       std::size_t trials, std::uint64_t seed, unsigned threads = 0);

/// name,d,m,p_0,...,p_{m-1},sum,bound,gap
std::string csv_header(int m);
std::string csv_row(const StrategyScore& s);
nlohmann::json to_json(const StrategyScore& s);

struct StrategyParams {
  int value = 0;
  double p0 = 0.5;
  double asymmetry_a = 1.0;
  BasisPolicy basis = BasisPolicy::HaarRandom;
};

/// Registry lookup; throws ConfigError for unknown names.
std::unique_ptr<AliceStrategy> make_strategy(std::string_view name, int d, int m,
                                             const StrategyParams& params = {});
std::vector<std::string> strategy_names();

}  // namespace flyq::adversary
