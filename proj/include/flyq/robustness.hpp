#pragma once

// Lossy and noisy channels, the N-copy labelled protocol with threshold
// acceptance, and the cheating margins eps(d, N, M).

#include <cstdint>
#include <vector>

#include "flyq/protocol.hpp"

namespace flyq::robustness {

struct LegNoise {
  /// Probability the qudit is lost on this leg.
  double loss = 0.0;
  /// Probability of a uniformly random Weyl error on this leg.
  double depolarizing = 0.0;
};

/// Independent loss and depolarizing events on the three legs Bob -> P,
/// P -> Q_i and Q_i -> Q'_i, followed by a detector with finite efficiency.
class NoiseModel : public protocol::TransmissionNoise {
 public:
  /// Throws ConfigError if any probability lies outside [0, 1].
  NoiseModel(LegNoise bob_to_p, LegNoise p_to_q, LegNoise q_to_receipt, double detector_efficiency = 1.0);

  static NoiseModel none();
  /// All loss and error on the committer's leg P -> Q_i.
  static NoiseModel single_leg(double loss, double depolarizing = 0.0);

  protocol::LegEffect transmit(protocol::Leg leg, int dim, Rng& channel) const override;
  bool detect(Rng& channel) const override;

  const LegNoise& leg(protocol::Leg l) const;
  double detector_efficiency() const { return efficiency_; }
  /// Probability that a copy reaches the detector and clicks.
  double survival() const { return survival_; }
  /// Probability that no depolarizing error occurs on any leg.
  double error_free() const { return error_free_; }
  /// Probability that an honestly routed copy passes Bob's test.
  double per_copy_pass(int d) const;

 private:
  LegNoise legs_[3];
  double efficiency_;
  double survival_;
  double error_free_;
};

struct RedundancyParams {
  int copies = 1;     // N
  int threshold = 1;  // M
  int d = 2;

  /// Throws ConfigError unless 1 <= M <= N and d >= 2.
  void validate() const;
  /// (M - N/2) in units of the standard deviation sqrt(N)/2 of a fair coin count.
  double margin_sigmas() const;
};

struct RedundantResult {
  protocol::Transcript transcript;
  /// Number of labelled copies that passed at each point.
  std::vector<int> passes;
  /// passes[i] >= M.
  std::vector<bool> accepted;
};

/// N labelled copies in one window at P; Bob accepts at Q_i iff at least M
/// copies returned there pass.
RedundantResult run_redundant_session(const protocol::ValidatedConfig& cfg, const RedundancyParams& params,
                                      const NoiseModel& noise, const protocol::AliceStrategy& alice,
                                      const protocol::UnveilPolicy& policy);

/// P(X >= k) for X ~ Binomial(n, p).
double binomial_tail(int n, double p, int k);

double honest_accept_probability(const RedundancyParams& params, const NoiseModel& noise);

enum class AttackModel {
  /// Every copy attacked with the symmetric cloner: per-copy cap 1/2 + 1/(d+1).
  IidSymmetric,
  /// Every copy attacked with the same asymmetric cloner, maximized over the
  /// constraint curve.
  IidAsymmetric,
};

std::string_view to_string(AttackModel a);

/// max(0, p'_0 + p'_1 - 1) under the given independent-copy attack model.
double cheat_epsilon(int d, int copies, int threshold, AttackModel model = AttackModel::IidSymmetric);

struct ProbeResult {
  int copies = 0;
  int threshold = 0;
  std::size_t restarts = 0;
  /// Best p'_0 + p'_1 - 1 on the training inputs.
  double train = 0.0;
  /// The same isometry on held-out Haar inputs, with its 3 sigma radius.
  double held_out = 0.0;
  double held_out_radius = 0.0;
  double iid_bound = 0.0;
  /// held_out - radius exceeds iid_bound.
  bool exceeds_iid = false;
};

/// Randomized search over collective isometries on N <= 3 qubit copies
/// (d = 2). A falsification probe for the independent-copy model, not a bound.
ProbeResult collective_attack_probe(int copies, int threshold, std::size_t restarts, std::uint64_t seed,
                                    std::size_t held_out = 2000);

}  // namespace flyq::robustness
