#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flyq/qudit.hpp"

namespace flyq::qudit {

/// Largest joint state-vector dimension.
inline constexpr std::size_t kMaxJointDim = std::size_t{1} << 16;

/// An isometry whose V^dagger V = I check has already been done, so that it
/// can be applied repeatedly without re-validation.
class Isometry {
 public:
  /// Throws DimensionMismatch if rows differ from the product of out_dims and
  /// std::invalid_argument unless V^dagger V = I within 1e-10.
  static Isometry make(Matrix v, std::vector<int> out_dims);

  const Matrix& matrix() const { return v_; }
  const std::vector<int>& out_dims() const { return out_dims_; }
  int in_dim() const { return static_cast<int>(v_.cols()); }

 private:
  Isometry(Matrix v, std::vector<int> out_dims) : v_(std::move(v)), out_dims_(std::move(out_dims)) {}
  Matrix v_;
  std::vector<int> out_dims_;
};

/// Pure state of a growing collection of subsystems.
///
/// Subsystems are addressed by stable ids. Operations that replace a
/// subsystem (isometries, teleportation) retire the old id and hand out new
/// ones. Mixedness is represented by purification, so nothing is ever traced
/// out of the vector.
class JointState {
 public:
  using SystemId = std::size_t;

  JointState();

  /// Tensors in a fresh subsystem in state psi.
  SystemId add(const PureState& psi);

  /// Replaces `input` by the outputs of the isometry V (rows = product of
  /// out_dims, cols = dim(input)). Throws std::invalid_argument unless
  /// V^dagger V = I within 1e-10.
  std::vector<SystemId> apply_isometry(SystemId input, const Matrix& v, std::span<const int> out_dims);
  std::vector<SystemId> apply(SystemId input, const Isometry& v);

  /// Merges several subsystems into one, in the given order (first most
  /// significant). The old ids are retired.
  SystemId combine(std::span<const SystemId> parts);

  /// Removes a subsystem that is in a product state with the rest and
  /// returns its state. Throws std::logic_error if it is entangled.
  PureState remove(SystemId s);

  void apply_unitary(SystemId s, const Matrix& u);
  void apply_weyl(SystemId s, const WeylOperator& w);
  void apply_weyl_inverse(SystemId s, const WeylOperator& w);

  /// Projective test onto `target`, collapsing the state. `u` is a uniform
  /// [0, 1) draw. Returns true on the target outcome.
  bool project(SystemId s, const Vector& target, double u);

  /// Measurement in the orthonormal basis given by the columns of `basis`.
  int measure(SystemId s, const Matrix& basis, double u);

  /// Generalized Bell measurement on (a, b); outcome j projects onto
  /// (W_j^dagger (x) I)|Phi>.
  int bell_measure(SystemId a, SystemId b, double u);
  /// As bell_measure, then drops the measured pair from the state.
  int bell_measure_discard(SystemId a, SystemId b, double u);

  /// Reduced density matrix of one subsystem.
  DensityMatrix reduced(SystemId s) const;

  /// State of a subsystem that is in a product state with the rest.
  /// Throws std::logic_error if the reduced state is not pure.
  PureState factor(SystemId s) const;

  int dim(SystemId s) const;
  bool alive(SystemId s) const;
  std::size_t total_dim() const { return static_cast<std::size_t>(state_.size()); }

 private:
  std::size_t position(SystemId s) const;
  void check_size(std::size_t new_dim) const;
  // Applies `op` (dk x dk) to the subsystem at position `pos`.
  void apply_local(std::size_t pos, const Matrix& op);
  std::size_t left_dim(std::size_t pos) const;
  std::size_t right_dim(std::size_t pos) const;
  void normalize();
  std::vector<SystemId> replace(std::size_t pos, Vector next, std::span<const int> out_dims);
  int bell(SystemId a, SystemId b, double u, bool discard);

  Vector state_;
  std::vector<SystemId> order_;  // ids in tensor order, most significant first
  std::vector<int> dims_;        // parallel to order_
  SystemId next_id_ = 0;
};

}  // namespace flyq::qudit
