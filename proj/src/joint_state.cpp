#include "flyq/joint_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "flyq/errors.hpp"

namespace flyq::qudit {
namespace {

using ColMap = Eigen::Map<Matrix>;
using ConstColMap = Eigen::Map<const Matrix>;

// Index of the first probability bucket that `u` falls into.
int sample_index(const std::vector<double>& probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  double acc = 0.0;
  const double target = u * total;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    acc += probs[j];
    if (target < acc) return static_cast<int>(j);
  }
  // Rounding at the top edge: last outcome with nonzero weight.
  for (std::size_t j = probs.size(); j-- > 0;) {
    if (probs[j] > 0.0) return static_cast<int>(j);
  }
  return 0;
}

}  // namespace

JointState::JointState() : state_(Vector::Ones(1)) {}

void JointState::check_size(std::size_t new_dim) const {
  if (new_dim > kMaxJointDim) {
    throw CapExceeded("joint state dimension " + std::to_string(new_dim) + " exceeds cap " +
                      std::to_string(kMaxJointDim));
  }
}

std::size_t JointState::position(SystemId s) const {
  const auto it = std::find(order_.begin(), order_.end(), s);
  if (it == order_.end()) {
    throw std::invalid_argument("unknown or retired subsystem id " + std::to_string(s));
  }
  return static_cast<std::size_t>(it - order_.begin());
}

bool JointState::alive(SystemId s) const {
  return std::find(order_.begin(), order_.end(), s) != order_.end();
}

int JointState::dim(SystemId s) const { return dims_[position(s)]; }

std::size_t JointState::left_dim(std::size_t pos) const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < pos; ++i) n *= static_cast<std::size_t>(dims_[i]);
  return n;
}

std::size_t JointState::right_dim(std::size_t pos) const {
  std::size_t n = 1;
  for (std::size_t i = pos + 1; i < dims_.size(); ++i) n *= static_cast<std::size_t>(dims_[i]);
  return n;
}

void JointState::normalize() {
  const double n = state_.norm();
  if (n == 0.0) throw std::logic_error("joint state collapsed to zero norm");
  state_ /= n;
}

JointState::SystemId JointState::add(const PureState& psi) {
  const auto d = static_cast<std::size_t>(psi.dim());
  check_size(total_dim() * d);
  Vector next(static_cast<Eigen::Index>(total_dim() * d));
  for (Eigen::Index i = 0; i < state_.size(); ++i) {
    next.segment(i * static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) =
        state_(i) * psi.amplitudes();
  }
  state_ = std::move(next);
  order_.push_back(next_id_);
  dims_.push_back(psi.dim());
  return next_id_++;
}

void JointState::apply_local(std::size_t pos, const Matrix& op) {
  const auto dk = static_cast<Eigen::Index>(dims_[pos]);
  const auto left = static_cast<Eigen::Index>(left_dim(pos));
  const auto right = static_cast<Eigen::Index>(right_dim(pos));
  for (Eigen::Index l = 0; l < left; ++l) {
    ColMap block(state_.data() + l * dk * right, right, dk);
    const Matrix updated = block * op.transpose();
    block = updated;
  }
}

void JointState::apply_unitary(SystemId s, const Matrix& u) {
  const std::size_t pos = position(s);
  if (u.rows() != dims_[pos] || u.cols() != dims_[pos]) {
    throw DimensionMismatch("unitary shape does not match subsystem dimension");
  }
  if (!(u.adjoint() * u).isIdentity(1e-10)) throw std::invalid_argument("operator is not unitary");
  apply_local(pos, u);
}

void JointState::apply_weyl(SystemId s, const WeylOperator& w) {
  const std::size_t pos = position(s);
  if (w.dim() != dims_[pos]) throw DimensionMismatch("Weyl dimension does not match subsystem");
  apply_local(pos, w.matrix());
}

void JointState::apply_weyl_inverse(SystemId s, const WeylOperator& w) {
  const std::size_t pos = position(s);
  if (w.dim() != dims_[pos]) throw DimensionMismatch("Weyl dimension does not match subsystem");
  apply_local(pos, w.matrix().adjoint());
}

Isometry Isometry::make(Matrix v, std::vector<int> out_dims) {
  Eigen::Index out = 1;
  for (int d : out_dims) out *= d;
  if (v.rows() != out) throw DimensionMismatch("isometry rows do not match output dimensions");
  if (!(v.adjoint() * v).isIdentity(1e-10)) throw std::invalid_argument("map is not an isometry");
  return Isometry(std::move(v), std::move(out_dims));
}

std::vector<JointState::SystemId> JointState::apply_isometry(SystemId input, const Matrix& v,
                                                             std::span<const int> out_dims) {
  const Isometry iso = Isometry::make(v, std::vector<int>(out_dims.begin(), out_dims.end()));
  return apply(input, iso);
}

std::vector<JointState::SystemId> JointState::apply(SystemId input, const Isometry& iso) {
  const std::size_t pos = position(input);
  const auto dk = static_cast<Eigen::Index>(dims_[pos]);
  const Matrix& v = iso.matrix();
  const Eigen::Index out = v.rows();
  if (v.cols() != dk) throw DimensionMismatch("isometry input dimension does not match subsystem");
  const auto left = static_cast<Eigen::Index>(left_dim(pos));
  const auto right = static_cast<Eigen::Index>(right_dim(pos));
  check_size(static_cast<std::size_t>(left * out * right));

  Vector next(left * out * right);
  const Matrix vt = v.transpose();
  for (Eigen::Index l = 0; l < left; ++l) {
    ConstColMap block(state_.data() + l * dk * right, right, dk);
    ColMap target(next.data() + l * out * right, right, out);
    target.noalias() = block * vt;
  }
  return replace(pos, std::move(next), iso.out_dims());
}

std::vector<JointState::SystemId> JointState::replace(std::size_t pos, Vector next,
                                                      std::span<const int> out_dims) {
  state_ = std::move(next);
  std::vector<SystemId> ids;
  std::vector<SystemId> order;
  std::vector<int> dims;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (i != pos) {
      order.push_back(order_[i]);
      dims.push_back(dims_[i]);
      continue;
    }
    for (int d : out_dims) {
      ids.push_back(next_id_);
      order.push_back(next_id_++);
      dims.push_back(d);
    }
  }
  order_ = std::move(order);
  dims_ = std::move(dims);
  return ids;
}

JointState::SystemId JointState::combine(std::span<const SystemId> parts) {
  if (parts.empty()) throw std::invalid_argument("combine needs at least one subsystem");
  std::vector<std::size_t> picked;
  for (SystemId s : parts) {
    const std::size_t p = position(s);
    if (std::find(picked.begin(), picked.end(), p) != picked.end()) {
      throw std::invalid_argument("combine lists a subsystem twice");
    }
    picked.push_back(p);
  }
  // New tensor order: untouched subsystems first, then `parts` in order.
  std::vector<std::size_t> new_order;
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (std::find(picked.begin(), picked.end(), i) == picked.end()) new_order.push_back(i);
  }
  new_order.insert(new_order.end(), picked.begin(), picked.end());

  const std::size_t n = total_dim();
  const std::size_t k = order_.size();
  std::vector<std::size_t> old_stride(k);
  for (std::size_t i = 0; i < k; ++i) old_stride[i] = right_dim(i);
  Vector next(state_.size());
  std::vector<std::size_t> digit(k);
  for (std::size_t idx = 0; idx < n; ++idx) {
    for (std::size_t i = 0; i < k; ++i) digit[i] = (idx / old_stride[i]) % static_cast<std::size_t>(dims_[i]);
    std::size_t target = 0;
    for (std::size_t i : new_order) target = target * static_cast<std::size_t>(dims_[i]) + digit[i];
    next(static_cast<Eigen::Index>(target)) = state_(static_cast<Eigen::Index>(idx));
  }
  state_ = std::move(next);

  std::vector<SystemId> order;
  std::vector<int> dims;
  int merged = 1;
  for (std::size_t i = 0; i + parts.size() < new_order.size(); ++i) {
    order.push_back(order_[new_order[i]]);
    dims.push_back(dims_[new_order[i]]);
  }
  for (std::size_t p : picked) merged *= dims_[p];
  order.push_back(next_id_);
  dims.push_back(merged);
  order_ = std::move(order);
  dims_ = std::move(dims);
  return next_id_++;
}

PureState JointState::remove(SystemId s) {
  const PureState phi = factor(s);
  const std::size_t pos = position(s);
  const auto dk = static_cast<Eigen::Index>(dims_[pos]);
  const auto left = static_cast<Eigen::Index>(left_dim(pos));
  const auto right = static_cast<Eigen::Index>(right_dim(pos));
  Vector next(left * right);
  const Vector conj = phi.amplitudes().conjugate();
  for (Eigen::Index l = 0; l < left; ++l) {
    ConstColMap block(state_.data() + l * dk * right, right, dk);
    next.segment(l * right, right) = block * conj;
  }
  state_ = std::move(next);
  order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(pos));
  dims_.erase(dims_.begin() + static_cast<std::ptrdiff_t>(pos));
  normalize();
  return phi;
}

bool JointState::project(SystemId s, const Vector& target, double u) {
  const std::size_t pos = position(s);
  const auto dk = static_cast<Eigen::Index>(dims_[pos]);
  if (target.size() != dk) throw DimensionMismatch("projector target dimension mismatch");
  const auto left = static_cast<Eigen::Index>(left_dim(pos));
  const auto right = static_cast<Eigen::Index>(right_dim(pos));

  // Overlap of every block with the target: (right x 1) per left index.
  Matrix overlap(right, left);
  for (Eigen::Index l = 0; l < left; ++l) {
    ConstColMap block(state_.data() + l * dk * right, right, dk);
    overlap.col(l) = block * target.conjugate();
  }
  const double p = std::clamp(overlap.squaredNorm(), 0.0, 1.0);
  bool pass = u < p;
  if (pass && p < 1e-300) pass = false;
  if (!pass && 1.0 - p < 1e-15) pass = true;

  for (Eigen::Index l = 0; l < left; ++l) {
    ColMap block(state_.data() + l * dk * right, right, dk);
    const Matrix on_target = overlap.col(l) * target.transpose();
    if (pass) {
      block = on_target;
    } else {
      block -= on_target;
    }
  }
  normalize();
  return pass;
}

int JointState::measure(SystemId s, const Matrix& basis, double u) {
  const std::size_t pos = position(s);
  const auto dk = static_cast<Eigen::Index>(dims_[pos]);
  if (basis.rows() != dk || basis.cols() != dk) throw DimensionMismatch("basis shape mismatch");
  if (!(basis.adjoint() * basis).isIdentity(1e-10)) {
    throw std::invalid_argument("measurement basis is not orthonormal");
  }
  const auto left = static_cast<Eigen::Index>(left_dim(pos));
  const auto right = static_cast<Eigen::Index>(right_dim(pos));
  std::vector<Matrix> coeffs;
  coeffs.reserve(static_cast<std::size_t>(left));
  std::vector<double> probs(static_cast<std::size_t>(dk), 0.0);
  const Matrix conj_basis = basis.conjugate();
  for (Eigen::Index l = 0; l < left; ++l) {
    ConstColMap block(state_.data() + l * dk * right, right, dk);
    coeffs.push_back(block * conj_basis);
    for (Eigen::Index j = 0; j < dk; ++j) {
      probs[static_cast<std::size_t>(j)] += coeffs.back().col(j).squaredNorm();
    }
  }
  const int j = sample_index(probs, u);
  for (Eigen::Index l = 0; l < left; ++l) {
    ColMap block(state_.data() + l * dk * right, right, dk);
    block = coeffs[static_cast<std::size_t>(l)].col(j) * basis.col(j).transpose();
  }
  normalize();
  return j;
}

int JointState::bell_measure(SystemId a, SystemId b, double u) { return bell(a, b, u, false); }

int JointState::bell_measure_discard(SystemId a, SystemId b, double u) { return bell(a, b, u, true); }

int JointState::bell(SystemId a, SystemId b, double u, bool discard) {
  const std::size_t pa = position(a);
  const std::size_t pb = position(b);
  if (pa == pb) throw std::invalid_argument("Bell measurement needs two distinct subsystems");
  const int d = dims_[pa];
  if (dims_[pb] != d) throw DimensionMismatch("Bell measurement needs equal dimensions");
  const std::size_t sa = right_dim(pa);
  const std::size_t sb = right_dim(pb);
  const auto du = static_cast<std::size_t>(d);
  const std::size_t n = total_dim();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Complex> omega(du);
  for (std::size_t k = 0; k < du; ++k) {
    omega[k] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / d);
  }

  // Base indices: every full index whose digits at a and b are zero.
  std::vector<std::size_t> bases;
  bases.reserve(n / (du * du));
  for (std::size_t idx = 0; idx < n; ++idx) {
    if ((idx / sa) % du == 0 && (idx / sb) % du == 0) bases.push_back(idx);
  }

  // Contracted amplitudes for outcome j = shift * d + clock:
  // w_j[base] = d^{-1/2} sum_x w^{clock x} v[base + x sa + (x + shift) sb].
  auto contract = [&](int shift, int clock, std::size_t base) {
    Complex acc = 0.0;
    for (std::size_t x = 0; x < du; ++x) {
      const std::size_t y = (x + static_cast<std::size_t>(shift)) % du;
      acc += omega[(static_cast<std::size_t>(clock) * x) % du] * state_(static_cast<Eigen::Index>(base + x * sa + y * sb));
    }
    return acc * inv_sqrt_d;
  };

  std::vector<double> probs(du * du, 0.0);
  for (int shift = 0; shift < d; ++shift) {
    for (int clock = 0; clock < d; ++clock) {
      double p = 0.0;
      for (std::size_t base : bases) p += std::norm(contract(shift, clock, base));
      probs[static_cast<std::size_t>(shift * d + clock)] = p;
    }
  }
  const int j = sample_index(probs, u);
  const int shift = j / d;
  const int clock = j % d;

  if (discard) {
    // Bases enumerate the remaining subsystems in tensor order.
    Vector rest(static_cast<Eigen::Index>(bases.size()));
    for (std::size_t i = 0; i < bases.size(); ++i) rest(static_cast<Eigen::Index>(i)) = contract(shift, clock, bases[i]);
    state_ = std::move(rest);
    const std::size_t hi = std::max(pa, pb);
    const std::size_t lo = std::min(pa, pb);
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(hi));
    dims_.erase(dims_.begin() + static_cast<std::ptrdiff_t>(hi));
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(lo));
    dims_.erase(dims_.begin() + static_cast<std::ptrdiff_t>(lo));
    normalize();
    return j;
  }

  Vector next = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t base : bases) {
    const Complex w = contract(shift, clock, base);
    for (std::size_t x = 0; x < du; ++x) {
      const std::size_t y = (x + static_cast<std::size_t>(shift)) % du;
      // Bell vector component B_j[x, y] = w^{-clock x} / sqrt(d).
      const Complex amp = std::conj(omega[(static_cast<std::size_t>(clock) * x) % du]) * inv_sqrt_d;
      next(static_cast<Eigen::Index>(base + x * sa + y * sb)) = amp * w;
    }
  }
  state_ = std::move(next);
  normalize();
  return j;
}

DensityMatrix JointState::reduced(SystemId s) const {
  const std::size_t pos = position(s);
  return DensityMatrix::trusted(reduced_from_vector(state_, dims_, pos));
}

PureState JointState::factor(SystemId s) const {
  const DensityMatrix rho = reduced(s);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Eigen::Index top = rho.dim() - 1;
  if (es.eigenvalues()(top) < 1.0 - 1e-9) {
    throw std::logic_error("subsystem is entangled with the rest of the joint state");
  }
  return PureState::normalized(es.eigenvectors().col(top));
}

}  // namespace flyq::qudit
