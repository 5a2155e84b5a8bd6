#include "flyq/qudit.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "flyq/errors.hpp"
#include "flyq/joint_state.hpp"

namespace flyq::qudit {
namespace {

void require_dim(int d) {
  if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2, got " + std::to_string(d));
}

Complex complex_gaussian(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

std::size_t product(std::span<const int> dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
  require_dim(static_cast<int>(amplitudes_.size()));
  if (std::abs(amplitudes_.norm() - 1.0) > kAlgebraicTol) {
    throw std::invalid_argument("pure state is not normalized (norm " +
                                std::to_string(amplitudes_.norm()) + ")");
  }
}

PureState PureState::normalized(Vector amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  return PureState(amplitudes / n);
}

PureState PureState::basis(int d, int k) {
  require_dim(d);
  if (k < 0 || k >= d) throw std::invalid_argument("basis index out of range");
  Vector v = Vector::Zero(d);
  v(k) = 1.0;
  return PureState(std::move(v));
}

std::vector<std::string> density_violations(const Matrix& m) {
  std::vector<std::string> out;
  if (m.rows() != m.cols() || m.rows() < 1) {
    out.emplace_back("not square");
    return out;
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kAlgebraicTol) out.emplace_back("not Hermitian");
  if (std::abs(m.trace() - Complex(1.0)) > kAlgebraicTol) out.emplace_back("trace differs from 1");
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kEigenTol) out.emplace_back("negative eigenvalue");
  return out;
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  const auto v = density_violations(m_);
  if (!v.empty()) throw std::invalid_argument("invalid density matrix: " + v.front());
}

DensityMatrix::DensityMatrix(Matrix m, Trusted) : m_(std::move(m)) {
  assert(density_violations(m_).empty());
}

DensityMatrix DensityMatrix::trusted(Matrix m) { return DensityMatrix(std::move(m), Trusted{}); }

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(psi.projector(), Trusted{});
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  require_dim(d);
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), Trusted{});
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

PureState haar_random_state(int d, Rng& rng) {
  require_dim(d);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = complex_gaussian(rng);
  return PureState::normalized(std::move(v));
}

Matrix haar_unitary(int d, Rng& rng) {
  require_dim(d);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = complex_gaussian(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

double fidelity_with_pure(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dim() != psi.dim()) throw DimensionMismatch("fidelity: dimension mismatch");
  const Complex f = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  return std::clamp(f.real(), 0.0, 1.0);
}

double fidelity_with_pure(const PureState& phi, const PureState& psi) {
  if (phi.dim() != psi.dim()) throw DimensionMismatch("fidelity: dimension mismatch");
  return std::clamp(std::norm(psi.amplitudes().dot(phi.amplitudes())), 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("trace distance: dimension mismatch");
  const Matrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

TestOutcome projective_verify(const PureState& expected, const DensityMatrix& returned, Rng& rng) {
  const double p = fidelity_with_pure(returned, expected);
  return uniform01(rng) < p ? TestOutcome::Pass : TestOutcome::Fail;
}

TestOutcome projective_verify(const PureState& expected, const PureState& returned, Rng& rng) {
  const double p = fidelity_with_pure(returned, expected);
  return uniform01(rng) < p ? TestOutcome::Pass : TestOutcome::Fail;
}

WeylOperator::WeylOperator(int d, int j) : d_(d), a_(0), b_(0) {
  require_dim(d);
  if (j < 0 || j >= d * d) {
    throw std::invalid_argument("Weyl index " + std::to_string(j) + " out of range for d = " +
                                std::to_string(d));
  }
  a_ = j / d;
  b_ = j % d;
}

Matrix WeylOperator::matrix() const {
  Matrix m = Matrix::Zero(d_, d_);
  for (int k = 0; k < d_; ++k) {
    // X^a Z^b |k> = w^{b k} |k + a>
    m((k + a_) % d_, k) = std::polar(1.0, 2.0 * std::numbers::pi * b_ * k / d_);
  }
  return m;
}

Vector WeylOperator::apply(const Vector& v) const {
  if (v.size() != d_) throw DimensionMismatch("Weyl apply: dimension mismatch");
  Vector out(d_);
  for (int k = 0; k < d_; ++k) {
    out((k + a_) % d_) = std::polar(1.0, 2.0 * std::numbers::pi * ((static_cast<long>(b_) * k) % d_) / d_) * v(k);
  }
  return out;
}

Vector WeylOperator::apply_inverse(const Vector& v) const {
  if (v.size() != d_) throw DimensionMismatch("Weyl apply: dimension mismatch");
  Vector out(d_);
  for (int k = 0; k < d_; ++k) {
    out(k) = std::polar(1.0, -2.0 * std::numbers::pi * ((static_cast<long>(b_) * k) % d_) / d_) * v((k + a_) % d_);
  }
  return out;
}

PureState WeylOperator::apply(const PureState& psi) const {
  return PureState::normalized(apply(psi.amplitudes()));
}

PureState WeylOperator::apply_inverse(const PureState& psi) const {
  return PureState::normalized(apply_inverse(psi.amplitudes()));
}

TeleportResource TeleportResource::make(int d, spacetime::Event source, spacetime::Event target) {
  require_dim(d);
  Vector pair = Vector::Zero(d * d);
  for (int k = 0; k < d; ++k) pair(k * d + k) = 1.0 / std::sqrt(static_cast<double>(d));
  return TeleportResource{d, std::move(pair), source, target};
}

DensityMatrix TeleportResource::reduced(int side) const {
  const int dims[2] = {d, d};
  return DensityMatrix::trusted(reduced_from_vector(pair, dims, side == 0 ? 0 : 1));
}

TeleportResult teleport(const PureState& input, const TeleportResource& resource, Rng& rng) {
  if (input.dim() != resource.d) throw DimensionMismatch("teleport: dimension mismatch");
  JointState world;
  const auto in = world.add(input);
  // The pair is added as one system and split by a trivial isometry.
  const auto pair = world.add(PureState(resource.pair));
  const int halves[2] = {resource.d, resource.d};
  const Matrix id = Matrix::Identity(resource.d * resource.d, resource.d * resource.d);
  const auto ends = world.apply_isometry(pair, id, halves);
  const int j = world.bell_measure(in, ends[0], uniform01(rng));
  return TeleportResult{j, world.factor(ends[1])};
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() * b.dim() > kMaxDenseDim) throw CapExceeded("tensor product exceeds dense cap");
  return DensityMatrix::trusted(tensor(a.matrix(), b.matrix()));
}

Matrix partial_trace(const Matrix& m, std::span<const int> dims, std::size_t keep) {
  if (keep >= dims.size()) throw DimensionMismatch("partial trace: subsystem index out of range");
  const std::size_t n = product(dims);
  if (static_cast<std::size_t>(m.rows()) != n || m.rows() != m.cols()) {
    throw DimensionMismatch("partial trace: matrix does not match subsystem dimensions");
  }
  std::size_t left = 1;
  for (std::size_t i = 0; i < keep; ++i) left *= static_cast<std::size_t>(dims[i]);
  const auto dk = static_cast<std::size_t>(dims[keep]);
  const std::size_t right = n / (left * dk);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      for (std::size_t a = 0; a < dk; ++a) {
        for (std::size_t b = 0; b < dk; ++b) {
          const auto row = static_cast<Eigen::Index>((l * dk + a) * right + r);
          const auto col = static_cast<Eigen::Index>((l * dk + b) * right + r);
          out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += m(row, col);
        }
      }
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::size_t keep) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), dims, keep));
}

Matrix reduced_from_vector(const Vector& v, std::span<const int> dims, std::size_t keep) {
  if (keep >= dims.size()) throw DimensionMismatch("reduced state: subsystem index out of range");
  const std::size_t n = product(dims);
  if (static_cast<std::size_t>(v.size()) != n) {
    throw DimensionMismatch("reduced state: vector does not match subsystem dimensions");
  }
  std::size_t left = 1;
  for (std::size_t i = 0; i < keep; ++i) left *= static_cast<std::size_t>(dims[i]);
  const auto dk = static_cast<Eigen::Index>(dims[keep]);
  const auto right = static_cast<Eigen::Index>(n / (left * static_cast<std::size_t>(dk)));
  Matrix out = Matrix::Zero(dk, dk);
  for (std::size_t l = 0; l < left; ++l) {
    Eigen::Map<const Matrix> block(v.data() + static_cast<Eigen::Index>(l) * dk * right, right, dk);
    out.noalias() += block.transpose() * block.conjugate();
  }
  return out;
}

Matrix identity_choi(int d) {
  require_dim(d);
  Vector phi = Vector::Zero(d * d);
  for (int k = 0; k < d; ++k) phi(k * d + k) = 1.0;
  return phi * phi.adjoint();
}

Matrix depolarizing_choi(int d) {
  require_dim(d);
  return Matrix::Identity(d * d, d * d) / static_cast<double>(d);
}

Matrix isometry_choi(const Matrix& v) {
  const Eigen::Index din = v.cols();
  const Eigen::Index dout = v.rows();
  if (din * dout > kMaxDenseDim) throw CapExceeded("Choi matrix exceeds dense cap");
  // J = sum_ij |i><j| (x) V|i><j|V^dagger = |w><w| with w = sum_i |i> (x) V|i>.
  Vector w = Vector::Zero(din * dout);
  for (Eigen::Index i = 0; i < din; ++i) w.segment(i * dout, dout) = v.col(i);
  return w * w.adjoint();
}

DensityMatrix apply_channel(const Matrix& choi, const DensityMatrix& rho) {
  const Eigen::Index din = rho.dim();
  if (choi.rows() != choi.cols() || choi.rows() % din != 0) {
    throw DimensionMismatch("Choi matrix shape does not match input dimension");
  }
  const Eigen::Index dout = choi.rows() / din;
  if ((choi - choi.adjoint()).cwiseAbs().maxCoeff() > kAlgebraicTol) {
    throw std::invalid_argument("Choi matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (choi + choi.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kEigenTol) {
    throw std::invalid_argument("Choi matrix is not positive semidefinite");
  }
  // Trace preservation: Tr_out J = I_in.
  Matrix tr_out = Matrix::Zero(din, din);
  for (Eigen::Index i = 0; i < din; ++i) {
    for (Eigen::Index j = 0; j < din; ++j) {
      tr_out(i, j) = choi.block(i * dout, j * dout, dout, dout).trace();
    }
  }
  if (!tr_out.isIdentity(1e-10)) throw std::invalid_argument("Choi matrix is not trace preserving");

  Matrix out = Matrix::Zero(dout, dout);
  for (Eigen::Index i = 0; i < din; ++i) {
    for (Eigen::Index j = 0; j < din; ++j) {
      // E(rho) = sum_ij rho_ij E(|i><j|)
      out += rho.matrix()(i, j) * choi.block(i * dout, j * dout, dout, dout);
    }
  }
  return DensityMatrix::trusted(0.5 * (out + out.adjoint()));
}

nlohmann::json to_json(const PureState& psi) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i) {
    arr.push_back({psi.amplitudes()(i).real(), psi.amplitudes()(i).imag()});
  }
  return arr;
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < rho.dim(); ++j) {
      row.push_back({rho.matrix()(i, j).real(), rho.matrix()(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace flyq::qudit
