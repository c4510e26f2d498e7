#include "qbc/qcore.hpp"

#include <algorithm>
#include <cmath>

namespace qbc::qcore {

namespace {

void check_dim(int dim, const char* what) {
  if (dim < 2 || dim > kMaxDim) {
    throw std::invalid_argument(std::string(what) + " dimension " +
                                std::to_string(dim) + " outside [2, " +
                                std::to_string(kMaxDim) + "]");
  }
}

/// Rotate a column so its first entry of magnitude > 1e-12 is real positive.
/// Returns the phase factor that was multiplied in, so a paired column can
/// be counter-rotated.
Complex fix_phase(Eigen::Ref<Vector> col) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    const double mag = std::abs(col(i));
    if (mag > 1e-12) {
      const Complex rot = std::conj(col(i)) / mag;
      col *= rot;
      return rot;
    }
  }
  return Complex(1.0, 0.0);
}

/// Greedy completion of k orthonormal columns to a full orthonormal basis.
/// Each step orthogonalizes every remaining standard basis vector against
/// the current set and keeps the one with the largest residual, which keeps
/// the construction well conditioned and deterministic.
void complete_basis(Matrix& cols, int filled) {
  const int dim = static_cast<int>(cols.rows());
  std::vector<bool> used(dim, false);
  while (filled < dim) {
    int best = -1;
    double best_norm = -1.0;
    Vector best_residual;
    for (int c = 0; c < dim; ++c) {
      if (used[c]) continue;
      Vector v = Vector::Zero(dim);
      v(c) = 1.0;
      v -= cols.leftCols(filled) * (cols.leftCols(filled).adjoint() * v);
      const double n = v.norm();
      if (n > best_norm) {
        best_norm = n;
        best = c;
        best_residual = std::move(v);
      }
    }
    used[best] = true;
    best_residual /= best_norm;
    fix_phase(best_residual);
    cols.col(filled++) = best_residual;
  }
}

/// Two rounds of modified Gram-Schmidt, restoring orthonormality to machine
/// precision without reordering or materially rotating the columns.
void polish_orthonormal(Matrix& cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < cols.cols(); ++j) {
      for (int k = 0; k < j; ++k) {
        cols.col(j) -= cols.col(k).dot(cols.col(j)) * cols.col(k);
      }
      cols.col(j).normalize();
    }
  }
}

}  // namespace

StateVector::StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
  check_dim(static_cast<int>(amps_.size()), "state");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > kValidationTol) {
    throw std::invalid_argument("state vector norm " + std::to_string(norm) +
                                " is not 1 within tolerance");
  }
}

StateVector StateVector::basis(int dim, int index) {
  check_dim(dim, "state");
  if (index < 0 || index >= dim) {
    throw std::invalid_argument("basis index " + std::to_string(index) +
                                " outside [0, " + std::to_string(dim) + ")");
  }
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::qubit(Complex a0, Complex a1) {
  Vector v(2);
  v << a0, a1;
  return StateVector(std::move(v));
}

BipartiteState::BipartiteState(Matrix coefficients)
    : m_(std::move(coefficients)) {
  check_dim(dim_a(), "subsystem A");
  check_dim(dim_b(), "subsystem B");
  const double norm = m_.norm();
  if (std::abs(norm - 1.0) > kValidationTol) {
    throw std::invalid_argument("bipartite state norm " +
                                std::to_string(norm) +
                                " is not 1 within tolerance");
  }
}

BipartiteState::BipartiteState(const Vector& amplitudes, int dim_a, int dim_b)
    : BipartiteState([&] {
        if (amplitudes.size() != Eigen::Index(dim_a) * dim_b) {
          throw std::invalid_argument(
              "amplitude vector length " + std::to_string(amplitudes.size()) +
              " does not factor as " + std::to_string(dim_a) + " x " +
              std::to_string(dim_b));
        }
        Matrix m(dim_a, dim_b);
        for (int i = 0; i < dim_a; ++i)
          for (int j = 0; j < dim_b; ++j) m(i, j) = amplitudes(i * dim_b + j);
        return m;
      }()) {}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("density matrix is not square");
  }
  check_dim(dim(), "density matrix");
  const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kValidationTol) {
    throw std::invalid_argument("density matrix is not Hermitian (deviation " +
                                std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(m_.trace() - Complex(1.0, 0.0));
  if (tr_err > kValidationTol) {
    throw std::invalid_argument("density matrix trace differs from 1 by " +
                                std::to_string(tr_err));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kValidationTol) {
    throw std::invalid_argument("density matrix has negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

UnitaryMatrix::UnitaryMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw std::invalid_argument("unitary matrix is not square");
  }
  check_dim(dim(), "unitary");
  const double dev =
      (m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (dev > kValidationTol) {
    throw std::invalid_argument("matrix is not unitary (max deviation " +
                                std::to_string(dev) + ")");
  }
}

int SchmidtDecomposition::rank() const {
  int r = 0;
  while (r < coefficients.size() && coefficients(r) >= kRankCutoff) ++r;
  return r;
}

BipartiteState SchmidtDecomposition::reconstruct() const {
  Matrix m = basis_a * coefficients.asDiagonal() * basis_b.transpose();
  m /= m.norm();
  return BipartiteState(std::move(m));
}

DensityMatrix partial_trace(const BipartiteState& psi, Side traced) {
  const Matrix& m = psi.coefficients();
  Matrix rho = (traced == Side::B) ? Matrix(m * m.adjoint())
                                   : Matrix(m.transpose() * m.conjugate());
  // Clean up the rounding skew so the result always validates.
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

SchmidtDecomposition schmidt_decompose(const BipartiteState& psi) {
  Eigen::JacobiSVD<Matrix> svd(psi.coefficients(),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition out;
  out.coefficients = svd.singularValues();
  out.basis_a = svd.matrixU();
  out.basis_b = svd.matrixV().conjugate();
  for (Eigen::Index j = 0; j < out.basis_a.cols(); ++j) {
    Vector col_a = out.basis_a.col(j);
    const Complex rot = fix_phase(col_a);
    out.basis_a.col(j) = col_a;
    out.basis_b.col(j) *= std::conj(rot);
  }
  return out;
}

UnitaryMatrix construct_cheat_unitary(const BipartiteState& psi0,
                                      const BipartiteState& psi1) {
  if (psi0.dim_a() != psi1.dim_a() || psi0.dim_b() != psi1.dim_b()) {
    throw std::invalid_argument("cheat unitary requires equal dimensions");
  }
  const DensityMatrix rho_b0 = partial_trace(psi0, Side::A);
  const DensityMatrix rho_b1 = partial_trace(psi1, Side::A);
  const double dev = (rho_b0.matrix() - rho_b1.matrix()).cwiseAbs().maxCoeff();
  if (dev > kConcealingTol) {
    throw ConcealingViolation(
        "reduced states on the kept side differ by " + std::to_string(dev) +
        "; the commitments are distinguishable and no local switching "
        "unitary exists");
  }

  // Work in the Schmidt basis of psi0.  Because the reduced states on B
  // agree, psi1 decomposes over the same B-side vectors, and matching the
  // A-side partners index by index defines the switch on the support.
  const SchmidtDecomposition s0 = schmidt_decompose(psi0);
  const int dim_a = psi0.dim_a();
  const int rank = s0.rank();

  Matrix a0 = Matrix::Zero(dim_a, dim_a);
  Matrix a1 = Matrix::Zero(dim_a, dim_a);
  for (int j = 0; j < rank; ++j) {
    a0.col(j) = s0.basis_a.col(j);
    a1.col(j) = psi1.coefficients() * s0.basis_b.col(j).conjugate() /
                s0.coefficients(j);
  }
  complete_basis(a0, rank);
  complete_basis(a1, rank);
  polish_orthonormal(a0);
  polish_orthonormal(a1);
  return UnitaryMatrix(a1 * a0.adjoint());
}

BipartiteState apply_local_unitary(const UnitaryMatrix& u,
                                   const BipartiteState& psi, Side side) {
  const int acted = (side == Side::A) ? psi.dim_a() : psi.dim_b();
  if (u.dim() != acted) {
    throw std::invalid_argument("unitary dimension " + std::to_string(u.dim()) +
                                " does not match subsystem dimension " +
                                std::to_string(acted));
  }
  Matrix m = (side == Side::A)
                 ? Matrix(u.matrix() * psi.coefficients())
                 : Matrix(psi.coefficients() * u.matrix().transpose());
  m /= m.norm();
  return BipartiteState(std::move(m));
}

double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1) {
  if (rho0.dim() != rho1.dim()) {
    throw std::invalid_argument("trace distance requires equal dimensions");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho0.matrix() - rho1.matrix(),
                                           Eigen::EigenvaluesOnly);
  const double d = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

Complex overlap(const BipartiteState& a, const BipartiteState& b) {
  if (a.dim_a() != b.dim_a() || a.dim_b() != b.dim_b()) {
    throw std::invalid_argument("overlap requires equal dimensions");
  }
  return (a.coefficients().conjugate().cwiseProduct(b.coefficients())).sum();
}

Eigen::Vector3d bloch_vector(const StateVector& qubit) {
  if (qubit.dim() != 2) {
    throw std::invalid_argument("Bloch vector requires a qubit");
  }
  const Complex c = qubit[0] * std::conj(qubit[1]);
  return {2.0 * c.real(), -2.0 * c.imag(),
          std::norm(qubit[0]) - std::norm(qubit[1])};
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

UnitaryMatrix random_unitary(int dim, RandomStream& rng) {
  check_dim(dim, "unitary");
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(rng.normal01(), rng.normal01());
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return UnitaryMatrix(std::move(q));
}

BipartiteState random_bipartite_state(int dim_a, int dim_b,
                                      RandomStream& rng) {
  check_dim(dim_a, "subsystem A");
  check_dim(dim_b, "subsystem B");
  Vector v(Eigen::Index(dim_a) * dim_b);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = Complex(rng.normal01(), rng.normal01());
  v /= v.norm();
  return BipartiteState(v, dim_a, dim_b);
}

}  // namespace qbc::qcore
