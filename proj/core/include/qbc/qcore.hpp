#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "qbc/rng.hpp"

namespace qbc::qcore {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Validation tolerance for norms, traces, Hermiticity and unitarity.
inline constexpr double kValidationTol = 1e-10;
/// Schmidt coefficients below this are treated as numerical rank noise.
inline constexpr double kRankCutoff = 1e-10;
/// Maximum allowed discrepancy between the two reduced states handed to
/// construct_cheat_unitary.
inline constexpr double kConcealingTol = 1e-8;
/// Largest subsystem dimension accepted by the dense representations.
inline constexpr int kMaxDim = 64;

/// Thrown by construct_cheat_unitary when the two commitments are
/// distinguishable from the receiver's side, i.e. the reduced states differ
/// by more than kConcealingTol and no undetectable switching unitary exists.
class ConcealingViolation : public std::runtime_error {
 public:
  explicit ConcealingViolation(const std::string& what)
      : std::runtime_error(what) {}
};

/// Normalized pure state of a single system, dimension 2..kMaxDim.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes);

  static StateVector basis(int dim, int index);
  static StateVector qubit(Complex a0, Complex a1);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }

 private:
  Vector amps_;
};

/// Pure state of a bipartite system A x B, stored as the dA x dB coefficient
/// matrix M with |Psi> = sum_ij M(i,j) |i>_A |j>_B.  Unit Frobenius norm.
class BipartiteState {
 public:
  BipartiteState(Matrix coefficients);
  BipartiteState(const Vector& amplitudes, int dim_a, int dim_b);

  int dim_a() const { return static_cast<int>(m_.rows()); }
  int dim_b() const { return static_cast<int>(m_.cols()); }
  const Matrix& coefficients() const { return m_; }

 private:
  Matrix m_;
};

/// Density operator: Hermitian, positive semidefinite, unit trace (all
/// within kValidationTol).
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m);

  static DensityMatrix pure(const StateVector& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Unitary operator; U^dag U = I within kValidationTol in max-entry norm.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(Matrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Result of a Schmidt decomposition |Psi> = sum_j c_j |a_j> |b_j> with
/// coefficients sorted in descending order and each basis column's first
/// nonvanishing entry rotated to the positive real axis.
struct SchmidtDecomposition {
  Eigen::VectorXd coefficients;  // nonnegative, descending, sum of squares 1
  Matrix basis_a;                // columns |a_j>
  Matrix basis_b;                // columns |b_j>

  /// Number of coefficients above kRankCutoff.
  int rank() const;

  /// Rebuild the coefficient matrix sum_j c_j |a_j><b_j^*|.
  BipartiteState reconstruct() const;
};

enum class Side { A, B };

/// Reduced state of the subsystem that is kept after tracing out `traced`.
DensityMatrix partial_trace(const BipartiteState& psi, Side traced);

SchmidtDecomposition schmidt_decompose(const BipartiteState& psi);

/// The switching attack: given two purifications with identical reduced
/// states on side B, returns the unitary U acting on side A alone with
/// (U x I)|psi0> = |psi1>.  Throws ConcealingViolation if the reduced
/// states differ by more than kConcealingTol.
UnitaryMatrix construct_cheat_unitary(const BipartiteState& psi0,
                                      const BipartiteState& psi1);

BipartiteState apply_local_unitary(const UnitaryMatrix& u,
                                   const BipartiteState& psi, Side side);

/// Trace distance (1/2)||rho0 - rho1||_1, in [0, 1].
double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1);

/// Inner product <a|b> of two bipartite pure states of equal dimensions.
Complex overlap(const BipartiteState& a, const BipartiteState& b);

/// Bloch vector (r_x, r_y, r_z) of a qubit pure state.
Eigen::Vector3d bloch_vector(const StateVector& qubit);

/// Kronecker product, row-major composite indexing (a is the major factor).
Matrix kron(const Matrix& a, const Matrix& b);

/// Haar-distributed random unitary of the given dimension.
UnitaryMatrix random_unitary(int dim, RandomStream& rng);

/// Random bipartite pure state with Gaussian amplitudes (uniform on the
/// sphere of the full Hilbert space).
BipartiteState random_bipartite_state(int dim_a, int dim_b, RandomStream& rng);

}  // namespace qbc::qcore
