#pragma once

// Small dense kernels shared by the filters, the lattice and the spectral code.
//
// Vectorization is column-stacking everywhere: vec([[1,3],[2,4]]) == (1,2,3,4).

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <vector>

namespace tvparcor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Inclusive time index range [lo, hi], 0-based.
struct IndexRange {
  int lo = 0;
  int hi = -1;

  int size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
  bool empty() const noexcept { return hi < lo; }
  bool contains(int t) const noexcept { return t >= lo && t <= hi; }
  bool contains(const IndexRange& r) const noexcept {
    return r.empty() || (r.lo >= lo && r.hi <= hi);
  }
  IndexRange intersect(const IndexRange& r) const noexcept {
    return {std::max(lo, r.lo), std::min(hi, r.hi)};
  }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

namespace linalg {

/// Relative asymmetry tolerated before NotSymmetric is raised.
inline constexpr double kSymTol = 1e-8;
/// Eigenvalue floor relative to trace(a)/dim.
inline constexpr double kSpdFloorScale = 1e-12;

bool all_finite(const Matrix& a) noexcept;
void require_finite(const Matrix& a, const char* what);

/// (a + aᵀ)/2 after checking finiteness and the relative asymmetry bound.
Matrix symmetrized(const Matrix& a);

/// Eigenvalue floor used by the SPD kernels for `a`.
double spd_floor(const Matrix& a);

/// Symmetric square root via the spectral decomposition. Eigenvalues below
/// spd_floor(a) are clamped to it first.
Matrix sym_sqrt(const Matrix& a);

/// Symmetric inverse square root, same clamping as sym_sqrt.
Matrix sym_inv_sqrt(const Matrix& a);

/// Inverse of an SPD matrix: Cholesky first, clamped eigendecomposition on failure.
Matrix spd_inverse(const Matrix& a);

/// log det of an SPD matrix with the same fallback as spd_inverse.
double spd_logdet(const Matrix& a);

/// (vᵀ) ⊗ I_k, a k × (k·len(v)) matrix with kron_design(v,k)·vec(M) == M·v.
Matrix kron_design(const Vector& v, int k);

/// B·x for B = kron_design(v, k) without forming B.
Vector kron_apply(const Vector& v, int k, const Vector& x);

/// R·Bᵀ for B = kron_design(v, k) without forming B; R is n×n with n = k·len(v).
Matrix kron_right_transpose(const Vector& v, int k, const Matrix& r);

/// B·G for B = kron_design(v, k) and G of shape (k·len(v)) × c.
Matrix kron_left(const Vector& v, int k, const Matrix& g);

Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int rows, int cols);

/// Largest over smallest singular value; infinity when singular.
double condition_number(const Matrix& a);
double condition_number(const CMatrix& a);

}  // namespace linalg

/// Symmetric real matrix; symmetrized on construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& a) : m_(linalg::symmetrized(a)) {}

  static SymMatrix identity(int dim, double scale = 1.0) {
    return SymMatrix(Matrix::Identity(dim, dim) * scale);
  }

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

}  // namespace tvparcor
