#include "tvparcor/linalg.hpp"

#include "tvparcor/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tvparcor::linalg {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFiniteInput, "eigendecomposition failed");
  }
  return es;
}

Vector clamped_eigenvalues(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double floor) {
  return es.eigenvalues().cwiseMax(floor);
}

}  // namespace

bool all_finite(const Matrix& a) noexcept { return a.allFinite(); }

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite entries");
  }
}

Matrix symmetrized(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  }
  require_finite(a, "matrix");
  if (a.size() == 0) return a;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    throw Error(ErrorCode::NotSymmetric,
                "relative asymmetry " + std::to_string(asym / scale) + " exceeds tolerance");
  }
  return 0.5 * (a + a.transpose());
}

double spd_floor(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return kSpdFloorScale * std::abs(a.trace()) / static_cast<double>(a.rows());
}

Matrix sym_sqrt(const Matrix& a) {
  const Matrix s = symmetrized(a);
  const auto es = eigen_of(s);
  const Vector ev = clamped_eigenvalues(es, spd_floor(s)).cwiseSqrt();
  Matrix r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Matrix sym_inv_sqrt(const Matrix& a) {
  const Matrix s = symmetrized(a);
  const double floor = spd_floor(s);
  const auto es = eigen_of(s);
  if (es.eigenvalues().maxCoeff() <= 0.0 || floor <= 0.0) {
    throw Error(ErrorCode::NonFiniteInput, "matrix has no positive spectrum");
  }
  const Vector ev = clamped_eigenvalues(es, floor).cwiseSqrt().cwiseInverse();
  Matrix r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Matrix spd_inverse(const Matrix& a) {
  const Matrix s = symmetrized(a);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) {
    Matrix inv = llt.solve(Matrix::Identity(s.rows(), s.cols()));
    if (inv.allFinite()) return 0.5 * (inv + inv.transpose());
  }
  const double floor = spd_floor(s);
  const auto es = eigen_of(s);
  if (es.eigenvalues().maxCoeff() <= 0.0 || floor <= 0.0) {
    throw Error(ErrorCode::NonFiniteInput, "matrix has no positive spectrum");
  }
  const Vector ev = clamped_eigenvalues(es, floor).cwiseInverse();
  Matrix r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

double spd_logdet(const Matrix& a) {
  const Matrix s = symmetrized(a);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  const double floor = spd_floor(s);
  const auto es = eigen_of(s);
  if (floor <= 0.0) throw Error(ErrorCode::NonFiniteInput, "matrix has no positive spectrum");
  return clamped_eigenvalues(es, floor).array().log().sum();
}

Matrix kron_design(const Vector& v, int k) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteInput, "design vector");
  const Eigen::Index n = v.size();
  Matrix b = Matrix::Zero(k, n * k);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (int i = 0; i < k; ++i) b(i, a * k + i) = v(a);
  }
  return b;
}

Vector kron_apply(const Vector& v, int k, const Vector& x) {
  Vector out = Vector::Zero(k);
  for (Eigen::Index a = 0; a < v.size(); ++a) out += v(a) * x.segment(a * k, k);
  return out;
}

Matrix kron_right_transpose(const Vector& v, int k, const Matrix& r) {
  // Column j of Bᵀ selects entries a*k + j weighted by v(a).
  Matrix g = Matrix::Zero(r.rows(), k);
  for (Eigen::Index a = 0; a < v.size(); ++a) {
    if (v(a) == 0.0) continue;
    g.noalias() += v(a) * r.middleCols(a * k, k);
  }
  return g;
}

Matrix kron_left(const Vector& v, int k, const Matrix& g) {
  Matrix out = Matrix::Zero(k, g.cols());
  for (Eigen::Index a = 0; a < v.size(); ++a) {
    if (v(a) == 0.0) continue;
    out.noalias() += v(a) * g.middleRows(a * k, k);
  }
  return out;
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw Error(ErrorCode::DimensionMismatch, "unvec size");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double condition_number(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace tvparcor::linalg
