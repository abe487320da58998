#include "tvparcor/whittle.hpp"

#include "tvparcor/errors.hpp"

#include <string>

namespace tvparcor::whittle {

VarPair parcor_to_var(const std::vector<Matrix>& lambda, const std::vector<Matrix>& theta) {
  if (lambda.empty() || lambda.size() != theta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need the same number of forward/backward stages");
  }
  const std::size_t p = lambda.size();
  VarPair cur;
  cur.forward.reserve(p);
  cur.backward.reserve(p);
  for (std::size_t m = 1; m <= p; ++m) {
    const Matrix& am = lambda[m - 1];
    const Matrix& dm = theta[m - 1];
    VarPair next;
    next.forward.resize(m);
    next.backward.resize(m);
    for (std::size_t j = 1; j < m; ++j) {
      next.forward[j - 1] = cur.forward[j - 1] - am * cur.backward[m - j - 1];
      next.backward[j - 1] = cur.backward[j - 1] - dm * cur.forward[m - j - 1];
    }
    next.forward[m - 1] = am;
    next.backward[m - 1] = dm;
    cur = std::move(next);
  }
  return cur;
}

ParcorPair var_to_parcor(const std::vector<Matrix>& forward, const std::vector<Matrix>& backward) {
  if (forward.empty() || forward.size() != backward.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need the same number of forward/backward lags");
  }
  const std::size_t p = forward.size();
  const Eigen::Index k = forward.front().rows();
  const Matrix eye = Matrix::Identity(k, k);
  ParcorPair out;
  out.lambda.resize(p);
  out.theta.resize(p);
  std::vector<Matrix> a = forward;
  std::vector<Matrix> d = backward;
  for (std::size_t m = p; m >= 1; --m) {
    const Matrix am = a[m - 1];
    const Matrix dm = d[m - 1];
    out.lambda[m - 1] = am;
    out.theta[m - 1] = dm;
    if (m == 1) break;
    // (I - A_m D_m) A^{(m-1)}_j = A_j + A_m D_{m-j}, and symmetrically for D.
    const Matrix lhs_a = eye - am * dm;
    const Matrix lhs_d = eye - dm * am;
    if (linalg::condition_number(lhs_a) > kMaxCondition ||
        linalg::condition_number(lhs_d) > kMaxCondition) {
      throw Error(ErrorCode::SingularStage, "down-step at stage " + std::to_string(m) +
                                                " is numerically singular");
    }
    const auto lu_a = lhs_a.partialPivLu();
    const auto lu_d = lhs_d.partialPivLu();
    std::vector<Matrix> a_prev(m - 1), d_prev(m - 1);
    for (std::size_t j = 1; j < m; ++j) {
      a_prev[j - 1] = lu_a.solve(a[j - 1] + am * d[m - j - 1]);
      d_prev[j - 1] = lu_d.solve(d[j - 1] + dm * a[m - j - 1]);
    }
    a = std::move(a_prev);
    d = std::move(d_prev);
  }
  return out;
}

TvvarCoefficients parcor_to_tvvar(const ParcorFit& fit) {
  if (fit.order < 1 || static_cast<int>(fit.forward.size()) < fit.order ||
      static_cast<int>(fit.backward.size()) < fit.order) {
    throw Error(ErrorCode::InvalidArgument, "fit must have order >= 1 with all stages present");
  }
  IndexRange common{0, fit.t_len - 1};
  for (int m = 0; m < fit.order; ++m) {
    common = common.intersect(fit.forward[static_cast<std::size_t>(m)].range);
    common = common.intersect(fit.backward[static_cast<std::size_t>(m)].range);
  }
  if (common.empty()) throw Error(ErrorCode::RangeMismatch, "stage ranges do not overlap");

  TvvarCoefficients out;
  out.order = fit.order;
  out.k = fit.k;
  out.range = common;
  out.forward.reserve(static_cast<std::size_t>(common.size()));
  out.backward.reserve(static_cast<std::size_t>(common.size()));
  std::vector<Matrix> lam(static_cast<std::size_t>(fit.order));
  std::vector<Matrix> th(static_cast<std::size_t>(fit.order));
  for (int t = common.lo; t <= common.hi; ++t) {
    for (std::size_t m = 0; m < lam.size(); ++m) {
      lam[m] = fit.forward[m].coefficient(t);
      th[m] = fit.backward[m].coefficient(t);
    }
    VarPair v = parcor_to_var(lam, th);
    out.forward.push_back(std::move(v.forward));
    out.backward.push_back(std::move(v.backward));
  }
  return out;
}

std::vector<ParcorPair> tvvar_to_parcor(const TvvarCoefficients& coeffs) {
  if (coeffs.backward.size() != coeffs.forward.size()) {
    throw Error(ErrorCode::InvalidArgument, "backward coefficients are required");
  }
  std::vector<ParcorPair> out;
  out.reserve(coeffs.forward.size());
  for (std::size_t i = 0; i < coeffs.forward.size(); ++i) {
    out.push_back(var_to_parcor(coeffs.forward[i], coeffs.backward[i]));
  }
  return out;
}

}  // namespace tvparcor::whittle
