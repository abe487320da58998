#include "tvparcor/mdlm.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tvparcor::mdlm {

using linalg::kron_apply;
using linalg::kron_left;
using linalg::kron_right_transpose;

PriorSpec PriorSpec::standard(int state_dim, const Matrix& s0, double c0_scale, double n0,
                              double m0_fill) {
  PriorSpec p;
  p.m0 = Vector::Constant(state_dim, m0_fill);
  p.c0 = SymMatrix::identity(state_dim, c0_scale);
  p.n0 = n0;
  p.s0 = SymMatrix(s0);
  return p;
}

void PriorSpec::validate(int state_dim, int k) const {
  if (m0.size() != state_dim || c0.dim() != state_dim || s0.dim() != k) {
    throw Error(ErrorCode::DimensionMismatch, "prior dimensions do not match the model");
  }
  if (!m0.allFinite()) throw Error(ErrorCode::NonFiniteInput, "prior mean");
  if (!(n0 > 0.0) || !std::isfinite(n0)) {
    throw Error(ErrorCode::InvalidArgument, "prior weight n0 must be positive");
  }
}

DiscountSpec DiscountSpec::uniform(int state_dim, double delta) {
  return DiscountSpec{Vector::Constant(state_dim, delta)};
}

bool DiscountSpec::is_uniform() const {
  return delta.size() == 0 || (delta.array() == delta(0)).all();
}

void DiscountSpec::validate(int state_dim) const {
  if (delta.size() != state_dim) {
    throw Error(ErrorCode::DimensionMismatch, "discount vector length");
  }
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    if (!(delta(i) > 0.0 && delta(i) <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "discount factors must lie in (0, 1]");
    }
  }
}

double gaussian_logpdf(const Vector& e, const Matrix& q) {
  const double k = static_cast<double>(e.size());
  Eigen::LLT<Matrix> llt(q);
  if (llt.info() == Eigen::Success) {
    const Vector z = llt.matrixL().solve(e);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * (k * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
  }
  const Matrix qinv = linalg::spd_inverse(q);
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + linalg::spd_logdet(q) + e.dot(qinv * e));
}

namespace {

// Δ C Δ with Δ = diag(δ^{-1/2}).
Matrix inflate(const Matrix& c, const DiscountSpec& disc) {
  if (disc.is_uniform()) return c / disc.delta(0);
  const Vector s = disc.delta.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * c * s.asDiagonal();
}

void symmetrize_in_place(Matrix& a) {
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
}

void require_state_finite(const Vector& m, const Matrix& c, const Matrix& s, int t) {
  if (!m.allFinite() || !c.allFinite() || !s.allFinite()) {
    throw Error(ErrorCode::NonFiniteState,
                "filter produced non-finite values at t=" + std::to_string(t) +
                    " (discount too small or degenerate data)");
  }
}

}  // namespace

DlmPosterior filter_run(const std::vector<Vector>& responses, const std::vector<Vector>& regressors,
                        IndexRange range, const PriorSpec& prior, const DiscountSpec& disc,
                        const FilterOptions& options) {
  const auto n_obs = static_cast<std::size_t>(range.size());
  if (n_obs == 0 || responses.size() != n_obs || regressors.size() != n_obs) {
    throw Error(ErrorCode::DimensionMismatch, "responses/regressors must cover the time range");
  }
  const int k = static_cast<int>(responses.front().size());
  const int n = static_cast<int>(regressors.front().size()) * k;
  if (k == 0) throw Error(ErrorCode::DimensionMismatch, "empty response vector");
  prior.validate(n, k);
  disc.validate(n);
  for (std::size_t i = 0; i < n_obs; ++i) {
    if (responses[i].size() != k || regressors[i].size() * k != n) {
      throw Error(ErrorCode::DimensionMismatch, "inconsistent response/regressor sizes");
    }
    if (!responses[i].allFinite() || !regressors[i].allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "responses/regressors");
    }
  }
  if (options.fixed_noise &&
      (options.fixed_noise->rows() != k || options.fixed_noise->cols() != k)) {
    throw Error(ErrorCode::DimensionMismatch, "fixed noise covariance");
  }

  const bool keep_cov = options.keep_covariances || !disc.is_uniform();

  DlmPosterior post;
  post.range = range;
  post.k = k;
  post.state_dim = n;
  post.filtered_mean.reserve(n_obs);
  post.noise_est.reserve(n_obs);
  post.forecast_err.reserve(n_obs);
  post.forecast_cov.reserve(n_obs);
  post.design_cov.reserve(n_obs);
  if (keep_cov) post.filtered_cov.reserve(n_obs);

  const double log2pi = std::log(2.0 * std::numbers::pi);
  Vector m = prior.m0;
  Matrix c = prior.c0.matrix();
  Matrix s = options.fixed_noise ? linalg::symmetrized(*options.fixed_noise) : prior.s0.matrix();
  double loglik = 0.0;

  for (std::size_t i = 0; i < n_obs; ++i) {
    const Vector& v = regressors[i];
    const Vector& y = responses[i];

    const Matrix r = inflate(c, disc);
    const Matrix g = kron_right_transpose(v, k, r);  // R Bᵀ
    Matrix p = kron_left(v, k, g);                   // B R Bᵀ
    p = 0.5 * (p + p.transpose());
    const Matrix q = p + s;
    const Vector e = y - kron_apply(v, k, m);

    Vector qinv_e;
    Matrix h;  // G Q^{-1/2}-type factor: C = R - H Hᵀ
    double logdet = 0.0;
    Matrix qinv_p;
    Eigen::LLT<Matrix> llt(q);
    if (llt.info() == Eigen::Success) {
      qinv_e = llt.solve(e);
      h = llt.matrixL().solve(g.transpose()).transpose();
      logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      qinv_p = llt.solve(p);
    } else {
      const Matrix qinv = linalg::spd_inverse(q);
      qinv_e = qinv * e;
      h = g * linalg::sym_inv_sqrt(q);
      logdet = linalg::spd_logdet(q);
      qinv_p = qinv * p;
    }

    m.noalias() += g * qinv_e;
    c = r;
    c.selfadjointView<Eigen::Lower>().rankUpdate(h, -1.0);
    symmetrize_in_place(c);

    loglik += -0.5 * (k * log2pi + logdet + e.dot(qinv_e));

    Matrix dcov = p - p * qinv_p;
    dcov = 0.5 * (dcov + dcov.transpose());

    post.forecast_err.push_back(e);
    post.forecast_cov.push_back(q);
    post.design_cov.push_back(dcov);

    if (!options.fixed_noise) {
      const double tau = static_cast<double>(i + 1);
      const Matrix s_half = linalg::sym_sqrt(s);
      const Vector u = s_half * (linalg::sym_inv_sqrt(q) * e);
      Matrix next = ((prior.n0 + tau - 1.0) * s + u * u.transpose()) / (prior.n0 + tau);
      s = 0.5 * (next + next.transpose());
    }

    require_state_finite(m, c, s, range.lo + static_cast<int>(i));
    post.filtered_mean.push_back(m);
    post.noise_est.push_back(s);
    if (keep_cov) post.filtered_cov.push_back(c);
  }

  if (!std::isfinite(loglik)) {
    throw Error(ErrorCode::NonFiniteState, "log-likelihood is not finite");
  }
  post.loglik = loglik;
  post.last_mean = m;
  post.last_cov = c;
  return post;
}

DlmPosterior smooth_run(DlmPosterior post, const DiscountSpec& disc) {
  const auto n_obs = post.filtered_mean.size();
  if (n_obs == 0 || n_obs != static_cast<std::size_t>(post.range.size())) {
    throw Error(ErrorCode::NotFiltered, "posterior has no filtered moments");
  }
  disc.validate(post.state_dim);
  const bool with_cov = post.has_covariances();
  if (!with_cov && !disc.is_uniform()) {
    throw Error(ErrorCode::NotFiltered, "non-uniform discounts need filtered covariances");
  }

  post.smoothed_mean.assign(n_obs, Vector());
  post.smoothed_mean[n_obs - 1] = post.filtered_mean[n_obs - 1];
  if (with_cov) {
    post.smoothed_cov.assign(n_obs, Matrix());
    post.smoothed_cov[n_obs - 1] = post.filtered_cov[n_obs - 1];
  } else {
    post.smoothed_cov.clear();
  }

  if (disc.is_uniform()) {
    // R_{t+1} = C_t / δ, so J_t = δ I.
    const double d = disc.delta(0);
    for (std::size_t i = n_obs - 1; i-- > 0;) {
      post.smoothed_mean[i] = (1.0 - d) * post.filtered_mean[i] + d * post.smoothed_mean[i + 1];
      if (with_cov) {
        Matrix sc = (1.0 - d) * post.filtered_cov[i] + (d * d) * post.smoothed_cov[i + 1];
        post.smoothed_cov[i] = 0.5 * (sc + sc.transpose());
      }
    }
  } else {
    for (std::size_t i = n_obs - 1; i-- > 0;) {
      const Matrix& c = post.filtered_cov[i];
      const Matrix r_next = inflate(c, disc);
      Eigen::LLT<Matrix> llt(r_next);
      const Matrix j = llt.info() == Eigen::Success
                           ? Matrix(llt.solve(c).transpose())
                           : Matrix(c * linalg::spd_inverse(r_next));
      post.smoothed_mean[i] =
          post.filtered_mean[i] - j * (post.filtered_mean[i] - post.smoothed_mean[i + 1]);
      Matrix sc = c - j * (r_next - post.smoothed_cov[i + 1]) * j.transpose();
      post.smoothed_cov[i] = 0.5 * (sc + sc.transpose());
    }
  }
  post.smoothed = true;
  return post;
}

std::vector<std::vector<Vector>> sample_states(const DlmPosterior& post, Moments which,
                                               int n_samples, std::uint64_t seed) {
  if (n_samples <= 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be positive");
  const bool smoothed = which == Moments::Smoothed;
  const auto& means = smoothed ? post.smoothed_mean : post.filtered_mean;
  const auto& covs = smoothed ? post.smoothed_cov : post.filtered_cov;
  if (smoothed && (!post.smoothed || covs.empty())) {
    throw Error(ErrorCode::NotSmoothed, "smoothed moments with covariances are required");
  }
  if (!smoothed && (means.empty() || covs.empty())) {
    throw Error(ErrorCode::NotFiltered, "filtered moments with covariances are required");
  }
  std::vector<std::vector<Vector>> out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    auto eng = rng::derive(seed, rng::Stream::StateSamples,
                           {smoothed ? 1u : 0u, static_cast<std::uint64_t>(post.range.lo + i)});
    const Matrix l = linalg::sym_sqrt(covs[i]);
    out[i].reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
      out[i].push_back(means[i] + l * rng::standard_normal(eng, means[i].size()));
    }
  }
  return out;
}

}  // namespace tvparcor::mdlm
