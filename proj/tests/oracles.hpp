#pragma once

// Reference computations written independently of the library: dense joint
// Gaussian conditioning, Yule-Walker solves from VAR autocovariances, the
// scalar Durbin-Levinson recursion and a naive DFT.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// (vᵀ ⊗ I_k) built entry by entry.
inline Mat design(const Vec& v, int k) {
  Mat b = Mat::Zero(k, k * v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    for (int i = 0; i < k; ++i) b(i, j * k + i) = v(j);
  return b;
}

// ---- dense Gaussian bookkeeping ---------------------------------------------

struct Joint {
  Vec mean;
  Mat cov;

  int size() const { return static_cast<int>(mean.size()); }

  // Appends a·z[src] + noise with the given noise covariance; returns the new block start.
  int append_linear(const Mat& a, int src, int src_len, const Mat& noise) {
    const int old = size();
    const int add = static_cast<int>(a.rows());
    Vec m(old + add);
    m << mean, a * mean.segment(src, src_len);
    Mat c = Mat::Zero(old + add, old + add);
    c.topLeftCorner(old, old) = cov;
    const Mat cross = a * cov.middleRows(src, src_len);  // add × old
    c.bottomLeftCorner(add, old) = cross;
    c.topRightCorner(old, add) = cross.transpose();
    c.bottomRightCorner(add, add) =
        a * cov.block(src, src, src_len, src_len) * a.transpose() + noise;
    mean = m;
    cov = c;
    return old;
  }

  // Moments of block [idx, idx+len) given observed blocks.
  std::pair<Vec, Mat> condition(int idx, int len, const std::vector<std::pair<int, int>>& obs,
                                const Vec& values) const {
    if (obs.empty()) return {mean.segment(idx, len), cov.block(idx, idx, len, len)};
    int total = 0;
    for (auto [s, l] : obs) total += l;
    Mat syy(total, total), sxy(len, total);
    Vec my(total);
    int r = 0;
    for (auto [s1, l1] : obs) {
      int c = 0;
      for (auto [s2, l2] : obs) {
        syy.block(r, c, l1, l2) = cov.block(s1, s2, l1, l2);
        c += l2;
      }
      sxy.middleCols(r, l1) = cov.block(idx, s1, len, l1);
      my.segment(r, l1) = mean.segment(s1, l1);
      r += l1;
    }
    const Eigen::LDLT<Mat> ldlt(syy);
    const Vec m = mean.segment(idx, len) + sxy * ldlt.solve(values - my);
    Mat c = cov.block(idx, idx, len, len) - sxy * ldlt.solve(sxy.transpose());
    return {m, 0.5 * (c + c.transpose())};
  }
};

struct DlmMoments {
  std::vector<Vec> filt_mean, smooth_mean;
  std::vector<Mat> filt_cov, smooth_cov;
  double loglik = 0.0;
};

// Discount DLM with known observational covariance, by conditioning the joint
// law of (θ_0, θ_1, y_1, ..., θ_T, y_T). W_t = D C_{t-1} D - C_{t-1} with
// D = diag(δ^{-1/2}), where C_{t-1} is itself obtained by conditioning.
inline DlmMoments brute_force_dlm(const std::vector<Vec>& y, const std::vector<Vec>& v, const Vec& m0,
                                  const Mat& c0, const Vec& delta, const Mat& sigma) {
  const int k = static_cast<int>(y.front().size());
  const int n = static_cast<int>(m0.size());
  Joint j{m0, c0};
  std::vector<int> theta_idx{0};
  std::vector<std::pair<int, int>> obs;
  Vec values(0);
  const Vec d = delta.cwiseSqrt().cwiseInverse();
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto [mp, cp] = j.condition(theta_idx.back(), n, obs, values);
    const Mat w = d.asDiagonal() * cp * d.asDiagonal() - cp;
    theta_idx.push_back(j.append_linear(Mat::Identity(n, n), theta_idx.back(), n, w));
    const int yi = j.append_linear(design(v[t], k), theta_idx.back(), n, sigma);
    obs.emplace_back(yi, k);
    Vec nv(values.size() + k);
    nv << values, y[t];
    values = nv;
  }
  DlmMoments out;
  std::vector<std::pair<int, int>> seen;
  Vec seen_values(0);
  for (std::size_t t = 0; t < y.size(); ++t) {
    seen.push_back(obs[t]);
    seen_values = values.head(static_cast<Eigen::Index>((t + 1) * k));
    auto [m, c] = j.condition(theta_idx[t + 1], n, seen, seen_values);
    out.filt_mean.push_back(m);
    out.filt_cov.push_back(c);
  }
  for (std::size_t t = 0; t < y.size(); ++t) {
    auto [m, c] = j.condition(theta_idx[t + 1], n, obs, values);
    out.smooth_mean.push_back(m);
    out.smooth_cov.push_back(c);
  }
  // log density of all observations under the joint
  const int total = static_cast<int>(values.size());
  Mat syy(total, total);
  Vec my(total);
  for (int a = 0; a < static_cast<int>(obs.size()); ++a) {
    my.segment(a * k, k) = j.mean.segment(obs[a].first, k);
    for (int b = 0; b < static_cast<int>(obs.size()); ++b)
      syy.block(a * k, b * k, k, k) = j.cov.block(obs[a].first, obs[b].first, k, k);
  }
  const Eigen::LLT<Mat> llt(syy);
  const Vec z = llt.matrixL().solve(values - my);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.loglik = -0.5 * (total * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
  return out;
}

// ---- VAR autocovariances and Yule-Walker ------------------------------------

// Γ(h) = E[x_t x_{t-h}ᵀ] for h = 0..max_lag of a stable VAR(P).
inline std::vector<Mat> var_autocov(const std::vector<Mat>& a, const Mat& sigma, int max_lag) {
  const int k = static_cast<int>(sigma.rows());
  const int p = static_cast<int>(a.size());
  const int n = k * p;
  Mat f = Mat::Zero(n, n);
  for (int j = 0; j < p; ++j) f.block(0, j * k, k, k) = a[static_cast<std::size_t>(j)];
  if (p > 1) f.bottomLeftCorner(n - k, n - k) = Mat::Identity(n - k, n - k);
  Mat q = Mat::Zero(n, n);
  q.topLeftCorner(k, k) = sigma;
  // vec(Γc) = (I - F ⊗ F)^{-1} vec(Q)
  Mat ff(n * n, n * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) ff.block(r * n, c * n, n, n) = f(r, c) * f;
  const Vec vq = Eigen::Map<const Vec>(q.data(), n * n);
  const Vec vg = (Mat::Identity(n * n, n * n) - ff).partialPivLu().solve(vq);
  const Mat gc = Eigen::Map<const Mat>(vg.data(), n, n);
  std::vector<Mat> g;
  for (int h = 0; h < p; ++h) g.push_back(gc.block(0, h * k, k, k));
  for (int h = p; h <= max_lag; ++h) {
    Mat s = Mat::Zero(k, k);
    for (int j = 1; j <= p; ++j) s += a[static_cast<std::size_t>(j - 1)] * g[static_cast<std::size_t>(h - j)];
    g.push_back(s);
  }
  g.resize(static_cast<std::size_t>(max_lag + 1));
  return g;
}

inline Mat gamma_at(const std::vector<Mat>& g, int h) {
  return h >= 0 ? g[static_cast<std::size_t>(h)] : Mat(g[static_cast<std::size_t>(-h)].transpose());
}

struct YuleWalker {
  std::vector<Mat> forward;   // A^{(m)}_1..A^{(m)}_m
  std::vector<Mat> backward;  // D^{(m)}_1..D^{(m)}_m
};

// Order-m forward/backward least-squares predictors from autocovariances.
inline YuleWalker yule_walker(const std::vector<Mat>& g, int m) {
  const int k = static_cast<int>(g[0].rows());
  Mat gf(k * m, k * m), gb(k * m, k * m), rf(k, k * m), rb(k, k * m);
  for (int jb = 0; jb < m; ++jb) {
    for (int ib = 0; ib < m; ++ib) {
      gf.block(jb * k, ib * k, k, k) = gamma_at(g, (ib + 1) - (jb + 1));
      gb.block(jb * k, ib * k, k, k) = gamma_at(g, (jb + 1) - (ib + 1));
    }
    rf.middleCols(jb * k, k) = gamma_at(g, jb + 1);
    rb.middleCols(jb * k, k) = gamma_at(g, jb + 1).transpose();
  }
  const Mat xf = gf.transpose().partialPivLu().solve(rf.transpose()).transpose();
  const Mat xb = gb.transpose().partialPivLu().solve(rb.transpose()).transpose();
  YuleWalker out;
  for (int j = 0; j < m; ++j) {
    out.forward.push_back(xf.middleCols(j * k, k));
    out.backward.push_back(xb.middleCols(j * k, k));
  }
  return out;
}

inline double spectral_radius(const std::vector<Mat>& a) {
  const int k = static_cast<int>(a.front().rows());
  const int p = static_cast<int>(a.size());
  Mat f = Mat::Zero(k * p, k * p);
  for (int j = 0; j < p; ++j) f.block(0, j * k, k, k) = a[static_cast<std::size_t>(j)];
  if (p > 1) f.bottomLeftCorner(k * (p - 1), k * (p - 1)).setIdentity();
  return Eigen::EigenSolver<Mat>(f).eigenvalues().cwiseAbs().maxCoeff();
}

// Random stable VAR(P) with spectral radius below `radius`.
inline std::vector<Mat> random_stable_var(std::mt19937_64& eng, int k, int p, double radius) {
  std::normal_distribution<double> z;
  for (;;) {
    std::vector<Mat> a;
    for (int j = 0; j < p; ++j) {
      Mat m(k, k);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(eng) * 0.5 / (j + 1);
      a.push_back(m);
    }
    if (spectral_radius(a) < radius) return a;
  }
}

inline Mat random_spd(std::mt19937_64& eng, int k) {
  std::normal_distribution<double> z;
  Mat l(k, k);
  for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = z(eng);
  return l * l.transpose() + Mat::Identity(k, k);
}

// ---- scalar Durbin-Levinson -------------------------------------------------

// φ_{m,j} = φ_{m-1,j} - φ_{m,m} φ_{m-1,m-j}
inline std::vector<double> pacf_to_ar(const std::vector<double>& pacf) {
  std::vector<double> phi;
  for (std::size_t m = 1; m <= pacf.size(); ++m) {
    std::vector<double> next(m);
    next[m - 1] = pacf[m - 1];
    for (std::size_t j = 1; j < m; ++j) next[j - 1] = phi[j - 1] - pacf[m - 1] * phi[m - j - 1];
    phi = next;
  }
  return phi;
}

// φ_{m-1,j} = (φ_{m,j} + φ_{m,m} φ_{m,m-j}) / (1 - φ_{m,m}²)
inline std::vector<double> ar_to_pacf(std::vector<double> phi) {
  std::vector<double> pacf(phi.size());
  for (std::size_t m = phi.size(); m >= 1; --m) {
    const double a = phi[m - 1];
    pacf[m - 1] = a;
    std::vector<double> prev(m - 1);
    for (std::size_t j = 1; j < m; ++j) prev[j - 1] = (phi[j - 1] + a * phi[m - j - 1]) / (1.0 - a * a);
    phi = prev;
  }
  return pacf;
}

// ---- misc -------------------------------------------------------------------

// Index of the largest |X_j|, j = 1..n/2, of the mean-removed series.
inline int dominant_bin(const std::vector<double>& x) {
  const auto n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  int best = 1;
  double best_pow = -1.0;
  for (std::size_t j = 1; j <= n / 2; ++j) {
    std::complex<double> s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      s += (x[t] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * t) / n);
    }
    if (std::norm(s) > best_pow) {
      best_pow = std::norm(s);
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Scalar AR(1) spectrum σ² / |1 - φ e^{-2πiω}|².
inline double ar1_spectrum(double phi, double sigma2, double omega) {
  return sigma2 / (1.0 - 2.0 * phi * std::cos(2.0 * std::numbers::pi * omega) + phi * phi);
}

}  // namespace oracle
