#include "tvparcor/spectral.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tvparcor::spectral {

FrequencyGrid FrequencyGrid::uniform(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "grid needs at least one frequency");
  FrequencyGrid g;
  g.omegas.reserve(static_cast<std::size_t>(count));
  for (int l = 1; l <= count; ++l) g.omegas.push_back((l - 0.5) / (2.0 * count));
  return g;
}

void FrequencyGrid::validate() const {
  if (omegas.empty()) throw Error(ErrorCode::InvalidArgument, "empty frequency grid");
  for (std::size_t l = 0; l < omegas.size(); ++l) {
    if (!(omegas[l] >= 0.0 && omegas[l] <= 0.5) || (l > 0 && !(omegas[l] > omegas[l - 1]))) {
      throw Error(ErrorCode::InvalidArgument,
                  "frequencies must be strictly increasing within [0, 0.5]");
    }
  }
}

CMatrix transfer_matrix(const std::vector<Matrix>& coeffs, double omega) {
  if (coeffs.empty()) throw Error(ErrorCode::InvalidArgument, "no coefficient matrices");
  const Eigen::Index k = coeffs.front().rows();
  CMatrix phi = CMatrix::Identity(k, k);
  for (std::size_t m = 1; m <= coeffs.size(); ++m) {
    const Complex w = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) * omega);
    phi -= coeffs[m - 1].cast<Complex>() * w;
  }
  return phi;
}

CMatrix transfer_matrix(const TvvarCoefficients& coeffs, int t, double omega) {
  if (!coeffs.range.contains(t)) {
    throw Error(ErrorCode::OutOfRange, "t=" + std::to_string(t) + " outside coefficient range");
  }
  return transfer_matrix(coeffs.at(t), omega);
}

namespace {

CMatrix hermitian_part(const CMatrix& g) {
  CMatrix h = 0.5 * (g + g.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = Complex(h(i, i).real(), 0.0);
  return h;
}

CMatrix density_from(const CMatrix& phi, const CMatrix& sigma) {
  Eigen::PartialPivLU<CMatrix> lu(phi);
  const double rc = lu.rcond();
  if (!(rc * kMaxTransferCondition >= 1.0)) {
    throw Error(ErrorCode::SingularTransfer, "transfer matrix is numerically singular");
  }
  const CMatrix x = lu.inverse();
  return hermitian_part(x * sigma * x.adjoint());
}

CMatrix invert_spectrum(const CMatrix& g) {
  Eigen::PartialPivLU<CMatrix> lu(g);
  const double rc = lu.rcond();
  if (!(rc * kMaxTransferCondition >= 1.0)) {
    throw Error(ErrorCode::SingularSpectrum, "spectral matrix is not invertible");
  }
  return hermitian_part(lu.inverse());
}

double clamp_unit(double v, bool* clamped) {
  if (v < 0.0 || v > 1.0 || std::isnan(v)) {
    if (clamped) *clamped = true;
    return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  }
  return v;
}

void check_pair(int k, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= k || j >= k) {
    throw Error(ErrorCode::InvalidArgument, "need two distinct components within 1..K");
  }
}

}  // namespace

CMatrix spectral_density(const std::vector<Matrix>& coeffs, const Matrix& sigma, double omega) {
  return density_from(transfer_matrix(coeffs, omega), sigma.cast<Complex>());
}

SpectralField spectral_matrix(const TvvarCoefficients& coeffs, const SymMatrix& sigma,
                              const FrequencyGrid& grid, const SpectralOptions& options) {
  grid.validate();
  if (sigma.dim() != coeffs.k) throw Error(ErrorCode::DimensionMismatch, "sigma dimension");
  if (options.t_stride < 1) throw Error(ErrorCode::InvalidArgument, "t_stride must be >= 1");
  SpectralField f;
  f.k = coeffs.k;
  f.grid = grid;
  f.sigma_used = sigma.matrix();
  const CMatrix csig = sigma.matrix().cast<Complex>();
  for (int t = coeffs.range.lo; t <= coeffs.range.hi; t += options.t_stride) f.times.push_back(t);
  f.g.reserve(f.times.size() * grid.size());
  for (int t : f.times) {
    const auto& a = coeffs.at(t);
    for (double w : grid.omegas) f.g.push_back(density_from(transfer_matrix(a, w), csig));
  }
  return f;
}

double coherence_value(const CMatrix& g, int i, int j, bool* clamped) {
  const double gii = g(i, i).real();
  const double gjj = g(j, j).real();
  if (!(gii > 0.0) || !(gjj > 0.0)) {
    throw Error(ErrorCode::ZeroDiagonal, "spectral diagonal is not positive");
  }
  return clamp_unit(std::norm(g(i, j)) / (gii * gjj), clamped);
}

double partial_coherence_value(const CMatrix& c, int i, int j, bool* clamped) {
  const double cii = c(i, i).real();
  const double cjj = c(j, j).real();
  if (!(cii > 0.0) || !(cjj > 0.0)) {
    throw Error(ErrorCode::SingularSpectrum, "inverse spectral diagonal is not positive");
  }
  return clamp_unit(std::norm(c(i, j)) / (cii * cjj), clamped);
}

RealGrid log_spectrum(const SpectralField& field, int i) {
  if (i < 0 || i >= field.k) throw Error(ErrorCode::InvalidArgument, "component out of range");
  RealGrid out{field.times, field.grid, Matrix(field.times.size(), field.grid.size()), 0};
  for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
    for (std::size_t l = 0; l < field.grid.size(); ++l) {
      const double v = field.at(ti, l)(i, i).real();
      if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveSpectrum, "spectral diagonal <= 0");
      out.values(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(l)) = std::log(v);
    }
  }
  return out;
}

RealGrid coherence(const SpectralField& field, int i, int j) {
  check_pair(field.k, i, j);
  RealGrid out{field.times, field.grid, Matrix(field.times.size(), field.grid.size()), 0};
  for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
    for (std::size_t l = 0; l < field.grid.size(); ++l) {
      bool clamped = false;
      out.values(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(l)) =
          coherence_value(field.at(ti, l), i, j, &clamped);
      out.clamp_events += clamped ? 1 : 0;
    }
  }
  return out;
}

RealGrid partial_coherence(const SpectralField& field, int i, int j) {
  return partial_coherences(field, {{i, j}}).front();
}

std::vector<RealGrid> partial_coherences(const SpectralField& field,
                                         const std::vector<std::pair<int, int>>& pairs) {
  for (auto [i, j] : pairs) check_pair(field.k, i, j);
  std::vector<RealGrid> out(pairs.size(),
                            RealGrid{field.times, field.grid, Matrix(field.times.size(), field.grid.size()), 0});
  for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
    for (std::size_t l = 0; l < field.grid.size(); ++l) {
      const CMatrix c = invert_spectrum(field.at(ti, l));
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        bool clamped = false;
        out[p].values(static_cast<Eigen::Index>(ti), static_cast<Eigen::Index>(l)) =
            partial_coherence_value(c, pairs[p].first, pairs[p].second, &clamped);
        out[p].clamp_events += clamped ? 1 : 0;
      }
    }
  }
  return out;
}

FieldDiagnostics diagnose(const SpectralField& field) {
  FieldDiagnostics d;
  d.min_eigenvalue = std::numeric_limits<double>::infinity();
  d.min_diagonal = std::numeric_limits<double>::infinity();
  for (const auto& g : field.g) {
    d.max_hermitian_deviation =
        std::max(d.max_hermitian_deviation, (g - g.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
    d.min_diagonal = std::min(d.min_diagonal, g.diagonal().real().minCoeff());
  }
  return d;
}

double quantile(std::vector<double>& xs, double p) {
  if (xs.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probability outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return xs[lo];
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

std::string entry_label(int i, int j) {
  if (i < 9 && j < 9) return std::to_string(i + 1) + std::to_string(j + 1);
  return std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

SpectralBands spectral_bands(const ParcorFit& fit, const FrequencyGrid& grid, int n_samples,
                             std::uint64_t seed, const std::vector<double>& probs,
                             const SpectralOptions& options) {
  grid.validate();
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "n_samples must be positive");
  if (probs.empty()) throw Error(ErrorCode::InvalidArgument, "no quantile probabilities");
  for (int m = 0; m < fit.order; ++m) {
    if (!fit.forward[static_cast<std::size_t>(m)].has_covariances() ||
        !fit.backward[static_cast<std::size_t>(m)].has_covariances()) {
      throw Error(ErrorCode::NotSmoothed, "bands need smoothed PARCOR covariances");
    }
  }
  const TvvarCoefficients point = whittle::parcor_to_tvvar(fit);
  const int k = fit.k;
  const std::size_t n_l = grid.size();
  const CMatrix csig = fit.residual_noise.cast<Complex>();

  SpectralBands out;
  out.grid = grid;
  out.probs = probs;
  out.n_samples = n_samples;
  for (int t = point.range.lo; t <= point.range.hi; t += options.t_stride) out.times.push_back(t);
  const bool partial = k >= 3;
  for (int i = 0; i < k; ++i) out.quantities.push_back({"log_g" + entry_label(i, i), {}});
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      out.quantities.push_back({"rho2_" + entry_label(i, j), {}});
    }
  }
  if (partial) {
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        out.quantities.push_back({"gamma2_" + entry_label(i, j), {}});
      }
    }
  }
  for (auto& q : out.quantities) {
    q.quantiles.assign(probs.size(), Matrix(out.times.size(), n_l));
  }

  const auto n_q = out.quantities.size();
  const auto ns = static_cast<std::size_t>(n_samples);
  // samples[q][l][s]
  std::vector<std::vector<std::vector<double>>> samples(
      n_q, std::vector<std::vector<double>>(n_l, std::vector<double>(ns)));
  const auto order = static_cast<std::size_t>(fit.order);
  std::vector<Matrix> lam(order), th(order);
  std::vector<Matrix> root_f(order), root_b(order);

  for (std::size_t ti = 0; ti < out.times.size(); ++ti) {
    const int t = out.times[ti];
    for (std::size_t m = 0; m < order; ++m) {
      const auto& fr = fit.forward[m];
      const auto& br = fit.backward[m];
      root_f[m] = linalg::sym_sqrt(fr.coefficient_cov[static_cast<std::size_t>(t - fr.range.lo)]);
      root_b[m] = linalg::sym_sqrt(br.coefficient_cov[static_cast<std::size_t>(t - br.range.lo)]);
    }
    auto eng = rng::derive(seed, rng::Stream::SpectralBands, {static_cast<std::uint64_t>(t)});
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t m = 0; m < order; ++m) {
        const Vector zf = rng::standard_normal(eng, k * k);
        const Vector zb = rng::standard_normal(eng, k * k);
        lam[m] = fit.forward[m].coefficient(t) + linalg::unvec(root_f[m] * zf, k, k);
        th[m] = fit.backward[m].coefficient(t) + linalg::unvec(root_b[m] * zb, k, k);
      }
      const auto var = whittle::parcor_to_var(lam, th);
      for (std::size_t l = 0; l < n_l; ++l) {
        const CMatrix g = density_from(transfer_matrix(var.forward, grid.omegas[l]), csig);
        std::size_t q = 0;
        for (int i = 0; i < k; ++i) {
          const double v = g(i, i).real();
          if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveSpectrum, "sampled spectrum <= 0");
          samples[q++][l][s] = std::log(v);
        }
        for (int i = 0; i < k; ++i) {
          for (int j = i + 1; j < k; ++j) {
            bool c = false;
            samples[q++][l][s] = coherence_value(g, i, j, &c);
            out.clamp_events += c ? 1 : 0;
          }
        }
        if (partial) {
          const CMatrix ginv = invert_spectrum(g);
          for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
              bool c = false;
              samples[q++][l][s] = partial_coherence_value(ginv, i, j, &c);
              out.clamp_events += c ? 1 : 0;
            }
          }
        }
      }
    }
    for (std::size_t q = 0; q < n_q; ++q) {
      for (std::size_t l = 0; l < n_l; ++l) {
        auto& xs = samples[q][l];
        for (std::size_t p = 0; p < probs.size(); ++p) {
          out.quantities[q].quantiles[p](static_cast<Eigen::Index>(ti),
                                         static_cast<Eigen::Index>(l)) = quantile(xs, probs[p]);
        }
      }
    }
  }
  return out;
}

}  // namespace tvparcor::spectral
