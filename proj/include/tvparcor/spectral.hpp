#pragma once

// Time-varying spectral density matrices
//
//   g(t, ω) = Φ(t, ω)^{-1} Σ Φ(t, ω)^{-*},   Φ(t, ω) = I - Σ_m A_{t,m} e^{-2πimω}
//
// and the squared coherence / squared partial coherence derived from them.

#include <cstdint>
#include <string>
#include <vector>

#include "tvparcor/whittle.hpp"

namespace tvparcor::spectral {

struct FrequencyGrid {
  std::vector<double> omegas;

  /// L midpoints of [0, 1/2]: ω_l = (l - 1/2) / (2L), l = 1..L.
  static FrequencyGrid uniform(int count = 200);
  std::size_t size() const noexcept { return omegas.size(); }
  void validate() const;
  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

struct SpectralOptions {
  int t_stride = 1;  // evaluate every t_stride-th time point of the range
};

struct SpectralField {
  int k = 0;
  std::vector<int> times;
  FrequencyGrid grid;
  std::vector<CMatrix> g;  // row-major over (time, frequency)
  Matrix sigma_used;

  const CMatrix& at(std::size_t ti, std::size_t l) const { return g[ti * grid.size() + l]; }
  CMatrix& at(std::size_t ti, std::size_t l) { return g[ti * grid.size() + l]; }
};

/// Real values on the (time, frequency) grid of a field.
struct RealGrid {
  std::vector<int> times;
  FrequencyGrid grid;
  Matrix values;  // times.size() × grid.size()
  std::size_t clamp_events = 0;
};

inline constexpr double kMaxTransferCondition = 1e12;

CMatrix transfer_matrix(const std::vector<Matrix>& coeffs, double omega);
CMatrix transfer_matrix(const TvvarCoefficients& coeffs, int t, double omega);

/// g at one point; throws SingularTransfer near a unit root.
CMatrix spectral_density(const std::vector<Matrix>& coeffs, const Matrix& sigma, double omega);

SpectralField spectral_matrix(const TvvarCoefficients& coeffs, const SymMatrix& sigma,
                              const FrequencyGrid& grid, const SpectralOptions& options = {});

/// Natural log of g_ii (0-based i).
RealGrid log_spectrum(const SpectralField& field, int i);

/// |g_ij|² / (g_ii g_jj), clamped to [0, 1]. Indices are 0-based.
RealGrid coherence(const SpectralField& field, int i, int j);

/// |c_ij|² / (c_ii c_jj) with c = g^{-1}, clamped to [0, 1].
RealGrid partial_coherence(const SpectralField& field, int i, int j);

/// Several pairs at once, inverting each spectral matrix a single time.
std::vector<RealGrid> partial_coherences(const SpectralField& field,
                                         const std::vector<std::pair<int, int>>& pairs);

/// Pointwise quantities from one spectral matrix; used by the band sampler too.
double coherence_value(const CMatrix& g, int i, int j, bool* clamped = nullptr);
double partial_coherence_value(const CMatrix& c, int i, int j, bool* clamped = nullptr);

struct FieldDiagnostics {
  double max_hermitian_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double min_diagonal = 0.0;
};
FieldDiagnostics diagnose(const SpectralField& field);

/// 1-based label of entry (i, j): "12", or "3_15" once an index exceeds 9.
std::string entry_label(int i, int j);

struct BandQuantity {
  std::string name;              // log_g11, rho2_12, gamma2_12 (1-based component labels)
  std::vector<Matrix> quantiles;  // one times × grid matrix per probability
};

struct SpectralBands {
  std::vector<int> times;
  FrequencyGrid grid;
  std::vector<double> probs;
  std::vector<BandQuantity> quantities;
  std::size_t clamp_events = 0;
  int n_samples = 0;
};

/// Monte-Carlo quantile bands from the smoothed PARCOR posteriors.
SpectralBands spectral_bands(const ParcorFit& fit, const FrequencyGrid& grid, int n_samples,
                             std::uint64_t seed, const std::vector<double>& probs,
                             const SpectralOptions& options = {});

/// Linear-interpolation sample quantile (R type 7); reorders `xs`.
double quantile(std::vector<double>& xs, double p);

}  // namespace tvparcor::spectral
