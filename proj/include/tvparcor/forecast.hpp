#pragma once

// h-step forecasts assuming the series stays locally stationary past T: the
// forward PARCOR posterior at T is propagated as a random walk and used for
// both the forward and backward slots of Whittle's recursion.

#include <cstdint>
#include <vector>

#include "tvparcor/lattice.hpp"

namespace tvparcor::forecast {

struct ParcorMoments {
  Vector mean;  // vec(Λ), K²
  Matrix cov;   // K² × K²
};

/// W_{T+1} = Δ C_T Δ - C_T for one forward stage.
Matrix evolution_covariance(const StageRecord& rec);

/// Per forward stage: mean m_T and covariance C_T + h·W_{T+1}.
std::vector<ParcorMoments> forecast_parcor(const ParcorFit& fit, int h);

struct ForecastResult {
  int horizon = 0;
  std::vector<Vector> point;  // x̂_{T+1..T+h}
  std::vector<double> probs;
  std::vector<std::vector<Vector>> bands;  // [quantile][step]
  int n_samples = 0;
  std::uint64_t seed = 0;
  bool has_bands = false;
  std::size_t explosive_paths = 0;
};

inline const std::vector<double> kDefaultProbs{0.05, 0.5, 0.95};

/// Point path from the posterior-mean PARCOR and Monte-Carlo bands. Paths whose
/// magnitude exceeds 1e6·max|x| are counted as explosive and left out of the bands.
ForecastResult forecast_path(const ParcorFit& fit, const TimeSeries& x, int h, int n_samples,
                             std::uint64_t seed, const std::vector<double>& probs = kDefaultProbs);

}  // namespace tvparcor::forecast
