#pragma once

// Simulation designs with known time-varying spectra, and the average squared
// error between an estimated and a true spectral field.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvparcor/spectral.hpp"

namespace tvparcor::sim {

enum class ScenarioKind { BivarTvvar2, TwentyDimTvvar1, Custom };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_kind(const std::string& name);  // bivar-tvvar2 | twenty-dim | custom

struct ScenarioTruth {
  TvvarCoefficients coeffs;  // range [0, T-1]; index t is the formula's time t+1
  Matrix sigma;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::BivarTvvar2;
  int t_len = 1024;
  std::uint64_t seed = 0;
  double phi112 = 0.0;
  std::optional<ScenarioTruth> custom;
  int burn_in = 200;

  void validate() const;
};

/// Generating coefficients and innovation covariance of a scenario.
ScenarioTruth scenario_truth(const ScenarioSpec& spec);

struct Simulation {
  TimeSeries series;
  ScenarioTruth truth;
};

/// Runs `burn_in` steps from zero with the first time point's coefficients,
/// then the time-varying recursion for t_len steps.
Simulation generate(const ScenarioSpec& spec);

/// True spectral matrices at the given time indices.
spectral::SpectralField true_spectrum(const ScenarioTruth& truth, const spectral::FrequencyGrid& grid,
                                      const std::vector<int>& times);
spectral::SpectralField true_spectrum(const ScenarioTruth& truth, const spectral::FrequencyGrid& grid);

/// A diagonal entry (i == j) scores log spectra, an off-diagonal one squared coherence.
struct AseEntry {
  int i = 0;
  int j = 0;
  std::string name() const;  // log_g11, rho2_12 (1-based)
};

/// Mean over the estimate's (t, ω) points of the squared difference; truth must
/// cover the estimate's times on the same grid.
std::vector<double> ase(const spectral::SpectralField& estimate, const spectral::SpectralField& truth,
                        const std::vector<AseEntry>& entries);

/// Same average for quantities already on their comparison scale (log spectra,
/// squared coherences), matched by time index.
double ase_grid(const spectral::RealGrid& estimate, const spectral::RealGrid& truth);

}  // namespace tvparcor::sim
