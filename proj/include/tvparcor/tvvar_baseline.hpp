#pragma once

// Direct state-space TV-VAR(P): one dynamic regression of x_t on
// (x_{t-1}, ..., x_{t-P}) with a P·K²-dimensional random-walk state. Shares
// the filter/smoother with the lattice fit so timings compare parameterizations.

#include <vector>

#include "tvparcor/lattice.hpp"
#include "tvparcor/whittle.hpp"

namespace tvparcor::baseline {

struct TvvarDlmFit {
  int order = 0;
  int k = 0;
  IndexRange range;                   // [P, T-1]
  std::vector<Vector> smoothed_mean;  // vec([A_1 ... A_P]), P·K² per t
  std::vector<Matrix> smoothed_cov;   // empty unless covariances kept
  double discount = 1.0;
  std::vector<double> grid;
  std::vector<double> grid_loglik;
  Matrix noise;  // S_T
  double loglik = 0.0;
  double wall_clock = 0.0;  // seconds

  int state_dim() const { return order * k * k; }
};

struct BaselineOptions {
  bool keep_covariances = false;
};

/// Default prior for the stacked state: m0 = 0, C0 = I, n0 = 1, S0 = sample covariance.
mdlm::PriorSpec default_prior(const TimeSeries& x, int order);

TvvarDlmFit fit_tvvar_dlm(const TimeSeries& x, int order, const mdlm::PriorSpec& prior,
                          const std::vector<double>& grid, const BaselineOptions& options = {});

/// Forward coefficient arrays A_{t,j} over the fit's range (backward left empty).
TvvarCoefficients to_coefficients(const TvvarDlmFit& fit);

}  // namespace tvparcor::baseline
