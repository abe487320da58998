#pragma once

// Multivariate dynamic linear regression with random-walk states:
//
//   y_t     = B_t θ_t + ν_t,   ν_t ~ N(0, Σ),   B_t = (v_t)ᵀ ⊗ I_K
//   θ_t     = θ_{t-1} + ω_t,   ω_t ~ N(0, W_t)
//
// W_t is implied by discount factors (R_t = Δ C_{t-1} Δ) and Σ is estimated
// sequentially by S_t. Filtering runs forward in t over the given range.

#include <cstdint>
#include <optional>
#include <vector>

#include "tvparcor/linalg.hpp"

namespace tvparcor::mdlm {

struct PriorSpec {
  Vector m0;     // state mean, length n
  SymMatrix c0;  // state covariance, n × n
  double n0 = 1.0;
  SymMatrix s0;  // prior expectation of the observational covariance, K × K

  /// m0 = fill, C0 = c0_scale·I_n, S0 given.
  static PriorSpec standard(int state_dim, const Matrix& s0, double c0_scale = 1.0,
                            double n0 = 1.0, double m0_fill = 0.0);
  void validate(int state_dim, int k) const;
  friend bool operator==(const PriorSpec& a, const PriorSpec& b) {
    return a.m0.size() == b.m0.size() && a.m0 == b.m0 && a.c0 == b.c0 && a.n0 == b.n0 &&
           a.s0 == b.s0;
  }
};

struct DiscountSpec {
  Vector delta;  // one factor per state component, each in (0, 1]

  static DiscountSpec uniform(int state_dim, double delta);
  bool is_uniform() const;
  void validate(int state_dim) const;
  friend bool operator==(const DiscountSpec& a, const DiscountSpec& b) {
    return a.delta.size() == b.delta.size() && a.delta == b.delta;
  }
};

struct FilterOptions {
  /// Keep per-t filtered and smoothed state covariances. Without them only
  /// means are smoothed, which requires a uniform discount.
  bool keep_covariances = true;
  /// Hold the observational covariance at this value instead of estimating it.
  std::optional<Matrix> fixed_noise;
};

struct DlmPosterior {
  IndexRange range;
  int k = 0;          // response dimension
  int state_dim = 0;  // n

  std::vector<Vector> filtered_mean;  // m_t
  std::vector<Matrix> filtered_cov;   // C_t (empty unless kept)
  std::vector<Matrix> noise_est;      // S_t
  std::vector<Vector> forecast_err;   // e_t
  std::vector<Matrix> forecast_cov;   // Q_t
  std::vector<Matrix> design_cov;     // B_t C_t B_tᵀ
  Vector last_mean;                   // m at range.hi
  Matrix last_cov;                    // C at range.hi
  double loglik = 0.0;

  bool smoothed = false;
  std::vector<Vector> smoothed_mean;
  std::vector<Matrix> smoothed_cov;  // empty unless covariances kept

  int index(int t) const { return t - range.lo; }
  bool has_covariances() const { return !filtered_cov.empty(); }
  const Matrix& final_noise() const { return noise_est.back(); }
};

/// Forward filtering. `responses[i]` and `regressors[i]` belong to time range.lo + i.
DlmPosterior filter_run(const std::vector<Vector>& responses, const std::vector<Vector>& regressors,
                        IndexRange range, const PriorSpec& prior, const DiscountSpec& disc,
                        const FilterOptions& options = {});

/// Backward smoothing of a filtered posterior.
DlmPosterior smooth_run(DlmPosterior post, const DiscountSpec& disc);

enum class Moments { Filtered, Smoothed };

/// Independent draws from N(mean_t, cov_t) at each t; result is [t][sample].
std::vector<std::vector<Vector>> sample_states(const DlmPosterior& post, Moments which,
                                               int n_samples, std::uint64_t seed);

/// log N(e; 0, q).
double gaussian_logpdf(const Vector& e, const Matrix& q);

}  // namespace tvparcor::mdlm
