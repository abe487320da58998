#pragma once

// Stage-wise lattice fit of time-varying forward/backward PARCOR matrices.
//
// At stage m the forward regression explains f^{(m-1)}_t by Λ_t b^{(m-1)}_{t-m}
// and the backward regression explains b^{(m-1)}_t by Θ_t f^{(m-1)}_{t+m}.
// With f^{(0)} = b^{(0)} = x on [0, T-1], forward stage-m series live on
// [m, T-1] and backward ones on [0, T-1-m] (0-based, inclusive).

#include <optional>
#include <string>
#include <vector>

#include "tvparcor/mdlm.hpp"

namespace tvparcor {

struct TimeSeries {
  Matrix values;  // T × K
  std::vector<std::string> labels;
  std::optional<double> sample_interval;

  TimeSeries() = default;
  explicit TimeSeries(Matrix v, std::vector<std::string> labels = {},
                      std::optional<double> interval = std::nullopt);

  int t_len() const noexcept { return static_cast<int>(values.rows()); }
  int k() const noexcept { return static_cast<int>(values.cols()); }
  Vector at(int t) const { return values.row(t).transpose(); }
  void validate() const;
  /// Sample covariance (divisor T) about the component means.
  Matrix sample_covariance() const;
};

enum class Direction { Forward, Backward };

struct ErrorSeries {
  int stage = 0;
  Direction direction = Direction::Forward;
  IndexRange range;
  std::vector<Vector> values;

  const Vector& at(int t) const { return values.at(static_cast<std::size_t>(t - range.lo)); }
};

/// Everything retained from one direction of one lattice stage.
struct StageRecord {
  int stage = 0;
  Direction direction = Direction::Forward;
  IndexRange range;
  mdlm::DiscountSpec discount;
  mdlm::PriorSpec prior;
  std::vector<Matrix> coefficients;    // smoothed PARCOR matrices, K × K, per t
  std::vector<Matrix> coefficient_cov;  // smoothed K² × K² covariances (may be empty)
  double loglik = 0.0;
  Matrix final_noise;          // S at range.hi
  Vector final_filtered_mean;  // m at range.hi
  Matrix final_filtered_cov;   // C at range.hi

  const Matrix& coefficient(int t) const {
    return coefficients.at(static_cast<std::size_t>(t - range.lo));
  }
  bool has_covariances() const { return !coefficient_cov.empty(); }
};

struct ParcorFit {
  int order = 0;
  int k = 0;
  int t_len = 0;
  std::vector<StageRecord> forward;
  std::vector<StageRecord> backward;
  Matrix residual_noise;  // S_T of the last forward stage
  std::vector<std::string> labels;
  std::vector<double> grid;  // discount grid searched, empty for fixed discounts

  /// Copy restricted to the first `order` stages.
  ParcorFit truncated(int order) const;
};

struct StageResult {
  StageRecord forward;
  StageRecord backward;
  ErrorSeries f_next;
  ErrorSeries b_next;
  mdlm::DlmPosterior forward_post;
  mdlm::DlmPosterior backward_post;
  std::vector<Vector> forward_responses;
  std::vector<Vector> forward_regressors;
};

namespace lattice {

struct LatticeOptions {
  bool keep_covariances = true;
};

/// Minimum number of time steps a stage needs: 10·K (i.e. 10·K² scalar observations).
int minimum_stage_length(int k);

/// Default prior: m0 = 0, C0 = I_{K²}, n0 = 1, S0 = sample covariance of x.
mdlm::PriorSpec default_prior(const TimeSeries& x);

std::pair<ErrorSeries, ErrorSeries> init_stage0(const TimeSeries& x);

/// Regression data for the forward (or backward) model of stage m.
struct StageData {
  IndexRange range;
  std::vector<Vector> responses;
  std::vector<Vector> regressors;
};
StageData stage_data(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m, Direction dir);

/// Builds a record from a smoothed posterior of stage m.
StageRecord make_record(const mdlm::DlmPosterior& smoothed, int m, Direction dir,
                        const mdlm::DiscountSpec& disc, const mdlm::PriorSpec& prior);

/// Residual series of stage m given the stage's smoothed coefficients.
ErrorSeries residuals(const StageData& data, const StageRecord& rec);

StageResult run_stage(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m,
                      const mdlm::PriorSpec& prior_f, const mdlm::PriorSpec& prior_b,
                      const mdlm::DiscountSpec& disc_f, const mdlm::DiscountSpec& disc_b,
                      const LatticeOptions& options = {});

struct StageHyper {
  mdlm::PriorSpec prior_f, prior_b;
  mdlm::DiscountSpec disc_f, disc_b;
};

ParcorFit fit(const TimeSeries& x, int order, const std::vector<StageHyper>& stages,
              const LatticeOptions& options = {});

/// Same prior and scalar discounts at every stage.
ParcorFit fit(const TimeSeries& x, int order, const mdlm::PriorSpec& prior, double delta_f,
              double delta_b, const LatticeOptions& options = {});

}  // namespace lattice
}  // namespace tvparcor
