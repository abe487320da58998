#pragma once

// Discount-factor grid search per lattice stage, scree reporting, and an
// approximate DIC accumulated across stages for choosing the model order.

#include <cstdint>
#include <optional>
#include <vector>

#include "tvparcor/lattice.hpp"

namespace tvparcor::selection {

/// Discount grid lo, lo+step, ..., up to hi (inclusive within round-off).
std::vector<double> make_grid(double lo, double hi, double step);

struct StageSearch {
  mdlm::DiscountSpec disc_f;
  mdlm::DiscountSpec disc_b;
  double loglik_f = 0.0;
  double loglik_b = 0.0;
  std::vector<double> grid_loglik_f;
  std::vector<double> grid_loglik_b;
  StageResult result;
};

/// Searches one scalar discount per direction (forward and backward independently),
/// maximizing the filter log-likelihood. Ties go to the larger discount.
StageSearch grid_search_stage(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m,
                              const mdlm::PriorSpec& prior_f, const mdlm::PriorSpec& prior_b,
                              const std::vector<double>& grid,
                              const lattice::LatticeOptions& options = {});

struct DicTerm {
  double loglik_plugin = 0.0;  // over the stage range
  double loglik_window = 0.0;  // over the requested window
  double p_dic_stage = 0.0;
  int n_obs = 0;
};

/// Inputs of the stage-m DIC term: the forward regression data, the filtered
/// moments of B_t θ_t, the plug-in coefficients and the plug-in noise.
struct DicInputs {
  int stage = 1;
  IndexRange range;
  std::vector<Vector> responses;
  std::vector<Vector> regressors;
  std::vector<Vector> filtered_mean;  // state means m_t
  std::vector<Matrix> design_cov;     // B_t C_t B_tᵀ
  std::vector<Matrix> plugin_coefficients;  // K × K per t
  Matrix noise;                             // S_T
};

DicInputs dic_inputs(const StageResult& stage);

/// Plug-in log-likelihood and p_DIC for one stage. Filtering draws enter only
/// through B_t θ_t, so they are drawn directly from N(B_t m_t, B_t C_t B_tᵀ).
/// The plug-in term is also summed over `window` (default: the stage range).
DicTerm dic_stage_term(const DicInputs& in, int n_samples, std::uint64_t seed,
                       std::optional<IndexRange> window = std::nullopt);

struct OrderEntry {
  int order = 0;
  double delta_f = 1.0;
  double delta_b = 1.0;
  double loglik_f = 0.0;
  double loglik_b = 0.0;
  double loglik_plugin = 0.0;
  double loglik_window = 0.0;  // plug-in log-likelihood on [p_max, T-1]
  double p_dic_stage = 0.0;
  double p_dic_cum = 0.0;
  double dic = 0.0;
  int n_obs = 0;
  friend bool operator==(const OrderEntry&, const OrderEntry&) = default;
};

struct SelectionReport {
  std::vector<OrderEntry> entries;
  int chosen_order = 0;
  std::vector<double> grid;
  int n_samples = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const SelectionReport&, const SelectionReport&) = default;
};

/// argmin of DIC, ties to the smaller order.
int choose_order(const std::vector<OrderEntry>& entries);

struct ScreePoint {
  int order = 0;
  double loglik = 0.0;
  double pct_change = 0.0;  // NaN for the first order
};
std::vector<ScreePoint> scree_values(const SelectionReport& report);

struct SelectOptions {
  int n_samples = 200;
  std::uint64_t seed = 0;
  bool compute_dic = true;
  lattice::LatticeOptions lattice;
};

struct SelectionResult {
  SelectionReport report;
  ParcorFit full_fit;  // all p_max stages
  ParcorFit fit;       // truncated to the chosen order
};

/// Stage-wise search up to p_max, DIC per order, final fit at the chosen order.
SelectionResult select(const TimeSeries& x, int p_max, const std::vector<double>& grid,
                       const mdlm::PriorSpec& prior, const SelectOptions& options = {});

}  // namespace tvparcor::selection
