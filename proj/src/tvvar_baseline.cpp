#include "tvparcor/tvvar_baseline.hpp"

#include "tvparcor/errors.hpp"

#include <chrono>
#include <limits>
#include <optional>

namespace tvparcor::baseline {

mdlm::PriorSpec default_prior(const TimeSeries& x, int order) {
  return mdlm::PriorSpec::standard(order * x.k() * x.k(), x.sample_covariance());
}

TvvarDlmFit fit_tvvar_dlm(const TimeSeries& x, int order, const mdlm::PriorSpec& prior,
                          const std::vector<double>& grid, const BaselineOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  x.validate();
  if (order < 1 || x.t_len() <= order) {
    throw Error(ErrorCode::InvalidArgument, "TV-VAR needs 1 <= P < T");
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty discount grid");
  const int k = x.k();
  const IndexRange range{order, x.t_len() - 1};

  std::vector<Vector> responses;
  std::vector<Vector> regressors;
  for (int t = range.lo; t <= range.hi; ++t) {
    responses.push_back(x.at(t));
    Vector z(order * k);
    for (int j = 1; j <= order; ++j) z.segment((j - 1) * k, k) = x.at(t - j);
    regressors.push_back(std::move(z));
  }

  mdlm::FilterOptions fo;
  fo.keep_covariances = options.keep_covariances;
  TvvarDlmFit out;
  out.order = order;
  out.k = k;
  out.range = range;
  out.grid = grid;
  std::optional<mdlm::DlmPosterior> best;
  const int n = order * k * k;
  for (double delta : grid) {
    try {
      auto post = mdlm::filter_run(responses, regressors, range, prior,
                                   mdlm::DiscountSpec::uniform(n, delta), fo);
      out.grid_loglik.push_back(post.loglik);
      if (!best || post.loglik > best->loglik ||
          (post.loglik == best->loglik && delta > out.discount)) {
        out.discount = delta;
        best = std::move(post);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState) throw;
      out.grid_loglik.push_back(-std::numeric_limits<double>::infinity());
    }
  }
  if (!best) throw Error(ErrorCode::NonFiniteState, "every discount candidate diverged");

  auto smoothed = mdlm::smooth_run(std::move(*best), mdlm::DiscountSpec::uniform(n, out.discount));
  out.smoothed_mean = std::move(smoothed.smoothed_mean);
  out.smoothed_cov = std::move(smoothed.smoothed_cov);
  out.noise = smoothed.final_noise();
  out.loglik = smoothed.loglik;
  out.wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TvvarCoefficients to_coefficients(const TvvarDlmFit& fit) {
  TvvarCoefficients c;
  c.order = fit.order;
  c.k = fit.k;
  c.range = fit.range;
  c.forward.reserve(fit.smoothed_mean.size());
  for (const auto& s : fit.smoothed_mean) {
    // vec of the K × PK matrix [A_1 ... A_P]
    const Matrix stacked = linalg::unvec(s, fit.k, fit.order * fit.k);
    std::vector<Matrix> a;
    for (int j = 0; j < fit.order; ++j) a.push_back(stacked.middleCols(j * fit.k, fit.k));
    c.forward.push_back(std::move(a));
  }
  return c;
}

}  // namespace tvparcor::baseline
