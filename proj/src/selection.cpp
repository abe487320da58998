#include "tvparcor/selection.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace tvparcor::selection {

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi <= 1.0) || !(step > 0.0) || !(lo <= hi)) {
    throw Error(ErrorCode::InvalidArgument, "discount grid needs 0 < lo <= hi <= 1 and step > 0");
  }
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  return g;
}

namespace {

struct Candidate {
  double delta = 1.0;
  std::optional<mdlm::DlmPosterior> post;
};

Candidate search_direction(const lattice::StageData& d, const mdlm::PriorSpec& prior,
                           const std::vector<double>& grid, const mdlm::FilterOptions& fo,
                           std::vector<double>& logliks) {
  const int n = static_cast<int>(d.regressors.front().size() * d.responses.front().size());
  Candidate best;
  logliks.clear();
  std::optional<Error> last_error;
  for (double delta : grid) {
    const auto disc = mdlm::DiscountSpec::uniform(n, delta);
    try {
      auto post = mdlm::filter_run(d.responses, d.regressors, d.range, prior, disc, fo);
      logliks.push_back(post.loglik);
      const bool better = !best.post || post.loglik > best.post->loglik ||
                          (post.loglik == best.post->loglik && delta > best.delta);
      if (better) {
        best.delta = delta;
        best.post = std::move(post);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteState) throw;
      logliks.push_back(-std::numeric_limits<double>::infinity());
      last_error = e;
    }
  }
  if (!best.post) throw *last_error;
  return best;
}

}  // namespace

StageSearch grid_search_stage(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m,
                              const mdlm::PriorSpec& prior_f, const mdlm::PriorSpec& prior_b,
                              const std::vector<double>& grid,
                              const lattice::LatticeOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty discount grid");
  for (double d : grid) {
    if (!(d > 0.0 && d <= 1.0)) throw Error(ErrorCode::InvalidArgument, "grid values must lie in (0, 1]");
  }
  const int k = static_cast<int>(f_prev.values.front().size());
  const int t_len = f_prev.range.hi + 1;
  if (t_len - m < lattice::minimum_stage_length(k)) {
    throw Error(ErrorCode::RangeExhausted,
                "stage " + std::to_string(m) + " has " + std::to_string(t_len - m) +
                    " observations, needs " + std::to_string(lattice::minimum_stage_length(k)) +
                    "; reduce the maximum order");
  }
  auto fd = lattice::stage_data(f_prev, b_prev, m, Direction::Forward);
  auto bd = lattice::stage_data(f_prev, b_prev, m, Direction::Backward);
  mdlm::FilterOptions fo;
  fo.keep_covariances = options.keep_covariances;

  StageSearch out;
  Candidate cf = search_direction(fd, prior_f, grid, fo, out.grid_loglik_f);
  Candidate cb = search_direction(bd, prior_b, grid, fo, out.grid_loglik_b);
  const int n = k * k;
  out.disc_f = mdlm::DiscountSpec::uniform(n, cf.delta);
  out.disc_b = mdlm::DiscountSpec::uniform(n, cb.delta);
  out.loglik_f = cf.post->loglik;
  out.loglik_b = cb.post->loglik;

  StageResult& r = out.result;
  r.forward_post = mdlm::smooth_run(std::move(*cf.post), out.disc_f);
  r.backward_post = mdlm::smooth_run(std::move(*cb.post), out.disc_b);
  r.forward = lattice::make_record(r.forward_post, m, Direction::Forward, out.disc_f, prior_f);
  r.backward = lattice::make_record(r.backward_post, m, Direction::Backward, out.disc_b, prior_b);
  r.f_next = lattice::residuals(fd, r.forward);
  r.b_next = lattice::residuals(bd, r.backward);
  r.forward_responses = std::move(fd.responses);
  r.forward_regressors = std::move(fd.regressors);
  return out;
}

DicInputs dic_inputs(const StageResult& stage) {
  DicInputs in;
  in.stage = stage.forward.stage;
  in.range = stage.forward.range;
  in.responses = stage.forward_responses;
  in.regressors = stage.forward_regressors;
  in.filtered_mean = stage.forward_post.filtered_mean;
  in.design_cov = stage.forward_post.design_cov;
  in.plugin_coefficients = stage.forward.coefficients;
  in.noise = stage.forward.final_noise;
  return in;
}

DicTerm dic_stage_term(const DicInputs& in, int n_samples, std::uint64_t seed,
                       std::optional<IndexRange> window) {
  const auto n_obs = in.responses.size();
  if (n_obs == 0 || in.regressors.size() != n_obs || in.filtered_mean.size() != n_obs ||
      in.design_cov.size() != n_obs || in.plugin_coefficients.size() != n_obs) {
    throw Error(ErrorCode::DimensionMismatch, "DIC inputs must cover the stage range");
  }
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "n_samples must be positive");
  const int k = static_cast<int>(in.responses.front().size());
  const Matrix noise = linalg::symmetrized(in.noise);
  Eigen::LLT<Matrix> llt(noise);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NonFiniteState, "plug-in noise covariance is not positive definite");
  }
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double norm_const = -0.5 * (k * std::log(2.0 * std::numbers::pi) + logdet);
  auto logpdf = [&](const Vector& resid) {
    return norm_const - 0.5 * llt.matrixL().solve(resid).squaredNorm();
  };

  DicTerm out;
  out.n_obs = static_cast<int>(n_obs);
  // per-draw sums of ℓ(filtered mean) - ℓ(draw), so a degenerate posterior gives exactly 0
  std::vector<double> gap(static_cast<std::size_t>(n_samples), 0.0);
  for (std::size_t i = 0; i < n_obs; ++i) {
    const Vector& y = in.responses[i];
    const Vector& v = in.regressors[i];
    const double ll = logpdf(y - in.plugin_coefficients[i] * v);
    out.loglik_plugin += ll;
    if (window.value_or(in.range).contains(in.range.lo + static_cast<int>(i))) out.loglik_window += ll;

    const Vector mean = linalg::kron_apply(v, k, in.filtered_mean[i]);
    const double filtered_ll = logpdf(y - mean);
    const Matrix root = linalg::sym_sqrt(in.design_cov[i]);
    auto eng = rng::derive(seed, rng::Stream::DicSamples,
                           {static_cast<std::uint64_t>(in.stage),
                            static_cast<std::uint64_t>(in.range.lo + static_cast<int>(i))});
    for (auto& g : gap) g += filtered_ll - logpdf(y - mean - root * rng::standard_normal(eng, k));
  }
  double mean_gap = 0.0;
  for (double g : gap) mean_gap += g;
  out.p_dic_stage = 2.0 * mean_gap / static_cast<double>(n_samples);
  return out;
}

int choose_order(const std::vector<OrderEntry>& entries) {
  if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "no orders evaluated");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].dic < entries[best].dic) best = i;
  }
  return entries[best].order;
}

std::vector<ScreePoint> scree_values(const SelectionReport& report) {
  std::vector<ScreePoint> out;
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    ScreePoint p;
    p.order = report.entries[i].order;
    p.loglik = report.entries[i].loglik_f;
    if (i == 0) {
      p.pct_change = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double prev = report.entries[i - 1].loglik_f;
      p.pct_change = 100.0 * (p.loglik - prev) / std::abs(prev);
    }
    out.push_back(p);
  }
  return out;
}

SelectionResult select(const TimeSeries& x, int p_max, const std::vector<double>& grid,
                       const mdlm::PriorSpec& prior, const SelectOptions& options) {
  if (p_max < 1) throw Error(ErrorCode::InvalidArgument, "p_max must be >= 1");
  auto [f, b] = lattice::init_stage0(x);

  SelectionResult res;
  res.report.grid = grid;
  res.report.n_samples = options.n_samples;
  res.report.seed = options.seed;
  ParcorFit& full = res.full_fit;
  full.k = x.k();
  full.t_len = x.t_len();
  full.labels = x.labels;
  full.grid = grid;

  // Every order is scored on the times all candidate orders can explain.
  const IndexRange window{p_max, x.t_len() - 1};
  double p_cum = 0.0;
  for (int m = 1; m <= p_max; ++m) {
    StageSearch s = grid_search_stage(f, b, m, prior, prior, grid, options.lattice);
    OrderEntry e;
    e.order = m;
    e.delta_f = s.disc_f.delta(0);
    e.delta_b = s.disc_b.delta(0);
    e.loglik_f = s.loglik_f;
    e.loglik_b = s.loglik_b;
    if (options.compute_dic) {
      const DicTerm term =
          dic_stage_term(dic_inputs(s.result), options.n_samples, options.seed, window);
      p_cum += term.p_dic_stage;
      e.loglik_plugin = term.loglik_plugin;
      e.p_dic_stage = term.p_dic_stage;
      e.p_dic_cum = p_cum;
      e.loglik_window = term.loglik_window;
      e.dic = -2.0 * term.loglik_window + 2.0 * p_cum;
      e.n_obs = term.n_obs;
    } else {
      e.n_obs = s.result.forward.range.size();
    }
    res.report.entries.push_back(e);
    full.forward.push_back(std::move(s.result.forward));
    full.backward.push_back(std::move(s.result.backward));
    f = std::move(s.result.f_next);
    b = std::move(s.result.b_next);
  }
  full.order = p_max;
  full.residual_noise = full.forward.back().final_noise;
  res.report.chosen_order = options.compute_dic ? choose_order(res.report.entries) : p_max;
  res.fit = full.truncated(res.report.chosen_order);
  return res;
}

}  // namespace tvparcor::selection
