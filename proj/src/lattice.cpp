#include "tvparcor/lattice.hpp"

#include "tvparcor/errors.hpp"

#include <string>
#include <utility>

namespace tvparcor {

TimeSeries::TimeSeries(Matrix v, std::vector<std::string> lbls, std::optional<double> interval)
    : values(std::move(v)), labels(std::move(lbls)), sample_interval(interval) {}

void TimeSeries::validate() const {
  if (values.rows() < 2 || values.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "a time series needs T >= 2 and K >= 1");
  }
  if (!values.allFinite()) throw Error(ErrorCode::NonFiniteInput, "time series values");
  if (!labels.empty() && static_cast<int>(labels.size()) != k()) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from K");
  }
  if (sample_interval && !(*sample_interval > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample interval must be positive");
  }
}

Matrix TimeSeries::sample_covariance() const {
  const Matrix centered = values.rowwise() - values.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(values.rows());
  return 0.5 * (cov + cov.transpose());
}

ParcorFit ParcorFit::truncated(int new_order) const {
  if (new_order < 1 || new_order > order) {
    throw Error(ErrorCode::InvalidArgument, "cannot truncate to order " + std::to_string(new_order));
  }
  ParcorFit out = *this;
  out.order = new_order;
  out.forward.resize(static_cast<std::size_t>(new_order));
  out.backward.resize(static_cast<std::size_t>(new_order));
  out.residual_noise = out.forward.back().final_noise;
  return out;
}

namespace lattice {

int minimum_stage_length(int k) { return 10 * k; }

mdlm::PriorSpec default_prior(const TimeSeries& x) {
  const int k = x.k();
  return mdlm::PriorSpec::standard(k * k, x.sample_covariance());
}

std::pair<ErrorSeries, ErrorSeries> init_stage0(const TimeSeries& x) {
  x.validate();
  ErrorSeries f{0, Direction::Forward, {0, x.t_len() - 1}, {}};
  f.values.reserve(static_cast<std::size_t>(x.t_len()));
  for (int t = 0; t < x.t_len(); ++t) f.values.push_back(x.at(t));
  ErrorSeries b = f;
  b.direction = Direction::Backward;
  return {std::move(f), std::move(b)};
}

StageData stage_data(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m, Direction dir) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "stage index must be >= 1");
  // f_prev lives on [m-1, T-1], b_prev on [0, T-m].
  const int t_last = f_prev.range.hi;
  StageData d;
  if (dir == Direction::Forward) {
    d.range = {m, t_last};
    if (!f_prev.range.contains(d.range) ||
        !b_prev.range.contains(IndexRange{d.range.lo - m, d.range.hi - m})) {
      throw Error(ErrorCode::RangeMismatch, "stage inputs do not cover the forward range");
    }
    for (int t = d.range.lo; t <= d.range.hi; ++t) {
      d.responses.push_back(f_prev.at(t));
      d.regressors.push_back(b_prev.at(t - m));
    }
  } else {
    d.range = {0, t_last - m};
    if (!b_prev.range.contains(d.range) ||
        !f_prev.range.contains(IndexRange{d.range.lo + m, d.range.hi + m})) {
      throw Error(ErrorCode::RangeMismatch, "stage inputs do not cover the backward range");
    }
    for (int t = d.range.lo; t <= d.range.hi; ++t) {
      d.responses.push_back(b_prev.at(t));
      d.regressors.push_back(f_prev.at(t + m));
    }
  }
  return d;
}

StageRecord make_record(const mdlm::DlmPosterior& post, int m, Direction dir,
                        const mdlm::DiscountSpec& disc, const mdlm::PriorSpec& prior) {
  if (!post.smoothed) throw Error(ErrorCode::NotSmoothed, "stage posterior is not smoothed");
  StageRecord rec;
  rec.stage = m;
  rec.direction = dir;
  rec.range = post.range;
  rec.discount = disc;
  rec.prior = prior;
  rec.coefficients.reserve(post.smoothed_mean.size());
  for (const auto& s : post.smoothed_mean) {
    rec.coefficients.push_back(linalg::unvec(s, post.k, post.k));
  }
  rec.coefficient_cov = post.smoothed_cov;
  rec.loglik = post.loglik;
  rec.final_noise = post.final_noise();
  rec.final_filtered_mean = post.last_mean;
  rec.final_filtered_cov = post.last_cov;
  return rec;
}

ErrorSeries residuals(const StageData& data, const StageRecord& rec) {
  ErrorSeries out{rec.stage, rec.direction, data.range, {}};
  out.values.reserve(data.responses.size());
  for (std::size_t i = 0; i < data.responses.size(); ++i) {
    out.values.push_back(data.responses[i] - rec.coefficients[i] * data.regressors[i]);
  }
  return out;
}

StageResult run_stage(const ErrorSeries& f_prev, const ErrorSeries& b_prev, int m,
                      const mdlm::PriorSpec& prior_f, const mdlm::PriorSpec& prior_b,
                      const mdlm::DiscountSpec& disc_f, const mdlm::DiscountSpec& disc_b,
                      const LatticeOptions& options) {
  const int k = static_cast<int>(f_prev.values.front().size());
  const int t_len = f_prev.range.hi + 1;
  if (t_len - m < minimum_stage_length(k)) {
    throw Error(ErrorCode::RangeExhausted,
                "stage " + std::to_string(m) + " has " + std::to_string(t_len - m) +
                    " observations, needs " + std::to_string(minimum_stage_length(k)) +
                    "; reduce the model order");
  }
  StageData fd = stage_data(f_prev, b_prev, m, Direction::Forward);
  StageData bd = stage_data(f_prev, b_prev, m, Direction::Backward);

  mdlm::FilterOptions fo;
  fo.keep_covariances = options.keep_covariances;

  StageResult res;
  res.forward_post = mdlm::smooth_run(
      mdlm::filter_run(fd.responses, fd.regressors, fd.range, prior_f, disc_f, fo), disc_f);
  res.backward_post = mdlm::smooth_run(
      mdlm::filter_run(bd.responses, bd.regressors, bd.range, prior_b, disc_b, fo), disc_b);
  res.forward = make_record(res.forward_post, m, Direction::Forward, disc_f, prior_f);
  res.backward = make_record(res.backward_post, m, Direction::Backward, disc_b, prior_b);
  res.f_next = residuals(fd, res.forward);
  res.b_next = residuals(bd, res.backward);
  res.forward_responses = std::move(fd.responses);
  res.forward_regressors = std::move(fd.regressors);
  return res;
}

ParcorFit fit(const TimeSeries& x, int order, const std::vector<StageHyper>& stages,
              const LatticeOptions& options) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "order must be >= 1");
  if (static_cast<int>(stages.size()) < order) {
    throw Error(ErrorCode::InvalidArgument, "hyperparameters needed for every stage");
  }
  auto [f, b] = init_stage0(x);
  ParcorFit out;
  out.order = order;
  out.k = x.k();
  out.t_len = x.t_len();
  out.labels = x.labels;
  for (int m = 1; m <= order; ++m) {
    const auto& h = stages[static_cast<std::size_t>(m - 1)];
    StageResult r = run_stage(f, b, m, h.prior_f, h.prior_b, h.disc_f, h.disc_b, options);
    out.forward.push_back(std::move(r.forward));
    out.backward.push_back(std::move(r.backward));
    f = std::move(r.f_next);
    b = std::move(r.b_next);
  }
  out.residual_noise = out.forward.back().final_noise;
  return out;
}

ParcorFit fit(const TimeSeries& x, int order, const mdlm::PriorSpec& prior, double delta_f,
              double delta_b, const LatticeOptions& options) {
  const int n = x.k() * x.k();
  std::vector<StageHyper> hs(static_cast<std::size_t>(std::max(order, 0)),
                             StageHyper{prior, prior, mdlm::DiscountSpec::uniform(n, delta_f),
                                        mdlm::DiscountSpec::uniform(n, delta_b)});
  return fit(x, order, hs, options);
}

}  // namespace lattice
}  // namespace tvparcor
