#include "tvparcor/forecast.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/rng.hpp"
#include "tvparcor/spectral.hpp"
#include "tvparcor/whittle.hpp"

#include <cmath>

namespace tvparcor::forecast {

Matrix evolution_covariance(const StageRecord& rec) {
  const Matrix& c = rec.final_filtered_cov;
  Matrix w;
  if (rec.discount.is_uniform()) {
    w = c / rec.discount.delta(0) - c;
  } else {
    const Vector s = rec.discount.delta.cwiseSqrt().cwiseInverse();
    w = s.asDiagonal() * c * s.asDiagonal() - c;
  }
  return 0.5 * (w + w.transpose());
}

std::vector<ParcorMoments> forecast_parcor(const ParcorFit& fit, int h) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  std::vector<ParcorMoments> out;
  for (int m = 0; m < fit.order; ++m) {
    const StageRecord& rec = fit.forward[static_cast<std::size_t>(m)];
    out.push_back({rec.final_filtered_mean,
                   rec.final_filtered_cov + static_cast<double>(h) * evolution_covariance(rec)});
  }
  return out;
}

namespace {

std::vector<Matrix> var_from(const std::vector<Matrix>& lambda) {
  return whittle::parcor_to_var(lambda, lambda).forward;
}

Vector step(const std::vector<Matrix>& a, const std::vector<Vector>& history) {
  // history.back() is x̂_{T+s-1}
  Vector x = Vector::Zero(a.front().rows());
  for (std::size_t j = 1; j <= a.size(); ++j) x += a[j - 1] * history[history.size() - j];
  return x;
}

}  // namespace

ForecastResult forecast_path(const ParcorFit& fit, const TimeSeries& x, int h, int n_samples,
                             std::uint64_t seed, const std::vector<double>& probs) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (n_samples < 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 0");
  x.validate();
  if (x.k() != fit.k || x.t_len() < fit.order) {
    throw Error(ErrorCode::DimensionMismatch, "series does not match the fit");
  }
  const int k = fit.k;
  const auto order = static_cast<std::size_t>(fit.order);

  std::vector<Vector> seed_history;
  for (int t = x.t_len() - fit.order; t < x.t_len(); ++t) seed_history.push_back(x.at(t));

  ForecastResult out;
  out.horizon = h;
  out.probs = probs;
  out.n_samples = n_samples;
  out.seed = seed;

  std::vector<Matrix> mean_lambda(order);
  for (std::size_t m = 0; m < order; ++m) {
    mean_lambda[m] = linalg::unvec(fit.forward[m].final_filtered_mean, k, k);
  }
  const std::vector<Matrix> a_point = var_from(mean_lambda);
  {
    std::vector<Vector> hist = seed_history;
    for (int s = 0; s < h; ++s) {
      hist.push_back(step(a_point, hist));
      out.point.push_back(hist.back());
    }
  }
  if (n_samples == 0) return out;

  const double limit = 1e6 * std::max(x.values.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<Matrix> root_c(order), root_w(order);
  for (std::size_t m = 0; m < order; ++m) {
    root_c[m] = linalg::sym_sqrt(fit.forward[m].final_filtered_cov);
    root_w[m] = linalg::sym_sqrt(evolution_covariance(fit.forward[m]));
  }
  const Matrix root_s = linalg::sym_sqrt(fit.residual_noise);

  std::vector<std::vector<Vector>> paths;
  paths.reserve(static_cast<std::size_t>(n_samples));
  std::vector<Matrix> lam(order);
  std::vector<Vector> zc(order), zw(order);
  for (int s = 0; s < n_samples; ++s) {
    auto eng = rng::derive(seed, rng::Stream::Forecast, {static_cast<std::uint64_t>(s)});
    for (std::size_t m = 0; m < order; ++m) {
      zc[m] = rng::standard_normal(eng, k * k);
      zw[m] = rng::standard_normal(eng, k * k);
    }
    std::vector<Vector> hist = seed_history;
    std::vector<Vector> path;
    bool explosive = false;
    for (int step_i = 1; step_i <= h; ++step_i) {
      const double sh = std::sqrt(static_cast<double>(step_i));
      for (std::size_t m = 0; m < order; ++m) {
        const Vector v = fit.forward[m].final_filtered_mean + root_c[m] * zc[m] + sh * (root_w[m] * zw[m]);
        lam[m] = linalg::unvec(v, k, k);
      }
      Vector xn = step(var_from(lam), hist) + root_s * rng::standard_normal(eng, k);
      if (!xn.allFinite() || xn.cwiseAbs().maxCoeff() > limit) explosive = true;
      hist.push_back(xn);
      path.push_back(std::move(xn));
    }
    if (explosive) {
      ++out.explosive_paths;
    } else {
      paths.push_back(std::move(path));
    }
  }
  if (paths.empty()) return out;

  out.has_bands = true;
  out.bands.assign(probs.size(), std::vector<Vector>(static_cast<std::size_t>(h), Vector(k)));
  std::vector<double> xs(paths.size());
  for (int step_i = 0; step_i < h; ++step_i) {
    for (int i = 0; i < k; ++i) {
      for (std::size_t p = 0; p < probs.size(); ++p) {
        for (std::size_t s = 0; s < paths.size(); ++s) {
          xs[s] = paths[s][static_cast<std::size_t>(step_i)](i);
        }
        out.bands[p][static_cast<std::size_t>(step_i)](i) = spectral::quantile(xs, probs[p]);
      }
    }
  }
  return out;
}

}  // namespace tvparcor::forecast
