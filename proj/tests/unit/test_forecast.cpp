#include "doctest.h"

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "tvparcor/errors.hpp"
#include "tvparcor/forecast.hpp"
#include "tvparcor/selection.hpp"
#include "tvparcor/whittle.hpp"

#include <random>

using namespace tvparcor;

namespace {

TimeSeries noise(int t_len, int k, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  Matrix x(t_len, k);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = z(eng);
  return TimeSeries(x);
}

}  // namespace

TEST_SUITE("forecast") {

TEST_CASE("static discount keeps the covariance") {
  const TimeSeries x = noise(120, 2, 1);
  const auto fit = lattice::fit(x, 2, lattice::default_prior(x), 1.0, 1.0);
  for (int h : {1, 5, 50}) {
    const auto mom = forecast::forecast_parcor(fit, h);
    for (int m = 0; m < 2; ++m) CHECK((mom[m].cov - fit.forward[m].final_filtered_cov).norm() < 1e-14);
  }
}

TEST_CASE("covariance grows linearly in the horizon") {
  const TimeSeries x = noise(120, 2, 2);
  const auto fit = lattice::fit(x, 2, lattice::default_prior(x), 0.95, 0.97);
  const auto h1 = forecast::forecast_parcor(fit, 1);
  const auto h2 = forecast::forecast_parcor(fit, 2);
  for (int m = 0; m < 2; ++m) {
    const Matrix w = forecast::evolution_covariance(fit.forward[m]);
    CHECK((h2[m].cov - h1[m].cov - w).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(h1[m].mean == fit.forward[m].final_filtered_mean);
  }
  for (int h = 1; h <= 100; h += 11) {
    for (const auto& mom : forecast::forecast_parcor(fit, h)) {
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(mom.cov).eigenvalues().minCoeff() > 0.0);
    }
  }
  CHECK_THROWS_AS(forecast::forecast_parcor(fit, 0), Error);
}

TEST_CASE("one-step point forecast is the fitted recursion") {
  const TimeSeries x = fixtures::wind_like(300, 3);
  const auto fit = lattice::fit(x, 2, lattice::default_prior(x), 0.99, 0.99);
  std::vector<Matrix> lam;
  for (const auto& rec : fit.forward) lam.push_back(linalg::unvec(rec.final_filtered_mean, 2, 2));
  const auto a = whittle::parcor_to_var(lam, lam).forward;
  const Vector expect = a[0] * x.at(299) + a[1] * x.at(298);
  const auto res = forecast::forecast_path(fit, x, 1, 0, 0);
  CHECK((res.point[0] - expect).norm() < 1e-12);
  CHECK_FALSE(res.has_bands);
  CHECK(res.bands.empty());
}

TEST_CASE("white noise forecasts near zero") {
  const TimeSeries x = noise(400, 2, 4);
  const auto fit = lattice::fit(x, 1, lattice::default_prior(x), 0.99, 0.99);
  const auto res = forecast::forecast_path(fit, x, 3, 500, 5);
  REQUIRE(res.has_bands);
  const Vector sd = fit.residual_noise.diagonal().cwiseSqrt();
  for (const auto& p : res.point) CHECK((p.array() / sd.array()).abs().maxCoeff() < 3.0);
}

TEST_CASE("bands are nested, widen with the horizon and reproduce under a seed") {
  const TimeSeries x = fixtures::wind_like(300, 6);
  const auto fit = lattice::fit(x, 2, lattice::default_prior(x), 0.98, 0.98);
  const auto a = forecast::forecast_path(fit, x, 10, 400, 7);
  const auto b = forecast::forecast_path(fit, x, 10, 400, 7);
  REQUIRE(a.has_bands);
  double prev_width = 0.0;
  for (int h = 0; h < 10; ++h) {
    CHECK((a.bands[1][h] - a.bands[0][h]).minCoeff() >= 0.0);
    CHECK((a.bands[2][h] - a.bands[1][h]).minCoeff() >= 0.0);
    CHECK(a.bands[0][h] == b.bands[0][h]);
    CHECK(a.bands[2][h] == b.bands[2][h]);
    const double width = (a.bands[2][h] - a.bands[0][h]).mean();
    if (h > 0) CHECK(width > prev_width);
    prev_width = width;
  }
}

TEST_CASE("forecast keeps the dominant period") {
  const TimeSeries x = fixtures::wind_like(720, 8);
  const auto res = selection::select(x, 2, selection::make_grid(0.98, 1.0, 0.005),
                                     lattice::default_prior(x), {.n_samples = 0, .compute_dic = false});
  const auto fc = forecast::forecast_path(res.fit, x, 72, 0, 9);
  std::vector<double> future, past;
  for (const auto& p : fc.point) future.push_back(p(0));
  for (int t = x.t_len() - 240; t < x.t_len(); ++t) past.push_back(x.values(t, 0));
  const int bf = oracle::dominant_bin(future);
  const int bp = oracle::dominant_bin(past);
  CHECK(bp == 10);
  CHECK(bf * 240 == bp * 72);
}

}
