#include "doctest.h"

#include "../oracles.hpp"
#include "tvparcor/errors.hpp"
#include "tvparcor/mdlm.hpp"

#include <random>

using namespace tvparcor;

namespace {

struct Instance {
  std::vector<Vector> y, v;
  mdlm::PriorSpec prior;
  mdlm::DiscountSpec disc;
  Matrix sigma;
};

Instance random_instance(std::mt19937_64& eng, bool uniform) {
  std::uniform_int_distribution<int> kd(1, 2), td(1, 5), pd(1, 2);
  std::uniform_real_distribution<double> dd(0.8, 1.0);
  std::normal_distribution<double> z;
  const int k = kd(eng), t_len = td(eng), len = pd(eng);
  const int n = k * len;
  Instance inst;
  for (int t = 0; t < t_len; ++t) {
    inst.y.push_back(Vector::NullaryExpr(k, [&](Eigen::Index) { return z(eng); }));
    inst.v.push_back(Vector::NullaryExpr(len, [&](Eigen::Index) { return z(eng); }));
  }
  inst.sigma = oracle::random_spd(eng, k) * 0.5;
  inst.prior.m0 = Vector::NullaryExpr(n, [&](Eigen::Index) { return 0.3 * z(eng); });
  inst.prior.c0 = SymMatrix(oracle::random_spd(eng, n));
  inst.prior.n0 = 1.0;
  inst.prior.s0 = SymMatrix(inst.sigma);
  inst.disc.delta = uniform ? Vector::Constant(n, dd(eng))
                            : Vector(Vector::NullaryExpr(n, [&](Eigen::Index) { return dd(eng); }));
  return inst;
}

}  // namespace

TEST_SUITE("mdlm") {

TEST_CASE("filter and smoother match dense Gaussian conditioning") {
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const Instance inst = random_instance(eng, rep % 2 == 0);
    const IndexRange range{3, 3 + static_cast<int>(inst.y.size()) - 1};
    mdlm::FilterOptions opts;
    opts.fixed_noise = inst.sigma;
    auto post = mdlm::filter_run(inst.y, inst.v, range, inst.prior, inst.disc, opts);
    post = mdlm::smooth_run(std::move(post), inst.disc);
    const auto ref = oracle::brute_force_dlm(inst.y, inst.v, inst.prior.m0, inst.prior.c0.matrix(),
                                             inst.disc.delta, inst.sigma);
    for (std::size_t t = 0; t < inst.y.size(); ++t) {
      CHECK((post.filtered_mean[t] - ref.filt_mean[t]).lpNorm<Eigen::Infinity>() < 1e-8);
      CHECK((post.filtered_cov[t] - ref.filt_cov[t]).lpNorm<Eigen::Infinity>() < 1e-8);
      CHECK((post.smoothed_mean[t] - ref.smooth_mean[t]).lpNorm<Eigen::Infinity>() < 1e-8);
      CHECK((post.smoothed_cov[t] - ref.smooth_cov[t]).lpNorm<Eigen::Infinity>() < 1e-8);
    }
    CHECK(post.loglik == doctest::Approx(ref.loglik).epsilon(1e-9));
  }
}

TEST_CASE("means-only smoothing agrees with the covariance path") {
  std::mt19937_64 eng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance inst = random_instance(eng, true);
    const IndexRange range{0, static_cast<int>(inst.y.size()) - 1};
    auto full = mdlm::smooth_run(mdlm::filter_run(inst.y, inst.v, range, inst.prior, inst.disc), inst.disc);
    mdlm::FilterOptions lean;
    lean.keep_covariances = false;
    auto thin = mdlm::smooth_run(mdlm::filter_run(inst.y, inst.v, range, inst.prior, inst.disc, lean),
                                 inst.disc);
    CHECK_FALSE(thin.has_covariances());
    for (std::size_t t = 0; t < inst.y.size(); ++t) {
      CHECK((full.smoothed_mean[t] - thin.smoothed_mean[t]).norm() < 1e-10);
    }
    CHECK(full.loglik == doctest::Approx(thin.loglik));
  }
}

TEST_CASE("estimated noise tracks the residual scale") {
  std::mt19937_64 eng(2);
  std::normal_distribution<double> z;
  std::vector<Vector> y, v;
  for (int t = 0; t < 2000; ++t) {
    Vector vt(1);
    vt << z(eng);
    Vector yt(2);
    yt << 0.5 * vt(0) + 2.0 * z(eng), -0.3 * vt(0) + 0.5 * z(eng);
    y.push_back(yt);
    v.push_back(vt);
  }
  const auto prior = mdlm::PriorSpec::standard(2, Matrix::Identity(2, 2));
  const auto post = mdlm::filter_run(y, v, {0, 1999}, prior, mdlm::DiscountSpec::uniform(2, 1.0));
  const Matrix& s = post.final_noise();
  CHECK(s(0, 0) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(s(1, 1) == doctest::Approx(0.25).epsilon(0.1));
  CHECK(post.last_mean(0) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(post.last_mean(1) == doctest::Approx(-0.3).epsilon(0.1));
}

TEST_CASE("an outlier lowers the log-likelihood") {
  std::mt19937_64 eng(9);
  std::normal_distribution<double> z;
  std::vector<Vector> y, v;
  for (int t = 0; t < 60; ++t) {
    y.push_back(Vector::NullaryExpr(2, [&](Eigen::Index) { return z(eng); }));
    v.push_back(Vector::NullaryExpr(1, [&](Eigen::Index) { return z(eng); }));
  }
  const auto prior = mdlm::PriorSpec::standard(2, Matrix::Identity(2, 2));
  const auto disc = mdlm::DiscountSpec::uniform(2, 0.99);
  const double base = mdlm::filter_run(y, v, {0, 59}, prior, disc).loglik;
  double last = base;
  for (double bump : {5.0, 10.0, 20.0}) {
    auto yb = y;
    yb[30](0) += bump;
    const double ll = mdlm::filter_run(yb, v, {0, 59}, prior, disc).loglik;
    CHECK(ll < last);
    last = ll;
  }
}

TEST_CASE("validation errors") {
  const auto prior = mdlm::PriorSpec::standard(2, Matrix::Identity(2, 2));
  std::vector<Vector> y{Vector::Zero(2)}, v{Vector::Ones(1)};
  auto expect = [](auto&& fn, ErrorCode code) {
    try {
      fn();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect([&] { mdlm::filter_run(y, v, {0, 0}, prior, mdlm::DiscountSpec::uniform(2, 1.2)); },
         ErrorCode::InvalidArgument);
  expect([&] { mdlm::filter_run(y, v, {0, 0}, prior, mdlm::DiscountSpec::uniform(3, 0.9)); },
         ErrorCode::DimensionMismatch);
  y[0](1) = std::numeric_limits<double>::infinity();
  expect([&] { mdlm::filter_run(y, v, {0, 0}, prior, mdlm::DiscountSpec::uniform(2, 0.9)); },
         ErrorCode::NonFiniteInput);
}

TEST_CASE("state samples are reproducible and centered") {
  std::mt19937_64 eng(4);
  const Instance inst = random_instance(eng, true);
  const IndexRange range{0, static_cast<int>(inst.y.size()) - 1};
  const auto post =
      mdlm::smooth_run(mdlm::filter_run(inst.y, inst.v, range, inst.prior, inst.disc), inst.disc);
  const auto a = mdlm::sample_states(post, mdlm::Moments::Smoothed, 4000, 17);
  const auto b = mdlm::sample_states(post, mdlm::Moments::Smoothed, 4000, 17);
  REQUIRE(a.size() == inst.y.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    Vector mean = Vector::Zero(post.state_dim);
    for (std::size_t s = 0; s < a[t].size(); ++s) {
      CHECK(a[t][s] == b[t][s]);
      mean += a[t][s];
    }
    mean /= 4000.0;
    const Vector sd = post.smoothed_cov[t].diagonal().cwiseSqrt();
    CHECK(((mean - post.smoothed_mean[t]).array() / sd.array()).abs().maxCoeff() < 0.1);
  }
}

TEST_CASE("gaussian log density") {
  Vector e(1);
  e << 0.0;
  Matrix q(1, 1);
  q << 1.0;
  CHECK(mdlm::gaussian_logpdf(e, q) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
}


TEST_CASE("zero data keeps a zero state") {
  std::vector<Vector> y(6, Vector::Zero(1)), v(6, Vector::Ones(1));
  const auto prior = mdlm::PriorSpec::standard(1, Matrix::Identity(1, 1));
  const auto post = mdlm::filter_run(y, v, {0, 5}, prior, mdlm::DiscountSpec::uniform(1, 0.9));
  for (int t = 0; t < 6; ++t) {
    CHECK(post.filtered_mean[t](0) == 0.0);
    CHECK(post.forecast_err[t](0) == 0.0);
  }
}

TEST_CASE("static scalar model matches the conjugate normal posterior") {
  std::mt19937_64 eng(12);
  std::normal_distribution<double> z;
  const double sigma2 = 0.7, c0 = 2.0, m0 = 0.3, x = 1.5;
  std::vector<Vector> y, v;
  for (int t = 0; t < 20; ++t) {
    y.push_back(Vector::Constant(1, 0.8 * x + std::sqrt(sigma2) * z(eng)));
    v.push_back(Vector::Constant(1, x));
  }
  mdlm::PriorSpec prior;
  prior.m0 = Vector::Constant(1, m0);
  prior.c0 = SymMatrix(Matrix::Constant(1, 1, c0));
  prior.s0 = SymMatrix(Matrix::Constant(1, 1, sigma2));
  mdlm::FilterOptions fo;
  fo.fixed_noise = Matrix::Constant(1, 1, sigma2);
  const auto post = mdlm::smooth_run(
      mdlm::filter_run(y, v, {0, 19}, prior, mdlm::DiscountSpec::uniform(1, 1.0), fo),
      mdlm::DiscountSpec::uniform(1, 1.0));
  double prec = 1.0 / c0, num = m0 / c0;
  for (int t = 0; t < 20; ++t) {
    prec += x * x / sigma2;
    num += x * y[t](0) / sigma2;
    CHECK(post.filtered_mean[t](0) == doctest::Approx(num / prec).epsilon(1e-12));
    CHECK(post.filtered_cov[t](0, 0) == doctest::Approx(1.0 / prec).epsilon(1e-12));
  }
  // static state: every smoothed mean is the final posterior mean
  for (int t = 0; t < 20; ++t) CHECK(post.smoothed_mean[t](0) == doctest::Approx(num / prec).epsilon(1e-12));
}

TEST_CASE("smoothing boundary cases") {
  std::mt19937_64 eng(13);
  for (int rep = 0; rep < 5; ++rep) {
    Instance inst = random_instance(eng, true);
    const IndexRange range{0, static_cast<int>(inst.y.size()) - 1};
    const auto post = mdlm::smooth_run(mdlm::filter_run(inst.y, inst.v, range, inst.prior, inst.disc), inst.disc);
    CHECK(post.smoothed_mean.back() == post.filtered_mean.back());
    CHECK(post.smoothed_cov.back() == post.filtered_cov.back());

    inst.y.resize(1);
    inst.v.resize(1);
    const auto one = mdlm::smooth_run(mdlm::filter_run(inst.y, inst.v, {0, 0}, inst.prior, inst.disc), inst.disc);
    CHECK(one.smoothed_mean[0] == one.filtered_mean[0]);
  }
}

TEST_CASE("sampling edge cases") {
  mdlm::DlmPosterior post;
  post.range = {0, 1};
  post.k = 1;
  post.state_dim = 2;
  post.filtered_mean = {Vector::Constant(2, 1.5), Vector::Constant(2, -2.0)};
  post.filtered_cov = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  const auto draws = mdlm::sample_states(post, mdlm::Moments::Filtered, 5, 1);
  for (int t = 0; t < 2; ++t)
    for (const auto& d : draws[t]) CHECK(d == post.filtered_mean[t]);

  post.filtered_cov = {Matrix::Identity(2, 2) * 4.0, Matrix::Identity(2, 2)};
  const auto many = mdlm::sample_states(post, mdlm::Moments::Filtered, 10000, 2);
  for (int t = 0; t < 2; ++t) {
    Vector mean = Vector::Zero(2);
    for (const auto& d : many[t]) mean += d;
    mean /= 10000.0;
    const double sd = std::sqrt(post.filtered_cov[t](0, 0));
    CHECK((mean - post.filtered_mean[t]).cwiseAbs().maxCoeff() < 4.0 * sd / 100.0);
  }
}

}
