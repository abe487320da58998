#include "doctest.h"

#include "../oracles.hpp"
#include "tvparcor/errors.hpp"
#include "tvparcor/whittle.hpp"

#include <random>

using namespace tvparcor;

namespace {

double max_diff(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).lpNorm<Eigen::Infinity>());
  return d;
}

std::vector<Matrix> scalars(const std::vector<double>& xs) {
  std::vector<Matrix> out;
  for (double x : xs) out.push_back(Matrix::Constant(1, 1, x));
  return out;
}

}  // namespace

TEST_SUITE("whittle") {

TEST_CASE("AR(2) with coefficients (0.9, -0.5) has PARCOR (0.6, -0.5)") {
  const auto pair = whittle::var_to_parcor(scalars({0.9, -0.5}), scalars({0.9, -0.5}));
  CHECK(pair.lambda[0](0, 0) == doctest::Approx(0.6));
  CHECK(pair.lambda[1](0, 0) == doctest::Approx(-0.5));
  const auto back = whittle::parcor_to_var(scalars({0.6, -0.5}), scalars({0.6, -0.5}));
  CHECK(back.forward[0](0, 0) == doctest::Approx(0.9));
  CHECK(back.forward[1](0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("PARCOR from Yule-Walker solutions maps to the VAR") {
  std::mt19937_64 eng(21);
  std::uniform_int_distribution<int> kd(1, 3), pd(1, 4);
  for (int rep = 0; rep < 30; ++rep) {
    const int k = kd(eng), p = pd(eng);
    const auto a = oracle::random_stable_var(eng, k, p, 0.9);
    const Matrix sigma = oracle::random_spd(eng, k);
    const auto g = oracle::var_autocov(a, sigma, p + 1);
    std::vector<Matrix> lambda, theta;
    oracle::YuleWalker full;
    for (int m = 1; m <= p; ++m) {
      const auto yw = oracle::yule_walker(g, m);
      lambda.push_back(yw.forward.back());
      theta.push_back(yw.backward.back());
      if (m == p) full = yw;
    }
    CHECK(max_diff(full.forward, a) < 1e-8);
    const auto var = whittle::parcor_to_var(lambda, theta);
    CHECK(max_diff(var.forward, full.forward) < 1e-8);
    CHECK(max_diff(var.backward, full.backward) < 1e-8);
    const auto pc = whittle::var_to_parcor(full.forward, full.backward);
    CHECK(max_diff(pc.lambda, lambda) < 1e-8);
    CHECK(max_diff(pc.theta, theta) < 1e-8);
  }
}

TEST_CASE("round trip through VAR coefficients") {
  std::mt19937_64 eng(22);
  std::uniform_int_distribution<int> kd(1, 3), pd(1, 4);
  for (int rep = 0; rep < 50; ++rep) {
    const int k = kd(eng), p = pd(eng);
    const auto a = oracle::random_stable_var(eng, k, p, 0.95);
    const auto g = oracle::var_autocov(a, oracle::random_spd(eng, k), p);
    const auto yw = oracle::yule_walker(g, p);
    const auto pc = whittle::var_to_parcor(yw.forward, yw.backward);
    const auto var = whittle::parcor_to_var(pc.lambda, pc.theta);
    CHECK(max_diff(var.forward, yw.forward) < 1e-10);
    CHECK(max_diff(var.backward, yw.backward) < 1e-10);
  }
}

TEST_CASE("scalar case agrees with Durbin-Levinson") {
  std::mt19937_64 eng(23);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  std::uniform_int_distribution<int> pd(1, 6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> pacf(static_cast<std::size_t>(pd(eng)));
    for (double& v : pacf) v = u(eng);
    const auto phi = oracle::pacf_to_ar(pacf);
    const auto var = whittle::parcor_to_var(scalars(pacf), scalars(pacf));
    for (std::size_t j = 0; j < phi.size(); ++j) {
      CHECK(var.forward[j](0, 0) == doctest::Approx(phi[j]).epsilon(1e-12));
      CHECK(var.backward[j](0, 0) == doctest::Approx(phi[j]).epsilon(1e-12));
    }
    const auto back = oracle::ar_to_pacf(phi);
    const auto pc = whittle::var_to_parcor(scalars(phi), scalars(phi));
    for (std::size_t j = 0; j < phi.size(); ++j) {
      CHECK(back[j] == doctest::Approx(pacf[j]).epsilon(1e-10));
      CHECK(pc.lambda[j](0, 0) == doctest::Approx(pacf[j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("unit PARCOR makes the down-step singular") {
  try {
    whittle::var_to_parcor(scalars({0.0, 1.0}), scalars({0.0, 1.0}));
    FAIL("expected SingularStage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularStage);
  }
}

TEST_CASE("mismatched lags are rejected") {
  CHECK_THROWS_AS(whittle::parcor_to_var(scalars({0.1, 0.2}), scalars({0.1})), Error);
}


TEST_CASE("order one passes the PARCOR through") {
  Matrix lam(2, 2), theta(2, 2);
  lam << 0.3, -0.2, 0.1, 0.5;
  theta << 0.2, 0.0, -0.4, 0.1;
  const auto var = whittle::parcor_to_var({lam}, {theta});
  CHECK(var.forward[0] == lam);
  CHECK(var.backward[0] == theta);
  const auto pc = whittle::var_to_parcor({lam}, {theta});
  CHECK(pc.lambda[0] == lam);
}

TEST_CASE("bivariate VAR(3) round trip") {
  std::mt19937_64 eng(24);
  const auto a = oracle::random_stable_var(eng, 2, 3, 0.9);
  const auto g = oracle::var_autocov(a, oracle::random_spd(eng, 2), 3);
  const auto yw = oracle::yule_walker(g, 3);
  const auto pc = whittle::var_to_parcor(yw.forward, yw.backward);
  const auto var = whittle::parcor_to_var(pc.lambda, pc.theta);
  CHECK(max_diff(var.forward, a) < 1e-10);
}

}
