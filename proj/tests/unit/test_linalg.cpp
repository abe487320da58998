#include "doctest.h"

#include "tvparcor/errors.hpp"
#include "tvparcor/linalg.hpp"

#include <limits>
#include <random>

using namespace tvparcor;

TEST_SUITE("linalg") {

TEST_CASE("vec stacks columns") {
  Matrix m(2, 2);
  m << 1, 3, 2, 4;
  const Vector v = linalg::vec(m);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(2) == 3);
  CHECK(v(3) == 4);
  CHECK(linalg::unvec(v, 2, 2) == m);
}

TEST_CASE("square roots of a diagonal matrix") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 4.0;
  a(1, 1) = 9.0;
  const Matrix r = linalg::sym_sqrt(a);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-14);
  const Matrix ri = linalg::sym_inv_sqrt(a);
  CHECK(ri(0, 0) == doctest::Approx(0.5));
  CHECK(ri(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("square root squares back on random SPD input") {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix l(4, 4);
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = z(eng);
    const Matrix a = l * l.transpose() + 0.1 * Matrix::Identity(4, 4);
    const Matrix r = linalg::sym_sqrt(a);
    CHECK((r * r - a).norm() < 1e-10 * a.norm());
    CHECK((r - r.transpose()).norm() == 0.0);
    const Matrix ri = linalg::sym_inv_sqrt(a);
    CHECK((ri * a * ri - Matrix::Identity(4, 4)).norm() < 1e-9);
    CHECK((linalg::spd_inverse(a) * a - Matrix::Identity(4, 4)).norm() < 1e-9);
    CHECK(linalg::spd_logdet(a) == doctest::Approx(std::log(a.determinant())).epsilon(1e-10));
  }
}

TEST_CASE("kron design against the explicit Kronecker product") {
  std::mt19937_64 eng(3);
  std::normal_distribution<double> z;
  const int k = 3;
  Vector v(2);
  v << z(eng), z(eng);
  const Matrix b = linalg::kron_design(v, k);
  REQUIRE(b.rows() == k);
  REQUIRE(b.cols() == k * 2);
  Matrix m(k, 2);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(eng);
  CHECK((b * linalg::vec(m) - m * v).norm() < 1e-14);
  for (int j = 0; j < 2; ++j)
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) CHECK(b(r, j * k + c) == (r == c ? v(j) : 0.0));

  Matrix r(6, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = z(eng);
  const Vector x = linalg::vec(m);
  CHECK((linalg::kron_apply(v, k, x) - b * x).norm() < 1e-13);
  CHECK((linalg::kron_right_transpose(v, k, r) - r * b.transpose()).norm() < 1e-12);
  CHECK((linalg::kron_left(v, k, r) - b * r).norm() < 1e-12);
}

TEST_CASE("symmetrized rejects asymmetric and non-finite input") {
  Matrix a(2, 2);
  a << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(linalg::symmetrized(a), Error);
  try {
    linalg::symmetrized(a);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSymmetric);
  }
  a(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    linalg::symmetrized(a);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteInput);
  }
}

TEST_CASE("condition number") {
  Matrix a = Matrix::Identity(3, 3);
  a(2, 2) = 1e-3;
  CHECK(linalg::condition_number(a) == doctest::Approx(1e3));
  a(2, 2) = 0.0;
  CHECK(std::isinf(linalg::condition_number(a)));
}


TEST_CASE("small closed-form cases") {
  CHECK(linalg::sym_sqrt(Matrix::Identity(3, 3)) == Matrix::Identity(3, 3));
  CHECK(linalg::sym_inv_sqrt(Matrix::Identity(2, 2)) == Matrix::Identity(2, 2));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 25.0;
  const Matrix r = linalg::sym_inv_sqrt(d);
  CHECK(r(0, 0) == doctest::Approx(0.5));
  CHECK(r(1, 1) == doctest::Approx(0.2));

  Vector v(1);
  v << 3.0;
  CHECK(linalg::kron_design(v, 1) == Matrix::Constant(1, 1, 3.0));
  Vector e(2);
  e << 1.0, 0.0;
  Matrix expect = Matrix::Zero(2, 4);
  expect(0, 0) = expect(1, 1) = 1.0;
  CHECK(linalg::kron_design(e, 2) == expect);
}

TEST_CASE("SymMatrix is exactly symmetric") {
  Matrix a(2, 2);
  a << 2.0, 0.5, 0.5 + 1e-12, 3.0;
  const SymMatrix s(a);
  CHECK(s(0, 1) == s(1, 0));
}

}
