#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cabm/pfaffian.hpp"
#include "cabm/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

using cabm::Rng;
using cabm::SkewMatrix;

namespace {

SkewMatrix randomSkew(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd u(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) u(i, j) = 2.0 * rng.uniform() - 1.0;
  return SkewMatrix::fromUpper(u);
}

}  // namespace

TEST_CASE("order 2 is the upper entry") {
  Eigen::MatrixXd u(2, 2);
  u.setZero();
  u(0, 1) = 3.5;
  CHECK(cabm::pfaffian(SkewMatrix::fromUpper(u)) == doctest::Approx(3.5).epsilon(1e-14));
  u(0, 1) = -2.0;
  CHECK(cabm::pfaffian(SkewMatrix::fromUpper(u)) == doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("order 4 closed form") {
  // pf = a01*a23 - a02*a13 + a03*a12 = 6 - 10 + 12 = 8.
  Eigen::MatrixXd u(4, 4);
  u.setZero();
  u(0, 1) = 1;
  u(0, 2) = 2;
  u(0, 3) = 3;
  u(1, 2) = 4;
  u(1, 3) = 5;
  u(2, 3) = 6;
  const SkewMatrix a = SkewMatrix::fromUpper(u);
  CHECK(cabm::pfaffian(a) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(cabm::pfaffianBruteforce(a) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("pivoting handles a zero leading entry") {
  // a01 = 0 forces a row/col swap; pf = 0*5 - 1*4 + 2*3 = 2.
  Eigen::MatrixXd u(4, 4);
  u.setZero();
  u(0, 2) = 1;
  u(0, 3) = 2;
  u(1, 2) = 3;
  u(1, 3) = 4;
  u(2, 3) = 5;
  CHECK(cabm::pfaffian(SkewMatrix::fromUpper(u)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pfaffian squared equals the determinant") {
  Rng rng(20240817);
  for (Eigen::Index n = 2; n <= 20; n += 2) {
    for (int rep = 0; rep < 25; ++rep) {
      const SkewMatrix a = randomSkew(n, rng);
      const double pf = cabm::pfaffian(a);
      const double det = a.matrix().determinant();
      CHECK(std::abs(pf * pf - det) <= 1e-9 * std::max(1.0, std::abs(det)));
    }
  }
}

TEST_CASE("elimination agrees with recursive expansion") {
  Rng rng(7);
  for (Eigen::Index n = 2; n <= 12; n += 2) {
    for (int rep = 0; rep < 10; ++rep) {
      const SkewMatrix a = randomSkew(n, rng);
      const double fast = cabm::pfaffian(a);
      const double slow = cabm::pfaffianBruteforce(a);
      CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow)));
    }
  }
}

TEST_CASE("scaling: pf(cA) = c^(n/2) pf(A)") {
  Rng rng(99);
  const SkewMatrix a = randomSkew(8, rng);
  const double c = 1.7;
  const Eigen::MatrixXd scaled = c * a.matrix();
  Eigen::MatrixXd work = scaled;
  const double lhs = cabm::pfaffianInPlace(work);
  CHECK(lhs == doctest::Approx(std::pow(c, 4) * cabm::pfaffian(a)).epsilon(1e-11));
}

TEST_CASE("congruence: pf(B A B^T) = det(B) pf(A)") {
  Rng rng(123);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::Index n = 6;
    const SkewMatrix a = randomSkew(n, rng);
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) b(i, j) = 2.0 * rng.uniform() - 1.0;
    Eigen::MatrixXd m = b * a.matrix() * b.transpose();
    // Re-symmetrize the upper triangle against rounding before wrapping.
    const double pf = cabm::pfaffianInPlace(m);
    const double expected = b.determinant() * cabm::pfaffian(a);
    CHECK(std::abs(pf - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("duplicate adjacent pair reduces to the minor") {
  // If column k+1 duplicates column k away from the pair and A(k,k+1) = alpha,
  // then pf(A) = alpha * pf(A with rows/cols k,k+1 removed).
  Rng rng(31337);
  const Eigen::Index n = 8;
  const Eigen::Index k = 2;
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd u(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) u(i, j) = 2.0 * rng.uniform() - 1.0;
    for (Eigen::Index i = 0; i < k; ++i) u(i, k + 1) = u(i, k);
    for (Eigen::Index j = k + 2; j < n; ++j) u(k + 1, j) = u(k, j);
    const double alpha = u(k, k + 1);

    Eigen::MatrixXd r(n - 2, n - 2);
    for (Eigen::Index i = 0, ri = 0; i < n; ++i) {
      if (i == k || i == k + 1) continue;
      for (Eigen::Index j = 0, rj = 0; j < n; ++j) {
        if (j == k || j == k + 1) continue;
        r(ri, rj) = u(i, j);
        ++rj;
      }
      ++ri;
    }

    const double whole = cabm::pfaffian(SkewMatrix::fromUpper(u));
    const double minor = cabm::pfaffian(SkewMatrix::fromUpper(r));
    CHECK(std::abs(whole - alpha * minor) <=
          1e-10 * std::max(1.0, std::abs(alpha * minor)));
  }
}

TEST_CASE("singular matrices give zero") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
  CHECK(cabm::pfaffian(SkewMatrix::fromUpper(z)) == 0.0);

  // Rank-2 skew of order 4: pf must vanish (det = 0).
  Eigen::MatrixXd u(4, 4);
  u.setZero();
  u(0, 1) = 1.0;  // second block zero
  CHECK(cabm::pfaffian(SkewMatrix::fromUpper(u)) == 0.0);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(SkewMatrix::fromUpper(Eigen::MatrixXd::Zero(3, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SkewMatrix::fromUpper(Eigen::MatrixXd::Zero(2, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SkewMatrix::fromUpper(Eigen::MatrixXd::Zero(0, 0)),
                  std::invalid_argument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SkewMatrix::fromUpper(bad), std::invalid_argument);

  Rng rng(5);
  CHECK_THROWS_AS(cabm::pfaffianBruteforce(randomSkew(14, rng)),
                  std::invalid_argument);
}
