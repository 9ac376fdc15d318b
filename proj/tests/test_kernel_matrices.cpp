#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cabm/kernel_matrices.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace cabm;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("one-point density of the fully occupied start") {
  const ScalarKernel k(MaximalData{}, 0.0);
  for (double x : {-2.0, 0.0, 1.3}) {
    CHECK(near(particleDensity(x, k, 1.0), 0.3989422804014327, 1e-12));
    CHECK(near(particleDensity(x, k, 0.5), 0.5641895835477563, 1e-12));
  }
}

TEST_CASE("a single particle has the heat-kernel density for every theta") {
  // One never-reacting particle: rho(x) = exp(-x^2/(4t)) / sqrt(4 pi t).
  const InitialData one = FiniteSpinData{PointMeasure{{{0.0, 1}}}};
  for (double theta : {0.0, 0.5, 1.0}) {
    const ScalarKernel k(one, theta);
    for (double x : {0.0, 0.7, -1.2}) {
      const double expected =
          std::exp(-x * x / 4.0) / std::sqrt(4.0 * std::numbers::pi);
      CHECK(near(particleDensity(x, k, 1.0), expected, 1e-12));
    }
  }
}

TEST_CASE("two-point intensity: frozen value, repulsion, factorization") {
  const ScalarKernel k(MaximalData{}, 0.0);

  const std::vector<double> close{-0.5, 0.5};
  const double pair = intensity(close, k, 1.0);
  CHECK(near(pair, 0.08951763347755103, 1e-12));
  CHECK(pair > 0.0);
  CHECK(pair < 0.15915494309189535);  // below rho^2: neighbours repel

  const std::vector<double> far{-10.0, 10.0};
  const double prod = particleDensity(-10.0, k, 1.0) * particleDensity(10.0, k, 1.0);
  CHECK(near(intensity(far, k, 1.0) / prod, 1.0, 1e-9));
}

TEST_CASE("intensities vanish at coincident points") {
  const ScalarKernel k(MaximalData{}, 0.0);
  const std::vector<double> tie{0.3, 0.3};
  CHECK(near(intensity(tie, k, 1.0, /*allowCoincident=*/true), 0.0, 1e-12));
  CHECK_THROWS_AS(intensity(tie, k, 1.0), std::invalid_argument);

  const std::vector<double> tie3{-0.4, 0.1, 0.1};
  CHECK(near(intensity(tie3, k, 1.0, true), 0.0, 1e-12));
}

TEST_CASE("intensities stay nonnegative on a grid") {
  const ScalarKernel kMax(MaximalData{}, 0.0);
  const ScalarKernel kFin(FiniteSpinData{PointMeasure{{{-1.0, 1}, {0.0, 1}, {2.0, 1}}}}, 0.0);
  for (const auto* k : {&kMax, &kFin}) {
    for (double x = -1.5; x <= 1.5; x += 0.75)
      for (double y = x + 0.25; y <= 2.0; y += 0.75) {
        const std::vector<double> pts{x, y};
        CHECK(intensity(pts, *k, 0.8) >= -1e-12);
      }
    const std::vector<double> triple{-1.0, 0.2, 1.1};
    CHECK(intensity(triple, *k, 0.8) >= -1e-12);
  }
}

TEST_CASE("intensity matrix wiring") {
  const ScalarKernel k(MaximalData{}, 0.5);
  const std::vector<double> pts{-0.3, 0.6};
  const SkewMatrix m = intensityMatrix(pts, k, 0.7);
  REQUIRE(m.order() == 4);
  const KernelEval d0 = k(0.7, -0.3, -0.3);
  const KernelEval e = k(0.7, -0.3, 0.6);
  const double norm = 1.0 / 1.5;
  CHECK(near(m(0, 1), -d0.dy * norm, 1e-15));
  CHECK(near(m(0, 2), e.k * norm, 1e-15));
  CHECK(near(m(0, 3), -e.dy * norm, 1e-15));
  CHECK(near(m(1, 2), -e.dx * norm, 1e-15));
  CHECK(near(m(1, 3), e.dxy * norm, 1e-15));
  CHECK(m(2, 0) == -m(0, 2));  // skew closure
}

TEST_CASE("duality pfaffians") {
  const ScalarKernel k(MaximalData{}, 0.0);
  const std::vector<double> one{-1.0, 1.0};
  CHECK(near(dualityStatistic(one, k, 1.0), 0.31731050786291415, 1e-12));

  // A degenerate interval contributes a factor 1.
  const std::vector<double> degenerate{-1.0, -1.0, 0.0, 1.0};
  const std::vector<double> plain{0.0, 1.0};
  CHECK(near(dualityStatistic(degenerate, k, 1.0),
             dualityStatistic(plain, k, 1.0), 1e-10));

  const std::vector<double> two{-1.0, 0.0, 0.5, 1.5};
  const double pf2 = dualityStatistic(two, k, 0.7);
  CHECK(pf2 >= 0.0);  // theta = 0: it is a probability of emptiness
  CHECK(pf2 <= 1.0);

  const std::vector<double> unsorted{1.0, -1.0};
  CHECK_THROWS_AS(dualityStatistic(unsorted, k, 1.0), std::invalid_argument);
  const std::vector<double> odd{-1.0, 0.0, 1.0};
  CHECK_THROWS_AS(dualityStatistic(odd, k, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dualityStatistic({}, k, 1.0), std::invalid_argument);
}
