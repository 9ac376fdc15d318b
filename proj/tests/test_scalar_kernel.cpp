#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cabm/quadrature.hpp"
#include "cabm/scalar_kernel.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

using namespace cabm;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// The nontrivial data/theta combinations exercised throughout.
std::vector<std::pair<InitialData, double>> battery() {
  std::vector<std::pair<InitialData, double>> v;
  v.emplace_back(MaximalData{}, 0.0);
  v.emplace_back(FiniteSpinData{PointMeasure{{{-0.3, 1}, {0.4, 2}}}}, 0.5);
  v.emplace_back(FiniteSpinData{PointMeasure{{{0.0, kInfiniteWeight}}}}, 0.5);
  v.emplace_back(ProductData{StepFunction{{-0.2, 0.5}, {1.0, -1.0, 1.0}}}, 1.0);
  v.emplace_back(ProductData{StepFunction::constant(0.6)}, 1.0);
  v.emplace_back(ClosedSetAvoidData{{{-0.5, 0.2}}, {{1.0, 2}}}, 0.3);
  return v;
}

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials and smooth functions") {
  const GaussLegendre g5(5);
  CHECK(near(integrate([](double x) { return std::pow(x, 9); }, 0.0, 1.0, g5),
             0.1, 1e-15));
  const GaussLegendre g12(12);
  CHECK(near(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, g12),
             std::exp(1.0) - 1.0, 1e-14));
  CHECK_THROWS_AS(GaussLegendre(0), std::invalid_argument);
}

TEST_CASE("planar heat kernel values") {
  CHECK(near(planarHeatKernel(0.25, 0.0, 0.0), 0.3183098861837907, 1e-15));
  CHECK(near(planarHeatKernel(1.0, 1.0, 2.0),
             std::exp(-1.25) / (4.0 * std::numbers::pi), 1e-15));
  CHECK(planarHeatKernel(1.0, 1.0, 2.0) == planarHeatKernel(1.0, 2.0, 1.0));
  CHECK_THROWS_AS(planarHeatKernel(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("fully occupied data has the erfc closed form") {
  const InitialData f = MaximalData{};
  const KernelEval e = evaluateKernel(f, 0.0, 1.0, -1.0, 1.0);
  CHECK(near(e.k, 0.31731050786291415, 1e-13));
  CHECK(near(evaluateKernel(f, 0.0, 1.0, -0.15, 0.15).k, 0.880764615259515, 1e-13));
  CHECK(near(evaluateKernel(f, 0.0, 0.5, -0.5, 0.5).k, 0.4795001221869535, 1e-13));

  // Diagonal: K = 1, dy = -dx = -1/sqrt(2 pi t), mixed partial vanishes.
  const KernelEval d = evaluateKernel(f, 0.0, 1.0, 0.3, 0.3);
  CHECK(near(d.k, 1.0, 1e-14));
  CHECK(near(d.dx, 0.3989422804014327, 1e-14));
  CHECK(near(d.dy, -0.3989422804014327, 1e-14));
  CHECK(near(d.dxy, 0.0, 1e-14));
}

TEST_CASE("closed and quadrature paths agree") {
  for (const auto& [f, theta] : battery()) {
    for (const auto& [t, x, y] :
         std::vector<std::tuple<double, double, double>>{{1.0, -1.0, 1.0},
                                                         {0.7, -0.8, 0.9}}) {
      const KernelEval a = evaluateKernel(f, theta, t, x, y, {}, KernelPath::Closed);
      const KernelEval b =
          evaluateKernel(f, theta, t, x, y, {}, KernelPath::Quadrature);
      CHECK(b.converged);
      CHECK(near(a.k, b.k, 1e-8));
      CHECK(near(a.dx, b.dx, 1e-7));
      CHECK(near(a.dy, b.dy, 1e-7));
      CHECK(near(a.dxy, b.dxy, 1e-7));
    }
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  for (const auto& [f, theta] : battery()) {
    for (const auto& [t, x, y] :
         std::vector<std::tuple<double, double, double>>{{0.9, -0.8, 0.6},
                                                         {0.5, 0.1, 0.35}}) {
      auto K = [&](double xx, double yy) {
        return evaluateKernel(f, theta, t, xx, yy).k;
      };
      const KernelEval e = evaluateKernel(f, theta, t, x, y);
      const double h1 = 1e-5;
      CHECK(near(e.dx, (K(x + h1, y) - K(x - h1, y)) / (2.0 * h1), 1e-6));
      CHECK(near(e.dy, (K(x, y + h1) - K(x, y - h1)) / (2.0 * h1), 1e-6));
      const double h2 = 1e-4;
      const double fd = (K(x + h2, y + h2) - K(x + h2, y - h2) -
                         K(x - h2, y + h2) + K(x - h2, y - h2)) /
                        (4.0 * h2 * h2);
      CHECK(near(e.dxy, fd, 1e-5));
    }
  }
}

TEST_CASE("diagonal structure for every data class") {
  for (const auto& [f, theta] : battery()) {
    for (double x : {-0.7, 0.0, 0.45}) {
      const KernelEval e = evaluateKernel(f, theta, 0.8, x, x);
      CHECK(near(e.k, 1.0, 1e-12));
      CHECK(near(e.dxy, 0.0, 1e-12));
      CHECK(near(e.dy, -e.dx, 1e-12));
    }
  }
}

TEST_CASE("kernel values stay in [-1, 1]") {
  for (const auto& [f, theta] : battery()) {
    for (double t : {0.25, 1.0}) {
      for (double x = -2.0; x <= 2.0; x += 0.5) {
        for (double y = x; y <= 2.0; y += 0.5) {
          const double k = evaluateKernel(f, theta, t, x, y).k;
          CHECK(std::abs(k) <= 1.0 + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("short times recover the initial data") {
  const double t = 1e-3;
  InitialData fin = FiniteSpinData{PointMeasure{{{0.0, 1}}}};
  CHECK(near(evaluateKernel(fin, 0.5, t, -1.0, 1.0).k, -0.5, 1e-9));
  CHECK(near(evaluateKernel(fin, 0.5, t, 0.5, 1.0).k, 1.0, 1e-9));

  InitialData sign = ProductData{StepFunction{{0.0}, {1.0, -1.0}}};
  CHECK(near(evaluateKernel(sign, 1.0, t, -1.0, 1.0).k, -1.0, 1e-9));

  CHECK(near(evaluateKernel(MaximalData{}, 0.0, t, -1.0, 1.0).k, 0.0, 1e-12));

  InitialData avoid = ClosedSetAvoidData{{{0.0, 1.0}}, {}};
  CHECK(near(evaluateKernel(avoid, 0.5, t, -0.5, 0.5).k, 0.0, 1e-9));
  CHECK(near(evaluateKernel(avoid, 0.5, t, -2.0, -1.0).k, 1.0, 1e-9));
}

TEST_CASE("constant product data reduces to the error function") {
  const InitialData f = ProductData{StepFunction::constant(0.6)};
  CHECK(near(evaluateKernel(f, 1.0, 0.5, -0.4, 0.3).k, 0.7571954857201214, 1e-10));
  CHECK(near(evaluateKernel(f, 1.0, 1.0, -1.0, 1.0).k, 0.5630787250322651, 1e-10));
}

TEST_CASE("an infinite-multiplicity atom matches a degenerate blocked interval") {
  const InitialData a = FiniteSpinData{PointMeasure{{{0.3, kInfiniteWeight}}}};
  const InitialData b = ClosedSetAvoidData{{{0.3, 0.3}}, {}};
  for (double y : {0.35, 0.9, 2.0}) {
    const KernelEval ea = evaluateKernel(a, 0.5, 0.6, -0.4, y);
    const KernelEval eb = evaluateKernel(b, 0.5, 0.6, -0.4, y);
    CHECK(near(ea.k, eb.k, 1e-12));
    CHECK(near(ea.dxy, eb.dxy, 1e-12));
  }
}

TEST_CASE("heat-flow residual vanishes at second order") {
  const InitialData max = MaximalData{};
  const double rFine = heatResidual(max, 0.0, 1.0, -0.3, 0.7, 1e-3);
  const double rCoarse = heatResidual(max, 0.0, 1.0, -0.3, 0.7, 2e-3);
  CHECK(rFine <= 1e-4);
  CHECK(rCoarse / rFine > 3.2);
  CHECK(rCoarse / rFine < 4.8);

  const InitialData fin = FiniteSpinData{PointMeasure{{{-0.3, 1}, {0.4, 2}}}};
  CHECK(heatResidual(fin, 0.5, 1.0, -0.4, 0.5, 1e-3) <= 1e-4);

  CHECK_THROWS_AS(heatResidual(max, 0.0, 1.0, -0.3, 0.7, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(heatResidual(max, 0.0, 1e-4, -0.3, 0.7, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(heatResidual(max, 0.0, 1.0, 0.0, 1e-5, 1e-3), std::invalid_argument);
}

TEST_CASE("callable wrapper and argument validation") {
  const ScalarKernel k(FiniteSpinData{PointMeasure{{{0.0, 1}}}}, 0.5);
  const KernelEval a = k(1.0, -1.0, 1.0);
  const KernelEval b =
      evaluateKernel(FiniteSpinData{PointMeasure{{{0.0, 1}}}}, 0.5, 1.0, -1.0, 1.0);
  CHECK(a.k == b.k);
  CHECK(k.theta() == 0.5);

  CHECK_THROWS_AS(ScalarKernel(ProductData{StepFunction::constant(0.5)}, 0.5),
                  std::invalid_argument);

  const InitialData f = MaximalData{};
  CHECK_THROWS_AS(evaluateKernel(f, 0.0, -1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluateKernel(f, 0.0, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluateKernel(f, 0.0, 1.0, 0.0, 1.0, {5.0, 24}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluateKernel(f, 0.0, 1.0, 0.0, 1.0, {10.0, 8}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluateKernel(f, 1.5, 1.0, 0.0, 1.0), std::invalid_argument);
}
