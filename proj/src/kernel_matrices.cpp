#include "cabm/kernel_matrices.hpp"

#include <cmath>
#include <stdexcept>

namespace cabm {

namespace {

void requireSorted(std::span<const double> points, bool strict) {
  if (points.empty()) throw std::invalid_argument("points must be non-empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]))
      throw std::invalid_argument("points must be finite");
    if (i > 0) {
      if (strict ? !(points[i - 1] < points[i]) : !(points[i - 1] <= points[i]))
        throw std::invalid_argument(strict ? "points must be strictly increasing"
                                           : "points must be non-decreasing");
    }
  }
}

}  // namespace

SkewMatrix dualityMatrix(std::span<const double> points,
                         const ScalarKernel& kernel, double t) {
  requireSorted(points, /*strict=*/false);
  const auto m = static_cast<Eigen::Index>(points.size());
  if (m % 2 != 0) throw std::invalid_argument("dualityMatrix: even point count required");
  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      upper(i, j) = kernel(t, points[i], points[j]).k;
  return SkewMatrix::fromUpper(upper);
}

double dualityStatistic(std::span<const double> points,
                        const ScalarKernel& kernel, double t) {
  return pfaffian(dualityMatrix(points, kernel, t));
}

SkewMatrix intensityMatrix(std::span<const double> points,
                           const ScalarKernel& kernel, double t,
                           bool allowCoincident) {
  requireSorted(points, /*strict=*/!allowCoincident);
  const auto n = static_cast<Eigen::Index>(points.size());
  const double norm = 1.0 / (1.0 + kernel.theta());
  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const KernelEval d = kernel(t, points[i], points[i]);
    upper(2 * i, 2 * i + 1) = -d.dy * norm;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const KernelEval e = kernel(t, points[i], points[j]);
      upper(2 * i, 2 * j) = e.k * norm;
      upper(2 * i, 2 * j + 1) = -e.dy * norm;
      upper(2 * i + 1, 2 * j) = -e.dx * norm;
      upper(2 * i + 1, 2 * j + 1) = e.dxy * norm;
    }
  }
  return SkewMatrix::fromUpper(upper);
}

double intensity(std::span<const double> points, const ScalarKernel& kernel,
                 double t, bool allowCoincident) {
  return pfaffian(intensityMatrix(points, kernel, t, allowCoincident));
}

double particleDensity(double x, const ScalarKernel& kernel, double t) {
  const double v = x;
  return intensity(std::span<const double>(&v, 1), kernel, t);
}

}  // namespace cabm
