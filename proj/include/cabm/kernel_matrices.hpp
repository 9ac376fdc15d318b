#pragma once

#include "cabm/pfaffian.hpp"
#include "cabm/scalar_kernel.hpp"

#include <span>

namespace cabm {

/// Skew matrix with upper entries K_t(x_i, x_j) for non-decreasing points
/// x_1 <= ... <= x_m (m even). Its Pfaffian is the expected spin statistic
/// E[ prod_i (-theta)^{N_t(x_{2i-1}, x_{2i})} ] of the reacting system, where
/// N_t(a,b) counts particles in (a,b) at time t. Coincident points are
/// allowed: the Pfaffian then drops to the one of the reduced point set.
SkewMatrix dualityMatrix(std::span<const double> points,
                         const ScalarKernel& kernel, double t);

/// pfaffian(dualityMatrix(...)).
double dualityStatistic(std::span<const double> points,
                        const ScalarKernel& kernel, double t);

/// 2n x 2n skew matrix whose Pfaffian is the n-point intensity (correlation
/// function) of the particle system at time t. Points must be sorted
/// ascending and, unless allowCoincident, strictly increasing; at coincident
/// points the Pfaffian vanishes. Blocks for i < j:
///
///   B(i,j) = 1/(1+theta) * [  K(x_i,x_j)      -d2 K(x_i,x_j) ]
///                          [ -d1 K(x_i,x_j)  d1 d2 K(x_i,x_j) ]
///
/// with B(j,i) = -B(i,j)^T, and the diagonal block carries the one-point
/// density rho(x_i) = -d2 K(x_i,x_i) / (1+theta) in its upper corner.
SkewMatrix intensityMatrix(std::span<const double> points,
                           const ScalarKernel& kernel, double t,
                           bool allowCoincident = false);

/// pfaffian(intensityMatrix(...)): the n-point correlation function.
double intensity(std::span<const double> points, const ScalarKernel& kernel,
                 double t, bool allowCoincident = false);

/// One-point density rho(x) at time t.
double particleDensity(double x, const ScalarKernel& kernel, double t);

}  // namespace cabm
