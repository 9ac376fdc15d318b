#pragma once

#include "cabm/initial_data.hpp"

namespace cabm {

/// Scalar kernel value and the analytic partial derivatives the matrix
/// kernels need. `converged` is only meaningful on the quadrature path: it
/// records whether doubling the node count moved K by less than 1e-6.
struct KernelEval {
  double k = 1.0;    // K_t(x,y)
  double dx = 0.0;   // dK/dx
  double dy = 0.0;   // dK/dy
  double dxy = 0.0;  // d2K/dxdy
  bool converged = true;
};

/// Controls the generic quadrature path and the truncation of unbounded
/// integrals on the fast path. The integration box is
/// [min(x,y) - radius*sqrt(t), max(x,y) + radius*sqrt(t)]^2; each region is
/// covered by composite Gauss-Legendre panels no longer than 3*sqrt(2t).
struct QuadratureSpec {
  double radius = 10.0;   // in units of sqrt(t); keep >= 8
  int nodesPerAxis = 24;  // Gauss-Legendre nodes per panel per axis
};

enum class KernelPath {
  Closed,      // per-variant analytic evaluation (error functions + an exact
               // 1D reduction for same-cell terms)
  Quadrature,  // generic 2D tensor quadrature of the defining integral
};

/// Transition density of the planar heat flow dK/dt = (dxx+dyy)K:
/// exp(-(x^2+y^2)/(4t)) / (4 pi t). Throws for t <= 0.
double planarHeatKernel(double t, double x, double y);

/// Evaluates the scalar kernel
///   K_t(x,y) = 1 + int_{x'<y'} [g_t(x-x',y-y') - g_t(y-x',x-y')]
///                              (f(x',y') - 1) dx' dy'
/// for x <= y, t > 0, together with its first partials and the mixed second
/// partial (all computed analytically, never by finite differences).
KernelEval evaluateKernel(const InitialData& f, double theta, double t,
                          double x, double y, const QuadratureSpec& q = {},
                          KernelPath path = KernelPath::Closed);

/// Initial data bound together with theta and an evaluation policy; callable
/// as kernel(t, x, y) so it can be handed to the matrix assemblers.
class ScalarKernel {
 public:
  ScalarKernel(InitialData f, double theta, QuadratureSpec q = {},
               KernelPath path = KernelPath::Closed)
      : f_(std::move(f)), theta_(theta), quad_(q), path_(path) {
    validateInitialData(f_, theta_);
  }

  KernelEval operator()(double t, double x, double y) const {
    return evaluateKernel(f_, theta_, t, x, y, quad_, path_);
  }

  const InitialData& data() const { return f_; }
  double theta() const { return theta_; }

 private:
  InitialData f_;
  double theta_;
  QuadratureSpec quad_;
  KernelPath path_;
};

/// Central-difference residual |dK/dt - (dxx+dyy)K| at (t,x,y) with step h.
/// Requires t - h > 0 and y - x >= 3h so the stencil stays inside the domain
/// (off the diagonal). Drops as O(h^2) for smooth data.
double heatResidual(const InitialData& f, double theta, double t, double x,
                    double y, double h, const QuadratureSpec& q = {},
                    KernelPath path = KernelPath::Closed);

}  // namespace cabm
