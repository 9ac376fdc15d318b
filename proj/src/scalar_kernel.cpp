#include "cabm/scalar_kernel.hpp"

#include "cabm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cabm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// 1D heat-flow density with generator dxx: N(0, 2t).
double heat1d(double t, double u) {
  if (std::isinf(u)) return 0.0;
  return std::exp(-u * u / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

/// Mass of N(z, 2t) on (p, q); p = -inf / q = +inf allowed.
double cellMass(double t, double z, double p, double q) {
  const double s = std::sqrt(4.0 * t);  // erf scale: 2t variance => sqrt(4t)
  const double hi = std::isinf(q) ? 1.0 : 0.5 * std::erfc(-(q - z) / s);
  const double lo = std::isinf(p) ? 0.0 : 0.5 * std::erfc(-(p - z) / s);
  return hi - lo;
}

/// d/dz of cellMass.
double cellMassD(double t, double z, double p, double q) {
  return heat1d(t, z - p) - heat1d(t, z - q);
}

struct Cells {
  std::vector<double> cuts;
  std::size_t count() const { return cuts.size() + 1; }
  double lo(std::size_t a) const { return a == 0 ? -kInf : cuts[a - 1]; }
  double hi(std::size_t a) const { return a == cuts.size() ? kInf : cuts[a]; }
  /// A representative interior point of cell a.
  double rep(std::size_t a) const {
    if (cuts.empty()) return 0.0;
    const double l = lo(a), h = hi(a);
    if (std::isinf(l)) return h - 1.0;
    if (std::isinf(h)) return l + 1.0;
    return 0.5 * (l + h);
  }
  /// Two ordered interior points of cell a.
  std::pair<double, double> rep2(std::size_t a) const {
    if (cuts.empty()) return {0.0, 1.0};
    const double l = lo(a), h = hi(a);
    if (std::isinf(l)) return {h - 2.0, h - 1.0};
    if (std::isinf(h)) return {l + 1.0, l + 2.0};
    return {l + (h - l) / 3.0, l + 2.0 * (h - l) / 3.0};
  }
};

/// Same-cell ("triangle") contribution of one cell (p,q) to K and its
/// partials, for the region {p < x' < y' < q}. Reduced exactly to a 1D
/// integral in the difference coordinate w' = y' - x': the independent
/// sum/difference coordinates give
///   T = int_0^{q-p} [phi(w'-w0) - phi(w'+w0)] *
///       [Phi(2q - w' - s0) - Phi(2p + w' - s0)] dw'
/// with w0 = y - x, s0 = x + y and phi/Phi of variance 4t.
struct TriangleTerm {
  double t0 = 0.0, ts = 0.0, tw = 0.0, tss = 0.0, tww = 0.0;
};

TriangleTerm triangleTerm(double t, double x, double y, double p, double q,
                          double radius) {
  const double w0 = y - x;
  const double s0 = x + y;
  const double sig = std::sqrt(4.0 * t);
  const double span = std::isinf(q) || std::isinf(p) ? kInf : q - p;

  double lo = std::max(0.0, w0 - radius * sig);
  double hi = std::min(span, w0 + radius * sig);
  if (!(lo < hi)) return {};

  const double inv4t = 1.0 / (4.0 * t);
  auto phi = [&](double u) {
    return std::exp(-u * u * 0.5 * inv4t) / (sig * std::sqrt(2.0 * std::numbers::pi));
  };
  auto phiD = [&](double u) { return -u * inv4t * phi(u); };
  auto phiDD = [&](double u) { return (u * u * inv4t * inv4t - inv4t) * phi(u); };
  auto cdf = [&](double u) { return 0.5 * std::erfc(-u / (sig * std::numbers::sqrt2)); };

  TriangleTerm acc;
  // Segments no longer than one sigma keep the fixed 16-node rule spectral.
  const int segments =
      std::min(64, std::max(1, static_cast<int>(std::ceil((hi - lo) / sig))));
  static const GaussLegendre rule(16);
  const double step = (hi - lo) / segments;
  for (int s = 0; s < segments; ++s) {
    const double a = lo + s * step;
    const double mid = a + 0.5 * step;
    const double hw = 0.5 * step;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double w = rule.weights[i] * hw;
      const double wp = mid + hw * rule.nodes[i];
      const double u1 = wp - w0, u2 = wp + w0;
      const double k = phi(u1) - phi(u2);
      const double kw = -phiD(u1) - phiD(u2);
      const double kww = phiDD(u1) - phiDD(u2);
      const double A = 2.0 * q - wp - s0;  // unused if q infinite
      const double B = 2.0 * p + wp - s0;  // unused if p infinite
      const double psi = (std::isinf(q) ? 1.0 : cdf(A)) - (std::isinf(p) ? 0.0 : cdf(B));
      const double psiS = (std::isinf(q) ? 0.0 : -phi(A)) + (std::isinf(p) ? 0.0 : phi(B));
      const double psiSS = (std::isinf(q) ? 0.0 : phiD(A)) - (std::isinf(p) ? 0.0 : phiD(B));
      acc.t0 += w * k * psi;
      acc.ts += w * k * psiS;
      acc.tw += w * kw * psi;
      acc.tss += w * k * psiSS;
      acc.tww += w * kww * psi;
    }
  }
  return acc;
}

KernelEval maximalClosedForm(double t, double x, double y) {
  const double s = std::sqrt(8.0 * t);
  const double w = y - x;
  const double z = w / s;
  KernelEval e;
  e.k = std::erfc(z);
  const double gauss = 2.0 / (s * std::sqrt(std::numbers::pi)) * std::exp(-z * z);
  e.dx = gauss;
  e.dy = -gauss;
  e.dxy = -(w / (4.0 * t)) * gauss;
  return e;
}

KernelEval closedPath(const InitialData& f, double theta, double t, double x,
                      double y, const QuadratureSpec& q) {
  if (std::holds_alternative<MaximalData>(f)) return maximalClosedForm(t, x, y);

  Cells cells{breakpointsOf(f)};
  KernelEval e;
  for (std::size_t a = 0; a < cells.count(); ++a) {
    for (std::size_t b = a; b < cells.count(); ++b) {
      double value;
      if (a < b) {
        value = spinEval(f, theta, cells.rep(a), cells.rep(b));
      } else {
        const auto [r1, r2] = cells.rep2(a);
        value = spinEval(f, theta, r1, r2);
      }
      const double c = value - 1.0;
      if (c == 0.0) continue;

      if (a < b) {
        const double pa = cells.lo(a), qa = cells.hi(a);
        const double pb = cells.lo(b), qb = cells.hi(b);
        const double max_ = cellMass(t, x, pa, qa), may = cellMass(t, y, pa, qa);
        const double mbx = cellMass(t, x, pb, qb), mby = cellMass(t, y, pb, qb);
        const double dax = cellMassD(t, x, pa, qa), day = cellMassD(t, y, pa, qa);
        const double dbx = cellMassD(t, x, pb, qb), dby = cellMassD(t, y, pb, qb);
        e.k += c * (max_ * mby - may * mbx);
        e.dx += c * (dax * mby - may * dbx);
        e.dy += c * (max_ * dby - day * mbx);
        e.dxy += c * (dax * dby - day * dbx);
      } else {
        const TriangleTerm tt =
            triangleTerm(t, x, y, cells.lo(a), cells.hi(a), q.radius);
        e.k += c * tt.t0;
        e.dx += c * (tt.ts - tt.tw);
        e.dy += c * (tt.ts + tt.tw);
        e.dxy += c * (tt.tss - tt.tww);
      }
    }
  }
  return e;
}

/// Splits [a,b] into equal panels no longer than maxLen (at most cap).
int panelCount(double a, double b, double maxLen, int cap = 48) {
  const int p = static_cast<int>(std::ceil((b - a) / maxLen));
  return std::clamp(p, 1, cap);
}

/// Adds the integral of (value-1) * [g_t(x-.,y-.) - g_t(y-.,x-.)] and its
/// (x,y)-partials over the rectangle [ax,bx] x [ay,by], resp. its part above
/// the diagonal when triangle == true (then the rectangle is a square).
/// Composite Gauss-Legendre: panels no longer than 3 sqrt(2t) per axis keep
/// the per-panel rule spectral on the Gaussian integrand.
void addRegionQuadrature(KernelEval& e, double coeff, double t, double x,
                         double y, double ax, double bx, double ay, double by,
                         bool triangle, const GaussLegendre& rule) {
  const double inv2t = 1.0 / (2.0 * t);
  const double norm = 1.0 / (4.0 * std::numbers::pi * t);
  const double maxLen = 3.0 * std::sqrt(2.0 * t);

  const int px = panelCount(ax, bx, maxLen);
  const double stepX = (bx - ax) / px;
  for (int sx = 0; sx < px; ++sx) {
    const double midX = ax + (sx + 0.5) * stepX;
    const double hwX = 0.5 * stepX;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double xp = midX + hwX * rule.nodes[i];
      const double wx = rule.weights[i] * hwX;
      const double yLo = triangle ? xp : ay;
      const double yHi = by;
      if (!(yLo < yHi)) continue;
      const int py = panelCount(yLo, yHi, maxLen);
      const double stepY = (yHi - yLo) / py;
      for (int sy = 0; sy < py; ++sy) {
        const double midY = yLo + (sy + 0.5) * stepY;
        const double hwY = 0.5 * stepY;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
          const double yp = midY + hwY * rule.nodes[j];
          const double w = wx * rule.weights[j] * hwY;
          const double dx1 = x - xp, dy1 = y - yp;
          const double dx2 = y - xp, dy2 = x - yp;
          const double g1 =
              norm * std::exp(-(dx1 * dx1 + dy1 * dy1) * 0.5 * inv2t);
          const double g2 =
              norm * std::exp(-(dx2 * dx2 + dy2 * dy2) * 0.5 * inv2t);
          e.k += w * coeff * (g1 - g2);
          e.dx += w * coeff * (-dx1 * inv2t * g1 + dy2 * inv2t * g2);
          e.dy += w * coeff * (-dy1 * inv2t * g1 + dx2 * inv2t * g2);
          e.dxy += w * coeff * (dx1 * dy1 * g1 - dy2 * dx2 * g2) * inv2t * inv2t;
        }
      }
    }
  }
}

KernelEval quadraturePassAtOrder(const InitialData& f, double theta, double t,
                                 double x, double y, const QuadratureSpec& q,
                                 int nodes) {
  const double margin = q.radius * std::sqrt(t);
  const double boxLo = std::min(x, y) - margin;
  const double boxHi = std::max(x, y) + margin;
  Cells cells{breakpointsOf(f)};
  const GaussLegendre rule(nodes);

  KernelEval e;
  for (std::size_t a = 0; a < cells.count(); ++a) {
    const double ax = std::max(cells.lo(a), boxLo);
    const double bx = std::min(cells.hi(a), boxHi);
    if (!(ax < bx)) continue;
    for (std::size_t b = a; b < cells.count(); ++b) {
      const double ay = std::max(cells.lo(b), boxLo);
      const double by = std::min(cells.hi(b), boxHi);
      if (!(ay < by)) continue;
      double value;
      if (a < b) {
        value = spinEval(f, theta, cells.rep(a), cells.rep(b));
      } else {
        const auto [r1, r2] = cells.rep2(a);
        value = spinEval(f, theta, r1, r2);
      }
      const double c = value - 1.0;
      if (c == 0.0) continue;
      addRegionQuadrature(e, c, t, x, y, ax, bx, ay, by, a == b, rule);
    }
  }
  return e;
}

KernelEval quadraturePath(const InitialData& f, double theta, double t,
                          double x, double y, const QuadratureSpec& q) {
  const KernelEval coarse = quadraturePassAtOrder(f, theta, t, x, y, q, q.nodesPerAxis);
  KernelEval fine = quadraturePassAtOrder(f, theta, t, x, y, q, 2 * q.nodesPerAxis);
  fine.converged = std::abs(fine.k - coarse.k) <= 1e-6;
  return fine;
}

}  // namespace

double planarHeatKernel(double t, double x, double y) {
  if (!(t > 0.0)) throw std::invalid_argument("planarHeatKernel: t must be > 0");
  return std::exp(-(x * x + y * y) / (4.0 * t)) / (4.0 * std::numbers::pi * t);
}

KernelEval evaluateKernel(const InitialData& f, double theta, double t,
                          double x, double y, const QuadratureSpec& q,
                          KernelPath path) {
  if (!(t > 0.0)) throw std::invalid_argument("evaluateKernel: t must be > 0");
  if (!(x <= y)) throw std::invalid_argument("evaluateKernel: need x <= y");
  if (!(q.radius >= 8.0)) throw std::invalid_argument("QuadratureSpec: radius >= 8");
  if (q.nodesPerAxis < 16) throw std::invalid_argument("QuadratureSpec: nodesPerAxis >= 16");
  validateInitialData(f, theta);
  return path == KernelPath::Closed ? closedPath(f, theta, t, x, y, q)
                                    : quadraturePath(f, theta, t, x, y, q);
}

double heatResidual(const InitialData& f, double theta, double t, double x,
                    double y, double h, const QuadratureSpec& q,
                    KernelPath path) {
  if (!(h > 0.0)) throw std::invalid_argument("heatResidual: h must be > 0");
  if (!(t - h > 0.0)) throw std::invalid_argument("heatResidual: need t - h > 0");
  if (!(y - x >= 3.0 * h))
    throw std::invalid_argument("heatResidual: stencil too close to the diagonal");
  auto K = [&](double tt, double xx, double yy) {
    return evaluateKernel(f, theta, tt, xx, yy, q, path).k;
  };
  const double k0 = K(t, x, y);
  const double dt = (K(t + h, x, y) - K(t - h, x, y)) / (2.0 * h);
  const double lap = (K(t, x + h, y) + K(t, x - h, y) - 2.0 * k0) / (h * h) +
                     (K(t, x, y + h) + K(t, x, y - h) - 2.0 * k0) / (h * h);
  return std::abs(dt - lap);
}

}  // namespace cabm
