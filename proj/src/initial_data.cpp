#include "cabm/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cabm {

void PointMeasure::validate() const {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i].position))
      throw std::invalid_argument("PointMeasure: non-finite atom position");
    if (atoms[i].multiplicity < 1)
      throw std::invalid_argument("PointMeasure: multiplicity must be >= 1");
    if (i > 0 && !(atoms[i - 1].position < atoms[i].position))
      throw std::invalid_argument("PointMeasure: positions must be strictly increasing");
  }
}

std::uint64_t PointMeasure::countIn(double x, double y) const {
  std::uint64_t total = 0;
  for (const auto& a : atoms)
    if (x < a.position && a.position < y) {
      if (a.multiplicity == kInfiniteWeight) return kInfiniteWeight;
      total += a.multiplicity;
    }
  return total;
}

std::vector<double> PointMeasure::positions() const {
  std::vector<double> p;
  p.reserve(atoms.size());
  for (const auto& a : atoms) p.push_back(a.position);
  return p;
}

PointMeasure PointMeasure::simple(std::span<const double> positions) {
  PointMeasure mu;
  mu.atoms.reserve(positions.size());
  for (double x : positions) mu.atoms.push_back({x, 1});
  mu.validate();
  return mu;
}

void StepFunction::validate(double lo, double hi) const {
  if (values.size() != breakpoints.size() + 1)
    throw std::invalid_argument("StepFunction: need breakpoints.size()+1 values");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!std::isfinite(breakpoints[i]))
      throw std::invalid_argument("StepFunction: non-finite breakpoint");
    if (i > 0 && !(breakpoints[i - 1] < breakpoints[i]))
      throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
  }
  for (double v : values)
    if (!(v >= lo && v <= hi))
      throw std::invalid_argument("StepFunction: value out of range");
}

double StepFunction::operator()(double x) const {
  // First piece whose left edge exceeds x ends the search.
  std::size_t i = std::upper_bound(breakpoints.begin(), breakpoints.end(), x) -
                  breakpoints.begin();
  return values[i];
}

double StepFunction::integrate(double a, double b) const {
  if (!(a <= b)) throw std::invalid_argument("StepFunction::integrate: need a <= b");
  double acc = 0.0;
  double lo = a;
  std::size_t i = std::upper_bound(breakpoints.begin(), breakpoints.end(), a) -
                  breakpoints.begin();
  while (lo < b) {
    const double hi = (i < breakpoints.size()) ? std::min(breakpoints[i], b) : b;
    acc += values[i] * (hi - lo);
    lo = hi;
    ++i;
  }
  return acc;
}

double negThetaPow(double theta, std::uint64_t k) {
  if (k == 0) return 1.0;
  if (k == kInfiniteWeight) return 0.0;
  if (theta == 0.0) return 0.0;
  const double mag = std::pow(theta, static_cast<double>(k));
  return (k % 2 == 0) ? mag : -mag;
}

namespace {

void validateClosedSet(const ClosedSetAvoidData& d) {
  for (std::size_t i = 0; i < d.intervals.size(); ++i) {
    const auto& iv = d.intervals[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo <= iv.hi))
      throw std::invalid_argument("ClosedSetAvoidData: bad interval");
    if (i > 0 && !(d.intervals[i - 1].hi < iv.lo))
      throw std::invalid_argument("ClosedSetAvoidData: intervals must be disjoint and sorted");
  }
  for (std::size_t i = 0; i < d.isolated.size(); ++i) {
    const auto& p = d.isolated[i];
    if (!std::isfinite(p.position))
      throw std::invalid_argument("ClosedSetAvoidData: non-finite isolated point");
    if (p.weight < 1)
      throw std::invalid_argument("ClosedSetAvoidData: weight must be >= 1");
    if (i > 0 && !(d.isolated[i - 1].position < p.position))
      throw std::invalid_argument("ClosedSetAvoidData: isolated points must be strictly increasing");
    for (const auto& iv : d.intervals)
      if (p.position >= iv.lo && p.position <= iv.hi)
        throw std::invalid_argument("ClosedSetAvoidData: isolated point inside an interval");
  }
}

}  // namespace

void validateInitialData(const InitialData& f, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("theta must lie in [0,1]");
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FiniteSpinData>) {
          d.measure.validate();
        } else if constexpr (std::is_same_v<T, ProductData>) {
          if (theta != 1.0)
            throw std::invalid_argument("ProductData requires theta == 1");
          d.factor.validate(-1.0, 1.0);
        } else if constexpr (std::is_same_v<T, ClosedSetAvoidData>) {
          if (theta == 1.0)
            throw std::invalid_argument("ClosedSetAvoidData requires theta < 1");
          validateClosedSet(d);
        }
      },
      f);
}

double spinEval(const InitialData& f, double theta, double x, double y) {
  if (!(x <= y)) throw std::invalid_argument("spinEval: need x <= y");
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FiniteSpinData>) {
          return negThetaPow(theta, d.measure.countIn(x, y));
        } else if constexpr (std::is_same_v<T, ProductData>) {
          return d.factor(x) * d.factor(y);
        } else if constexpr (std::is_same_v<T, ClosedSetAvoidData>) {
          for (const auto& iv : d.intervals)
            if (iv.lo < y && iv.hi > x) return 0.0;
          double prod = 1.0;
          for (const auto& p : d.isolated)
            if (x < p.position && p.position < y)
              prod *= negThetaPow(theta, p.weight);
          return prod;
        } else {
          return 0.0;  // MaximalData
        }
      },
      f);
}

std::vector<double> breakpointsOf(const InitialData& f) {
  std::vector<double> cuts = std::visit(
      [](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FiniteSpinData>) {
          return d.measure.positions();
        } else if constexpr (std::is_same_v<T, ProductData>) {
          return d.factor.breakpoints;
        } else if constexpr (std::is_same_v<T, ClosedSetAvoidData>) {
          std::vector<double> c;
          for (const auto& iv : d.intervals) {
            c.push_back(iv.lo);
            if (iv.hi > iv.lo) c.push_back(iv.hi);
          }
          for (const auto& p : d.isolated) c.push_back(p.position);
          return c;
        } else {
          return {};
        }
      },
      f);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double zeroSurvivorProb(double theta, std::uint64_t k) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("theta must lie in [0,1]");
  return (theta + negThetaPow(theta, k)) / (1.0 + theta);
}

PointMeasure productApproximation(const StepFunction& f, int n) {
  if (n < 1) throw std::invalid_argument("productApproximation: n >= 1");
  f.validate(-1.0, 1.0);

  // Piecewise +/-1 profile over [-n, n), +1 outside; record sign flips.
  PointMeasure mu;
  double current = 1.0;  // value of the profile left of the scan point
  const double snap = 1e-9 / n;
  auto emit = [&](double x, double value) {
    if (value != current) {
      // The spin parity is anchored at 0 from both sides, so a flip sitting
      // exactly on 0 would be invisible to it and negate one half-line only.
      // Nudge it off the anchor; interior flips stay >= snap from cell
      // edges, so this cannot collide with a neighbour.
      if (x == 0.0) x = -0.5 * snap;
      mu.atoms.push_back({x, 1});
      current = value;
    }
  };
  const long nn = static_cast<long>(n) * n;
  for (long k = -nn; k < nn; ++k) {
    const double lo = static_cast<double>(k) / n;
    const double hi = static_cast<double>(k + 1) / n;
    double a = 0.5 * (lo + hi) + 0.5 * f.integrate(lo, hi);
    if (a < lo + snap) a = lo;
    if (a > hi - snap) a = hi;
    if (a > lo) emit(lo, 1.0);
    if (a < hi) emit(a, -1.0);
  }
  emit(static_cast<double>(n), 1.0);
  mu.validate();
  return mu;
}

double spinFactor(const PointMeasure& mu, double x) {
  const std::uint64_t c = (x >= 0.0) ? mu.countIn(0.0, x) : mu.countIn(x, 0.0);
  return (c % 2 == 0) ? 1.0 : -1.0;
}

MixtureIdentityResult mixtureSpinIdentity(double theta, std::uint64_t k,
                                          std::span<const double> points,
                                          double tol) {
  if (points.size() < 2 || points.size() % 2 != 0)
    throw std::invalid_argument("mixtureSpinIdentity: need an even number of points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i - 1] < points[i]))
      throw std::invalid_argument("mixtureSpinIdentity: points must be strictly increasing");

  double lhs = 1.0, f0 = 1.0, f1 = 1.0;
  for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
    const bool straddles = points[i] < 0.0 && 0.0 < points[i + 1];
    if (straddles) {
      lhs *= negThetaPow(theta, k);
      f1 *= negThetaPow(theta, 1);
    }
  }
  const double pk = zeroSurvivorProb(theta, k);
  MixtureIdentityResult r;
  r.lhs = lhs;
  r.rhs = pk * f0 + (1.0 - pk) * f1;
  r.holds = std::abs(r.lhs - r.rhs) <= tol;
  return r;
}

}  // namespace cabm
