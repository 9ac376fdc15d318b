#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace cabm {

/// Sentinel multiplicity/weight standing for "infinitely many particles";
/// its spin factor is 0 for every theta in [0,1).
inline constexpr std::uint64_t kInfiniteWeight =
    std::numeric_limits<std::uint64_t>::max();

/// Finite point measure: strictly increasing atom positions with integer
/// multiplicities >= 1.
struct PointMeasure {
  struct Atom {
    double position = 0.0;
    std::uint64_t multiplicity = 1;
  };
  std::vector<Atom> atoms;

  void validate() const;
  /// Total multiplicity carried by atoms strictly inside (x, y).
  std::uint64_t countIn(double x, double y) const;
  std::vector<double> positions() const;
  /// Convenience: unit-multiplicity measure at the given sorted positions.
  static PointMeasure simple(std::span<const double> positions);
};

/// Piecewise-constant function on R: values[0] left of breakpoints.front(),
/// values[i] on [breakpoints[i-1], breakpoints[i]), values.back() from
/// breakpoints.back() on. values.size() == breakpoints.size() + 1.
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;

  void validate(double lo, double hi) const;
  double operator()(double x) const;
  double integrate(double a, double b) const;
  static StepFunction constant(double v) { return StepFunction{{}, {v}}; }
};

/// Initial data f(x,y) = (-theta)^{mu(x,y)} for a finite point measure mu.
struct FiniteSpinData {
  PointMeasure measure;
};

/// Product initial data f(x,y) = g(x) g(y), |g| <= 1. Annihilating-only
/// (theta == 1) class.
struct ProductData {
  StepFunction factor;
};

/// Initial data 1{S cap (x,y) empty} weighted by (-theta)^{sum of weights of
/// isolated points inside (x,y)}; S is a disjoint union of closed intervals
/// plus weighted isolated points. Valid for theta in [0,1).
struct ClosedSetAvoidData {
  struct Interval {
    double lo = 0.0, hi = 0.0;  // lo <= hi; lo == hi is a single point
  };
  struct WeightedPoint {
    double position = 0.0;
    std::uint64_t weight = 1;  // kInfiniteWeight allowed
  };
  std::vector<Interval> intervals;
  std::vector<WeightedPoint> isolated;
};

/// f == 0: the law with every site initially occupied. Valid for all theta.
struct MaximalData {};

using InitialData =
    std::variant<FiniteSpinData, ProductData, ClosedSetAvoidData, MaximalData>;

/// (-theta)^k with the 0^0 == 1 convention and (-theta)^inf == 0.
double negThetaPow(double theta, std::uint64_t k);

/// Checks the variant's own invariants and its compatibility with theta
/// (ProductData needs theta == 1, ClosedSetAvoidData needs theta < 1).
void validateInitialData(const InitialData& f, double theta);

/// Evaluates the initial data at a pair x <= y.
double spinEval(const InitialData& f, double theta, double x, double y);

/// Positions where f(.,.) can jump, sorted and deduplicated. Between
/// consecutive breakpoints (and on the unbounded end cells) f is constant on
/// products of cells.
std::vector<double> breakpointsOf(const InitialData& f);

/// p_k: the weight of the empty configuration when the spin of k coincident
/// particles is split over the 0- and 1-particle laws,
/// (-theta)^k = p_k * 1 + (1 - p_k) * (-theta). Equals the probability that
/// an instantly reacting k-cluster leaves no survivor.
double zeroSurvivorProb(double theta, std::uint64_t k);

/// Block approximation of a [-1,1]-valued step function by a +/-1 spin
/// profile: on each block [k/n,(k+1)/n) over [-n,n) the profile is +1 then -1
/// with the switch point chosen so block integrals match; +1 outside [-n,n).
/// Returns the sign-change positions (a simple point measure).
PointMeasure productApproximation(const StepFunction& f, int n);

/// Spin factor of a simple point measure: (-1)^{mu(0,x)} for x >= 0 and
/// (-1)^{mu(x,0)} for x < 0.
double spinFactor(const PointMeasure& mu, double x);

struct MixtureIdentityResult {
  double lhs = 0.0;      // product of (-theta)^{k 1{pair straddles 0}}
  double rhs = 0.0;      // p_k * (f0 products) + (1-p_k) * (f1 products)
  bool holds = false;
};

/// Verifies the two-component mixture identity on products over the pairs
/// (points[0],points[1]), (points[2],points[3]), ... of f_j(x,y) =
/// (-theta)^{j 1{x<0<y}}.
MixtureIdentityResult mixtureSpinIdentity(double theta, std::uint64_t k,
                                          std::span<const double> points,
                                          double tol = 1e-12);

}  // namespace cabm
