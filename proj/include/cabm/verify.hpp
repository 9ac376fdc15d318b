#pragma once

#include "cabm/kernel_matrices.hpp"
#include "cabm/simulate.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cabm {

/// One analytic-vs-estimate comparison carrying everything needed to rerun
/// it. pass <=> |analytic - estimate| <= z * stdError + biasAllowance, with
/// both tolerance ingredients recorded.
struct CheckReport {
  std::string name;
  /// Recorded inputs (theta, t, dt, replicates, seed, points, ...) as
  /// key/value pairs, in a fixed order so the report hashes stably.
  std::vector<std::pair<std::string, std::string>> inputs;
  double analytic = 0.0;
  double estimate = 0.0;
  double stdError = 0.0;
  double z = 3.0;
  double biasAllowance = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Fills discrepancy/tolerance/pass from the comparison rule.
CheckReport makeReport(std::string name,
                       std::vector<std::pair<std::string, std::string>> inputs,
                       double analytic, double estimate, double stdError,
                       double z, double biasAllowance);

/// FNV-1a over name and inputs; stable across runs and platforms.
std::uint64_t paramHash(const CheckReport& r);

bool allPass(std::span<const CheckReport> reports);

/// JSON array, one object per check, with a schema_version field.
std::string reportsToJson(std::span<const CheckReport> reports);

/// Flat summary: check,param_hash,analytic,mc_mean,mc_stderr,tolerance,pass.
std::string reportsToCsv(std::span<const CheckReport> reports);

/// Monte Carlo knobs shared by the statistical checks.
struct McParams {
  double dt = 1e-3;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 1;
  double z = 3.0;
  double biasAllowance = 0.01;
};

/// Duality comparison: the Pfaffian of the duality matrix at `points`
/// against the simulated spin statistic started from the atoms of `f`
/// (multiplicity = number of coincident particles). Multiplicities must be
/// finite.
CheckReport dualityCheck(const FiniteSpinData& f, double theta, double t,
                         std::span<const double> points, const McParams& mc);

/// Bin grid and window pair for the intensity comparison.
struct IntensityGrid {
  double lo = -1.0;
  double width = 0.25;
  int bins = 8;
  // Disjoint windows A = [a0,a1), B = [b0,b1) with a1 <= b0 for the
  // two-point comparison.
  double a0 = -0.6, a1 = -0.2, b0 = 0.2, b1 = 0.6;
  /// Allowance for each statistical comparison, as a fraction of the
  /// analytic value (covers discretization and finite-start bias).
  double biasFraction = 0.02;
};

/// One-point intensity on the grid (one report per bin), the pair count
/// over A x B, and the analytic two-point factorization ratio at separation
/// 20 sqrt(t). `init` is the simulated stand-in for the kernel's initial
/// data (for maximal data: a lattice much finer than sqrt(t)).
std::vector<CheckReport> intensityCheck(const std::vector<double>& init,
                                        const ScalarKernel& kernel, double t,
                                        const IntensityGrid& grid,
                                        const McParams& mc);

/// Truncated series for E prod_p (1 - phi(X_p)) as an alternating sum of
/// integrated Pfaffians, with a factorial-vs-geometric majorant controlling
/// the tail. Index k of the vectors is the series order.
struct FredholmResult {
  std::vector<double> termByOrder;    // T_0 = 1, T_k for k >= 1
  std::vector<double> partialSums;    // S_k = T_0 + ... + T_k
  std::vector<double> orderBound;     // majorant B_k with |T_k| <= B_k
  std::vector<double> tailBound;      // sum_{j > k} B_j
  double value = 1.0;                 // last partial sum
  int orderUsed = 0;
  bool converged = true;              // tail bound below tol at orderUsed
};

/// Evaluates the series by Gauss-Legendre quadrature over the support of
/// phi (step function, values in [0,1), vanishing outside its breakpoints).
/// Node tuples are enumerated as sorted index subsets; coincident tuples
/// contribute nothing because the assembled Pfaffian vanishes there.
/// maxOrder is hard-capped at 12.
FredholmResult laplaceFredholm(const ScalarKernel& kernel, double t,
                               const StepFunction& phi, double tol = 1e-6,
                               int maxOrder = 12, int nodeBudget = 20);

/// Series value vs the simulated avoidance functional started at `init`;
/// when theta == 0 and phi is a single near-indicator piece on (a,b), also
/// vs the no-particle probability K_t(a,b). A non-converged series fails.
std::vector<CheckReport> laplaceCheck(const ScalarKernel& kernel, double t,
                                      const StepFunction& phi,
                                      const std::vector<double>& init,
                                      const McParams& mc, double tol = 1e-6,
                                      int maxOrder = 12, int nodeBudget = 20);

/// Configuration of the k-fold-atom mixture checks.
struct MixtureConfig {
  double theta = 0.5;
  std::uint64_t k = 3;
  double t = 0.1;      // observation time for the cluster runs
  double eps = 1e-3;   // cluster spacing (also rerun at eps/2)
  double center = 0.0; // cluster / atom position
};

/// Three families of reports: (a) kernel linearity
/// K^{(k)} = p_k K^{(0)} + (1-p_k) K^{(1)} on a fixed (t,x,y) battery to
/// 1e-8 including derivatives; (b) zero-survivor probability of the
/// eps-cluster vs p_k, at eps and eps/2 plus a consistency row; (c) the
/// cluster's duality statistic vs the p_k mixture of analytic Pfaffians.
std::vector<CheckReport> mixtureCheck(const MixtureConfig& c,
                                      const McParams& mc);

struct AcceptanceOptions {
  std::uint64_t seed = 6046;
  bool quick = false;  // reduced replicas / coarser lattices for smoke runs
};

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;  // one-line summary of the measured numbers
  std::vector<CheckReport> reports;
};

/// The full acceptance battery (seven criteria). Deterministic given the
/// options.
std::vector<CriterionResult> runAcceptance(const AcceptanceOptions& opt);

}  // namespace cabm
