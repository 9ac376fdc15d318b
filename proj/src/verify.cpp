#include "cabm/verify.hpp"

#include "cabm/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cabm {

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string joinValues(std::span<const double> xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += fmt12(xs[i]);
  }
  return out;
}

using Inputs = std::vector<std::pair<std::string, std::string>>;

double elapsedSeconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

CheckReport makeReport(std::string name, Inputs inputs, double analytic,
                       double estimate, double stdError, double z,
                       double biasAllowance) {
  CheckReport r;
  r.name = std::move(name);
  r.inputs = std::move(inputs);
  r.analytic = analytic;
  r.estimate = estimate;
  r.stdError = stdError;
  r.z = z;
  r.biasAllowance = biasAllowance;
  r.discrepancy = std::abs(analytic - estimate);
  r.tolerance = z * stdError + biasAllowance;
  r.pass = std::isfinite(analytic) && std::isfinite(estimate) &&
           std::isfinite(stdError) && r.discrepancy <= r.tolerance;
  return r;
}

std::uint64_t paramHash(const CheckReport& r) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= '\n';
    h *= 1099511628211ull;
  };
  mix(r.name);
  for (const auto& [k, v] : r.inputs) {
    mix(k);
    mix(v);
  }
  return h;
}

bool allPass(std::span<const CheckReport> reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const CheckReport& r) { return r.pass; });
}

std::string reportsToJson(std::span<const CheckReport> reports) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckReport& r : reports) {
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [k, v] : r.inputs) in[k] = v;
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(paramHash(r)));
    checks.push_back({{"name", r.name},
                      {"param_hash", hash},
                      {"inputs", in},
                      {"analytic", r.analytic},
                      {"mc_mean", r.estimate},
                      {"mc_stderr", r.stdError},
                      {"z", r.z},
                      {"bias_allowance", r.biasAllowance},
                      {"discrepancy", r.discrepancy},
                      {"tolerance", r.tolerance},
                      {"pass", r.pass}});
  }
  nlohmann::json doc{{"schema_version", 1}, {"checks", checks}};
  return doc.dump(2) + "\n";
}

std::string reportsToCsv(std::span<const CheckReport> reports) {
  std::string out = "check,param_hash,analytic,mc_mean,mc_stderr,tolerance,pass\n";
  for (const CheckReport& r : reports) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(paramHash(r)));
    out += r.name;
    out += ',';
    out += hash;
    out += ',';
    out += fmt12(r.analytic);
    out += ',';
    out += fmt12(r.estimate);
    out += ',';
    out += fmt12(r.stdError);
    out += ',';
    out += fmt12(r.tolerance);
    out += ',';
    out += r.pass ? '1' : '0';
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Duality
// ---------------------------------------------------------------------------

CheckReport dualityCheck(const FiniteSpinData& f, double theta, double t,
                         std::span<const double> points, const McParams& mc) {
  f.measure.validate();
  if (points.empty() || points.size() % 2 != 0)
    throw std::invalid_argument("dualityCheck: need a nonempty even point list");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i - 1] < points[i]))
      throw std::invalid_argument("dualityCheck: points must be strictly increasing");

  std::vector<double> init;
  for (const auto& atom : f.measure.atoms) {
    if (atom.multiplicity == kInfiniteWeight)
      throw std::invalid_argument("dualityCheck: infinite multiplicity cannot be simulated");
    for (std::uint64_t c = 0; c < atom.multiplicity; ++c)
      init.push_back(atom.position);
  }

  const ScalarKernel kernel(InitialData(f), theta);
  const double analytic = dualityStatistic(points, kernel, t);
  const SimConfig cfg{theta, mc.dt, t};
  const MCEstimate est = mcDualStatistic(init, cfg, points, mc.replicates, mc.seed);

  Inputs in{{"theta", fmt12(theta)},
            {"t", fmt12(t)},
            {"dt", fmt12(mc.dt)},
            {"replicates", std::to_string(mc.replicates)},
            {"seed", std::to_string(mc.seed)},
            {"points", joinValues(points)},
            {"initial", joinValues(init)}};
  return makeReport("duality_n" + std::to_string(points.size() / 2) + "_theta" + fmt12(theta),
                    std::move(in), analytic, est.mean, est.stdError, mc.z,
                    mc.biasAllowance);
}

// ---------------------------------------------------------------------------
// Intensity
// ---------------------------------------------------------------------------

std::vector<CheckReport> intensityCheck(const std::vector<double>& init,
                                        const ScalarKernel& kernel, double t,
                                        const IntensityGrid& grid,
                                        const McParams& mc) {
  if (grid.bins < 1 || !(grid.width > 0.0))
    throw std::invalid_argument("intensityCheck: need bins >= 1 and width > 0");
  if (!(grid.a0 < grid.a1 && grid.a1 <= grid.b0 && grid.b0 < grid.b1))
    throw std::invalid_argument("intensityCheck: windows must be disjoint and ordered");

  const double theta = kernel.theta();
  const SimConfig cfg{theta, mc.dt, t};
  const BinnedCounts bc = binnedCounts(init, cfg, grid.lo, grid.width,
                                       grid.bins, mc.replicates, mc.seed);
  const GaussLegendre rule(6);

  std::vector<CheckReport> out;
  const Inputs common{{"theta", fmt12(theta)},
                      {"t", fmt12(t)},
                      {"dt", fmt12(mc.dt)},
                      {"replicates", std::to_string(mc.replicates)},
                      {"seed", std::to_string(mc.seed)},
                      {"particles", std::to_string(init.size())}};

  for (int j = 0; j < grid.bins; ++j) {
    const double lo = grid.lo + j * grid.width;
    const double hi = lo + grid.width;
    const double mass = integrate(
        [&](double x) { return particleDensity(x, kernel, t); }, lo, hi, rule);
    Inputs in = common;
    in.push_back({"bin", joinValues(std::vector<double>{lo, hi})});
    out.push_back(makeReport("intensity_bin" + std::to_string(j), std::move(in),
                             mass, bc.mean[static_cast<std::size_t>(j)],
                             bc.stdError[static_cast<std::size_t>(j)], mc.z,
                             grid.biasFraction * std::abs(mass)));
  }

  // Two-window pair count: integral of the two-point intensity over A x B.
  {
    double pairMass = 0.0;
    const double amid = 0.5 * (grid.a0 + grid.a1), ahw = 0.5 * (grid.a1 - grid.a0);
    const double bmid = 0.5 * (grid.b0 + grid.b1), bhw = 0.5 * (grid.b1 - grid.b0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double pts[2] = {amid + ahw * rule.nodes[i], bmid + bhw * rule.nodes[j]};
        pairMass += rule.weights[i] * rule.weights[j] * intensity(pts, kernel, t);
      }
    pairMass *= ahw * bhw;
    const MCEstimate pc = mcPairCount(init, cfg, grid.a0, grid.a1, grid.b0,
                                      grid.b1, mc.replicates, mc.seed + 1);
    Inputs in = common;
    in.push_back({"windows", joinValues(std::vector<double>{grid.a0, grid.a1,
                                                            grid.b0, grid.b1})});
    in.push_back({"pair_seed", std::to_string(mc.seed + 1)});
    out.push_back(makeReport("intensity_pair", std::move(in), pairMass, pc.mean,
                             pc.stdError, mc.z, grid.biasFraction * std::abs(pairMass)));
  }

  // Analytic factorization at separation 20 sqrt(t): the two-point function
  // splits into the product of one-point densities.
  {
    const double c = grid.lo + 0.5 * grid.bins * grid.width;
    const double pts[2] = {c - 10.0 * std::sqrt(t), c + 10.0 * std::sqrt(t)};
    const double rho2 = intensity(pts, kernel, t);
    const double prod = particleDensity(pts[0], kernel, t) *
                        particleDensity(pts[1], kernel, t);
    const double ratio = rho2 / prod;
    Inputs in{{"theta", fmt12(theta)},
              {"t", fmt12(t)},
              {"points", joinValues(pts)}};
    out.push_back(makeReport("intensity_factorization", std::move(in), ratio,
                             1.0, 0.0, mc.z, 0.01));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fredholm series
// ---------------------------------------------------------------------------

namespace {

/// Advances a sorted k-subset of {0..m-1}; false after the last one.
bool nextCombination(std::vector<int>& idx, int m) {
  const int k = static_cast<int>(idx.size());
  int p = k - 1;
  while (p >= 0 && idx[static_cast<std::size_t>(p)] == m - k + p) --p;
  if (p < 0) return false;
  ++idx[static_cast<std::size_t>(p)];
  for (int q = p + 1; q < k; ++q)
    idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  return true;
}

}  // namespace

FredholmResult laplaceFredholm(const ScalarKernel& kernel, double t,
                               const StepFunction& phi, double tol,
                               int maxOrder, int nodeBudget) {
  if (!(t > 0.0)) throw std::invalid_argument("laplaceFredholm: t must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("laplaceFredholm: tol must be positive");
  if (maxOrder < 1 || maxOrder > 12)
    throw std::invalid_argument("laplaceFredholm: maxOrder must lie in [1,12]");
  if (nodeBudget < 2 || nodeBudget > 32)
    throw std::invalid_argument("laplaceFredholm: nodeBudget must lie in [2,32]");
  phi.validate(0.0, 1.0);
  for (double v : phi.values)
    if (v >= 1.0)
      throw std::invalid_argument("laplaceFredholm: phi values must stay below 1");
  if (phi.values.front() != 0.0 || phi.values.back() != 0.0)
    throw std::invalid_argument("laplaceFredholm: phi must vanish outside its breakpoints");

  FredholmResult res;
  res.termByOrder = {1.0};
  res.partialSums = {1.0};
  res.orderBound = {1.0};

  struct Piece {
    double a, b, v;
  };
  std::vector<Piece> pieces;
  double totalLen = 0.0;
  for (std::size_t i = 1; i + 1 < phi.values.size(); ++i)
    if (phi.values[i] > 0.0) {
      pieces.push_back({phi.breakpoints[i - 1], phi.breakpoints[i], phi.values[i]});
      totalLen += phi.breakpoints[i] - phi.breakpoints[i - 1];
    }
  if (pieces.empty()) {
    res.tailBound = {0.0};
    return res;  // E prod (1 - 0) = 1 exactly
  }

  // Distribute quadrature nodes over the support pieces by length.
  std::vector<int> counts(pieces.size());
  int used = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    counts[i] = std::max(
        3, static_cast<int>(std::lround(nodeBudget * (pieces[i].b - pieces[i].a) / totalLen)));
    used += counts[i];
  }
  while (used > std::max(nodeBudget, 3 * static_cast<int>(pieces.size()))) {
    auto big = std::max_element(counts.begin(), counts.end());
    --*big;
    --used;
  }

  std::vector<double> xs, u;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const GaussLegendre rule(counts[i]);
    const double mid = 0.5 * (pieces[i].a + pieces[i].b);
    const double hw = 0.5 * (pieces[i].b - pieces[i].a);
    for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
      xs.push_back(mid + hw * rule.nodes[r]);
      u.push_back(hw * rule.weights[r] * pieces[i].v);
    }
  }
  const int m = static_cast<int>(xs.size());

  const SkewMatrix full = intensityMatrix(xs, kernel, t);
  const Eigen::MatrixXd& M = full.matrix();
  const double kinf = M.cwiseAbs().maxCoeff();
  const double c = std::accumulate(u.begin(), u.end(), 0.0) * kinf;

  // Majorant B_k = c^k (2k)^{k/2} / k!; summable since k! wins eventually.
  auto orderBound = [c](int k) {
    if (k == 0) return 1.0;
    if (c <= 0.0) return 0.0;
    return std::exp(k * std::log(c) + 0.5 * k * std::log(2.0 * k) -
                    std::lgamma(k + 1.0));
  };
  auto tailOf = [&orderBound](int k) {
    double s = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int j = k + 1; j <= k + 600; ++j) {
      const double b = orderBound(j);
      s += b;
      if (b < prev && b < 1e-18 * std::max(s, 1e-300)) break;
      prev = b;
    }
    return s;
  };

  res.tailBound = {tailOf(0)};
  if (res.tailBound[0] < tol) {
    res.orderUsed = 0;
    res.converged = true;
    res.value = 1.0;
    return res;
  }

  Eigen::MatrixXd sub;
  std::vector<int> idx;
  for (int k = 1; k <= maxOrder; ++k) {
    double sum = 0.0;
    if (k <= m) {
      idx.resize(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      sub.resize(2 * k, 2 * k);
      do {
        double coeff = 1.0;
        for (int a : idx) coeff *= u[static_cast<std::size_t>(a)];
        for (int p = 0; p < k; ++p)
          for (int q = 0; q < k; ++q)
            sub.block<2, 2>(2 * p, 2 * q) =
                M.block<2, 2>(2 * idx[static_cast<std::size_t>(p)],
                              2 * idx[static_cast<std::size_t>(q)]);
        sum += coeff * pfaffianInPlace(sub);
      } while (nextCombination(idx, m));
    }
    const double term = (k % 2 ? -1.0 : 1.0) * sum;
    res.termByOrder.push_back(term);
    res.partialSums.push_back(res.partialSums.back() + term);
    res.orderBound.push_back(orderBound(k));
    res.tailBound.push_back(tailOf(k));
    res.orderUsed = k;
    if (res.tailBound.back() < tol) {
      res.converged = true;
      res.value = res.partialSums.back();
      return res;
    }
  }
  res.converged = false;
  res.value = res.partialSums.back();
  return res;
}

std::vector<CheckReport> laplaceCheck(const ScalarKernel& kernel, double t,
                                      const StepFunction& phi,
                                      const std::vector<double>& init,
                                      const McParams& mc, double tol,
                                      int maxOrder, int nodeBudget) {
  const FredholmResult fr = laplaceFredholm(kernel, t, phi, tol, maxOrder, nodeBudget);
  const SimConfig cfg{kernel.theta(), mc.dt, t};
  const MCEstimate est =
      mcAvoidanceFunctional(init, cfg, phi, mc.replicates, mc.seed);

  std::vector<CheckReport> out;
  Inputs in{{"theta", fmt12(kernel.theta())},
            {"t", fmt12(t)},
            {"dt", fmt12(mc.dt)},
            {"replicates", std::to_string(mc.replicates)},
            {"seed", std::to_string(mc.seed)},
            {"particles", std::to_string(init.size())},
            {"order_used", std::to_string(fr.orderUsed)},
            {"tail_bound", fmt12(fr.tailBound.back())},
            {"converged", fr.converged ? "true" : "false"}};
  CheckReport series = makeReport("laplace_series_vs_mc", std::move(in),
                                  fr.value, est.mean, est.stdError, mc.z,
                                  mc.biasAllowance);
  series.pass = series.pass && fr.converged;
  out.push_back(std::move(series));

  // A single near-indicator piece at theta == 0 pins the series to the
  // no-particle probability K_t(a,b).
  if (kernel.theta() == 0.0) {
    struct Piece {
      double a, b, v;
    };
    std::vector<Piece> pos;
    for (std::size_t i = 1; i + 1 < phi.values.size(); ++i)
      if (phi.values[i] > 0.0)
        pos.push_back({phi.breakpoints[i - 1], phi.breakpoints[i], phi.values[i]});
    if (pos.size() == 1 && pos[0].v >= 0.999) {
      const double kval = kernel(t, pos[0].a, pos[0].b).k;
      Inputs kin{{"t", fmt12(t)},
                 {"interval", joinValues(std::vector<double>{pos[0].a, pos[0].b})},
                 {"phi_value", fmt12(pos[0].v)}};
      CheckReport vsk = makeReport("laplace_series_vs_kernel", std::move(kin),
                                   kval, fr.value, 0.0, mc.z, 1e-3);
      vsk.pass = vsk.pass && fr.converged;
      out.push_back(std::move(vsk));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixture
// ---------------------------------------------------------------------------

std::vector<CheckReport> mixtureCheck(const MixtureConfig& c, const McParams& mc) {
  if (c.k < 2) throw std::invalid_argument("mixtureCheck: k must be >= 2");
  if (!(c.theta >= 0.0 && c.theta <= 1.0))
    throw std::invalid_argument("mixtureCheck: theta must lie in [0,1]");
  if (!(c.eps > 0.0) || !(c.t > 0.0))
    throw std::invalid_argument("mixtureCheck: eps and t must be positive");

  const double pk = zeroSurvivorProb(c.theta, c.k);
  std::vector<CheckReport> out;
  const std::string tag = "_theta" + fmt12(c.theta) + "_k" + std::to_string(c.k);

  // (a) Kernel linearity: the k-fold atom is the p_k mixture of the empty
  // and the single-atom data, so K inherits the same mixture exactly.
  {
    const ScalarKernel k0(InitialData(FiniteSpinData{}), c.theta);
    const ScalarKernel k1(
        InitialData(FiniteSpinData{PointMeasure{{{c.center, 1}}}}), c.theta);
    const ScalarKernel kk(
        InitialData(FiniteSpinData{PointMeasure{{{c.center, c.k}}}}), c.theta);
    const double battery[][3] = {{0.5, -0.4, 0.3},
                                 {1.0, -1.0, 1.0},
                                 {0.25, 0.1, 0.9},
                                 {2.0, -0.7, -0.1}};
    double worst = 0.0;
    for (const auto& b : battery) {
      const double tb = b[0], x = c.center + b[1], y = c.center + b[2];
      const KernelEval ek = kk(tb, x, y), e0 = k0(tb, x, y), e1 = k1(tb, x, y);
      const double q = 1.0 - pk;
      worst = std::max({worst, std::abs(ek.k - pk * e0.k - q * e1.k),
                        std::abs(ek.dx - pk * e0.dx - q * e1.dx),
                        std::abs(ek.dy - pk * e0.dy - q * e1.dy),
                        std::abs(ek.dxy - pk * e0.dxy - q * e1.dxy)});
    }
    Inputs in{{"theta", fmt12(c.theta)},
              {"k", std::to_string(c.k)},
              {"center", fmt12(c.center)},
              {"p_k", fmt12(pk)}};
    out.push_back(makeReport("mixture_kernel_linearity" + tag, std::move(in),
                             0.0, worst, 0.0, mc.z, 1e-8));
  }

  auto cluster = [&c](double spacing) {
    std::vector<double> xs;
    for (std::uint64_t i = 0; i < c.k; ++i)
      xs.push_back(c.center + spacing * static_cast<double>(i));
    return xs;
  };
  const SimConfig cfg{c.theta, mc.dt, c.t};
  const Inputs common{{"theta", fmt12(c.theta)},
                      {"k", std::to_string(c.k)},
                      {"t", fmt12(c.t)},
                      {"dt", fmt12(mc.dt)},
                      {"replicates", std::to_string(mc.replicates)},
                      {"seed", std::to_string(mc.seed)},
                      {"p_k", fmt12(pk)}};

  // (b) Zero-survivor probability of the eps-cluster, at eps and eps/2.
  const SurvivorDistribution d1 =
      survivorDistribution(cluster(c.eps), cfg, mc.replicates, mc.seed);
  const SurvivorDistribution d2 =
      survivorDistribution(cluster(0.5 * c.eps), cfg, mc.replicates, mc.seed + 1);
  {
    Inputs in = common;
    in.push_back({"eps", fmt12(c.eps)});
    out.push_back(makeReport("mixture_survivor_eps" + tag, std::move(in), pk,
                             d1.probability[0], d1.stdError[0], mc.z,
                             mc.biasAllowance));
    Inputs in2 = common;
    in2.push_back({"eps", fmt12(0.5 * c.eps)});
    out.push_back(makeReport("mixture_survivor_halfeps" + tag, std::move(in2),
                             pk, d2.probability[0], d2.stdError[0], mc.z,
                             mc.biasAllowance));
    Inputs in3 = common;
    in3.push_back({"eps_pair", fmt12(c.eps) + ";" + fmt12(0.5 * c.eps)});
    out.push_back(makeReport("mixture_survivor_consistency" + tag,
                             std::move(in3), d1.probability[0],
                             d2.probability[0],
                             std::hypot(d1.stdError[0], d2.stdError[0]), mc.z,
                             0.01));
  }

  // (c) Duality statistic of the cluster vs the p_k mixture of the analytic
  // Pfaffians for the empty and single-particle data.
  {
    const double a = c.center - std::sqrt(c.t);
    const double b = c.center + 0.7 * std::sqrt(c.t);
    const double pts[2] = {a, b};
    const ScalarKernel k1(
        InitialData(FiniteSpinData{PointMeasure{{{c.center, 1}}}}), c.theta);
    const double single = dualityStatistic(pts, k1, c.t);
    const double analytic = pk + (1.0 - pk) * single;
    const MCEstimate est =
        mcDualStatistic(cluster(c.eps), cfg, pts, mc.replicates, mc.seed + 2);
    Inputs in = common;
    in.push_back({"points", joinValues(pts)});
    in.push_back({"single_pf", fmt12(single)});
    out.push_back(makeReport("mixture_cluster_duality" + tag, std::move(in),
                             analytic, est.mean, est.stdError, mc.z,
                             mc.biasAllowance));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Acceptance battery
// ---------------------------------------------------------------------------

namespace {

struct BatteryEntry {
  InitialData data;
  double theta;
};

std::vector<BatteryEntry> kernelBattery() {
  std::vector<BatteryEntry> b;
  b.push_back({InitialData(MaximalData{}), 0.0});
  b.push_back({InitialData(FiniteSpinData{PointMeasure{{{-0.3, 1}, {0.4, 2}}}}), 0.5});
  b.push_back({InitialData(FiniteSpinData{PointMeasure{{{0.0, kInfiniteWeight}}}}), 0.5});
  b.push_back({InitialData(ProductData{StepFunction{{-0.2, 0.5}, {1.0, -1.0, 1.0}}}), 1.0});
  b.push_back({InitialData(ProductData{StepFunction::constant(0.6)}), 1.0});
  b.push_back({InitialData(ClosedSetAvoidData{{{-0.5, 0.2}}, {{1.0, 2}}}), 0.3});
  return b;
}

CriterionResult pfaffianSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{1, "pfaffian-suite", false, 0.0, "", {}};

  Rng rng = Rng::forReplica(opt.seed, 101);
  const int total = opt.quick ? 120 : 500;
  int made = 0;
  double worstSq = 0.0, worstBrute = 0.0;
  while (made < total) {
    for (int order = 2; order <= 20 && made < total; order += 2, ++made) {
      Eigen::MatrixXd upper(order, order);
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) upper(i, j) = rng.normal();
      const SkewMatrix a = SkewMatrix::fromUpper(upper);
      const double pf = pfaffian(a);
      const double det = a.matrix().determinant();
      worstSq = std::max(worstSq,
                         std::abs(pf * pf - det) / std::max(1.0, std::abs(det)));
      if (order <= 12) {
        const double ref = pfaffianBruteforce(a);
        worstBrute = std::max(worstBrute,
                              std::abs(pf - ref) / std::max(1.0, std::abs(ref)));
      }
    }
  }

  // Coincident-point reduction: a tied pair in the duality matrix drops out
  // (its diagonal kernel value is 1), and the intensity Pfaffian vanishes.
  const FiniteSpinData f{PointMeasure{{{-1.0, 1}, {0.0, 2}, {2.0, 1}}}};
  const ScalarKernel kern(InitialData(f), 0.5);
  double worstRed = 0.0;
  {
    const double tied1[4] = {-0.5, -0.5, 0.3, 1.2};
    const double red1[2] = {0.3, 1.2};
    const double tied2[4] = {-0.5, 0.3, 1.2, 1.2};
    const double red2[2] = {-0.5, 0.3};
    const double tied3[6] = {-0.8, 0.1, 0.1, 0.6, 1.4, 2.2};
    const double red3[4] = {-0.8, 0.6, 1.4, 2.2};
    const double t = 0.5;
    auto rel = [&](std::span<const double> big, std::span<const double> small) {
      const double lhs = dualityStatistic(big, kern, t);
      const double rhs = dualityStatistic(small, kern, t);
      return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
    };
    worstRed = std::max({rel(tied1, red1), rel(tied2, red2), rel(tied3, red3)});
    const double same[2] = {0.3, 0.3};
    worstRed = std::max(worstRed, std::abs(intensity(same, kern, t, true)));
  }

  res.seconds = elapsedSeconds(start);
  res.pass = worstSq <= 1e-9 && worstBrute <= 1e-10 && worstRed <= 1e-9 &&
             res.seconds < 10.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d matrices: worst pf^2 vs det %.2e (<=1e-9), worst vs "
                "expansion %.2e (<=1e-10), reduction %.2e (<=1e-9)",
                total, worstSq, worstBrute, worstRed);
  res.detail = buf;
  return res;
}

CriterionResult kernelSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{2, "kernel-suite", false, 0.0, "", {}};
  (void)opt;

  const auto battery = kernelBattery();
  const double xs[] = {-2.1, -1.0, -0.3, 0.0, 0.4, 1.2, 2.5};
  const double ts[] = {0.05, 0.5, 1.3};

  double worstDiag = 0.0, worstBound = 0.0;
  for (const auto& e : battery) {
    const ScalarKernel k(e.data, e.theta);
    for (double t : ts)
      for (double x : xs) {
        const KernelEval d = k(t, x, x);
        worstDiag = std::max(worstDiag, std::abs(d.k - 1.0));
        for (double y : xs)
          if (x <= y) worstBound = std::max(worstBound, std::abs(k(t, x, y).k) - 1.0);
      }
  }

  double worstResidual = 0.0, worstRatioLo = 10.0, worstRatioHi = 0.0;
  for (const auto& e : battery) {
    const double t = 0.8, x = -0.45, y = 0.55;
    const double r1 = heatResidual(e.data, e.theta, t, x, y, 1e-3);
    const double r2 = heatResidual(e.data, e.theta, t, x, y, 2e-3);
    worstResidual = std::max(worstResidual, r1);
    if (r1 > 1e-9) {  // above stencil roundoff, so the decay rate is visible
      const double ratio = r2 / r1;
      worstRatioLo = std::min(worstRatioLo, ratio);
      worstRatioHi = std::max(worstRatioHi, ratio);
    }
  }

  // Closed forms against the generic quadrature, including the empty-data
  // value K_1(-1,1) = erfc(1/sqrt(2)).
  double worstPath = 0.0;
  bool quadConverged = true;
  {
    const double pts[][3] = {{1.0, -1.0, 1.0}, {0.7, -0.8, 0.9}};
    const std::size_t picks[] = {0, 1, 3, 5};
    for (std::size_t bi : picks)
      for (const auto& p : pts) {
        const auto& e = battery[bi];
        const KernelEval closed = evaluateKernel(e.data, e.theta, p[0], p[1], p[2]);
        const KernelEval quad = evaluateKernel(e.data, e.theta, p[0], p[1], p[2],
                                               {}, KernelPath::Quadrature);
        worstPath = std::max(worstPath, std::abs(closed.k - quad.k));
        quadConverged = quadConverged && quad.converged;
      }
  }
  const double frozen = 0.31731050786291415;  // erfc(1/sqrt(2))
  const double closedRef =
      evaluateKernel(InitialData(MaximalData{}), 0.0, 1.0, -1.0, 1.0).k;
  const double quadRef = evaluateKernel(InitialData(MaximalData{}), 0.0, 1.0,
                                        -1.0, 1.0, {}, KernelPath::Quadrature)
                             .k;

  res.seconds = elapsedSeconds(start);
  res.pass = worstDiag <= 1e-9 && worstBound <= 1e-8 && worstResidual <= 1e-4 &&
             worstRatioLo >= 3.2 && worstRatioHi <= 4.8 && worstPath <= 1e-6 &&
             quadConverged && std::abs(closedRef - frozen) <= 1e-9 &&
             std::abs(quadRef - frozen) <= 1e-6 && res.seconds < 60.0;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "diag %.1e, bound excess %.1e, residual %.1e, Richardson "
                "[%.2f,%.2f], paths %.1e, empty-data value %.9f",
                worstDiag, std::max(worstBound, 0.0), worstResidual,
                worstRatioLo, worstRatioHi, worstPath, quadRef);
  res.detail = buf;
  return res;
}

CriterionResult dualitySuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{3, "duality", false, 0.0, "", {}};

  const FiniteSpinData f{PointMeasure{{{-1.0, 1}, {0.0, 1}, {2.0, 1}}}};
  McParams mc;
  mc.dt = 1e-3;
  mc.replicates = opt.quick ? 20000 : 100000;
  mc.biasAllowance = 0.01;
  const double n1[] = {-0.5, 0.5};
  const double n2[] = {-0.5, 0.5, 1.0, 1.5};
  std::uint64_t seed = opt.seed;
  for (double theta : {0.0, 0.5, 1.0}) {
    mc.seed = ++seed;
    res.reports.push_back(dualityCheck(f, theta, 0.5, n1, mc));
    mc.seed = ++seed;
    res.reports.push_back(dualityCheck(f, theta, 0.5, n2, mc));
  }

  res.seconds = elapsedSeconds(start);
  res.pass = allPass(res.reports) && res.seconds < 300.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "%zu comparisons, worst |disc|-tol margin %.2e",
                res.reports.size(), [&] {
                  double m = -1e300;
                  for (const auto& r : res.reports)
                    m = std::max(m, r.discrepancy - r.tolerance);
                  return m;
                }());
  res.detail = buf;
  return res;
}

CriterionResult mixtureSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{4, "mixture-identities", false, 0.0, "", {}};

  // (a) kernel linearity for k <= 6 over the theta battery.
  double worstLin = 0.0;
  for (std::uint64_t k = 1; k <= 6; ++k)
    for (double theta : {0.0, 0.25, 0.5, 0.9}) {
      const double pk = zeroSurvivorProb(theta, k);
      const ScalarKernel k0(InitialData(FiniteSpinData{}), theta);
      const ScalarKernel k1(InitialData(FiniteSpinData{PointMeasure{{{0.0, 1}}}}),
                            theta);
      const ScalarKernel kk(InitialData(FiniteSpinData{PointMeasure{{{0.0, k}}}}),
                            theta);
      const double battery[][3] = {{0.5, -0.4, 0.3}, {1.0, -1.0, 1.0},
                                   {0.25, 0.1, 0.9}, {2.0, -0.7, -0.1}};
      for (const auto& b : battery) {
        const KernelEval ek = kk(b[0], b[1], b[2]);
        const KernelEval e0 = k0(b[0], b[1], b[2]);
        const KernelEval e1 = k1(b[0], b[1], b[2]);
        const double q = 1.0 - pk;
        worstLin = std::max({worstLin, std::abs(ek.k - pk * e0.k - q * e1.k),
                             std::abs(ek.dx - pk * e0.dx - q * e1.dx),
                             std::abs(ek.dy - pk * e0.dy - q * e1.dy),
                             std::abs(ek.dxy - pk * e0.dxy - q * e1.dxy)});
      }
    }
  res.reports.push_back(makeReport("mixture_linearity_worst",
                                   {{"k_range", "1..6"},
                                    {"theta_battery", "0;0.25;0.5;0.9"}},
                                   0.0, worstLin, 0.0, 3.0, 1e-8));

  // (b) survivor probabilities with an eps-halving consistency run.
  McParams mc;
  mc.dt = 1e-4;
  mc.replicates = opt.quick ? 4000 : 20000;
  mc.biasAllowance = 0.02;
  const std::pair<double, std::uint64_t> cases[] = {
      {0.5, 2}, {0.5, 3}, {1.0, 2}, {0.0, 4}};
  std::uint64_t seed = opt.seed + 40;
  for (const auto& [theta, k] : cases) {
    MixtureConfig c;
    c.theta = theta;
    c.k = k;
    c.t = 0.1;
    c.eps = 1e-3;
    mc.seed = (seed += 10);
    auto reports = mixtureCheck(c, mc);
    for (auto& r : reports)
      if (r.name.rfind("mixture_kernel_linearity", 0) != 0)
        res.reports.push_back(std::move(r));
  }

  res.seconds = elapsedSeconds(start);
  res.pass = allPass(res.reports) && res.seconds < 300.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "linearity worst %.2e, %zu cluster comparisons",
                worstLin, res.reports.size() - 1);
  res.detail = buf;
  return res;
}

CriterionResult fredholmSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{5, "fredholm-laplace", false, 0.0, "", {}};

  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);
  const double a = -0.15, b = 0.15, t = 1.0;
  const StepFunction phi{{a, b}, {0.0, 1.0 - 1e-6, 0.0}};

  McParams mc;
  mc.dt = opt.quick ? 2e-3 : 1e-3;
  mc.replicates = opt.quick ? 2000 : 30000;
  mc.seed = opt.seed + 90;
  mc.biasAllowance = 0.01;
  const double spacing = opt.quick ? 0.04 : 0.01;
  const double span = opt.quick ? 6.0 : 8.0;
  const std::vector<double> init = latticeConfiguration(-span, span, spacing);

  res.reports = laplaceCheck(kernel, t, phi, init, mc);

  res.seconds = elapsedSeconds(start);
  res.pass = allPass(res.reports) && res.reports.size() == 2;
  char buf[160];
  const FredholmResult fr = laplaceFredholm(kernel, t, phi);
  std::snprintf(buf, sizeof buf,
                "series %.9f at order %d (tail %.1e), kernel %.9f, mc %.6f",
                fr.value, fr.orderUsed, fr.tailBound.back(),
                res.reports.size() > 1 ? res.reports[1].analytic : 0.0,
                res.reports[0].estimate);
  res.detail = buf;
  return res;
}

CriterionResult approximationSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{6, "approximation-decay", false, 0.0, "", {}};
  (void)opt;

  const StepFunction f{{-1.5, -0.4, 0.3, 1.1}, {0.0, 0.6, -0.8, 0.35, 0.0}};
  auto phi = [](double x) { return std::exp(-0.5 * x * x); };
  const double window = 9.0;  // phi is ~4e-18 here; beyond it s == f == const

  const int ns[] = {10, 20, 40, 80};
  std::vector<double> gaps;
  const GaussLegendre rule(8);
  for (int n : ns) {
    const PointMeasure mu = productApproximation(f, n);
    // Merge jump locations of the profile and of f inside the window.
    std::vector<double> edges{-window, window};
    for (double bp : f.breakpoints)
      if (bp > -window && bp < window) edges.push_back(bp);
    for (const auto& atom : mu.atoms)
      if (atom.position > -window && atom.position < window)
        edges.push_back(atom.position);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    // The flip list pins the profile only up to one global sign, so measure
    // against the better of the two signings.
    double gs = 0.0, gf = 0.0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
      const double mid = 0.5 * (edges[i - 1] + edges[i]);
      const double w = integrate(phi, edges[i - 1], edges[i], rule);
      gs += spinFactor(mu, mid) * w;
      gf += f(mid) * w;
    }
    gaps.push_back(std::min(std::abs(gs - gf), std::abs(gs + gf)));
  }

  // Least-squares slope of log|gap| against log n.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(gaps.size());
  for (int i = 0; i < m; ++i) {
    const double lx = std::log(static_cast<double>(ns[i]));
    const double ly = std::log(std::max(gaps[static_cast<std::size_t>(i)], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  res.seconds = elapsedSeconds(start);
  res.pass = slope <= -0.8;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "gaps %.3e %.3e %.3e %.3e over n=10,20,40,80; slope %.3f (<= -0.8)",
                gaps[0], gaps[1], gaps[2], gaps[3], slope);
  res.detail = buf;
  return res;
}

CriterionResult invariantSuite(const AcceptanceOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res{7, "simulator-invariants", false, 0.0, "", {}};

  const int total = opt.quick ? 2000 : 10000;
  int violations = 0;
  for (int i = 0; i < total; ++i) {
    Rng setup = Rng::forReplica(opt.seed + 7, static_cast<std::uint64_t>(i));
    const int count = 1 + static_cast<int>(setup.uniform() * 6.0);
    std::vector<double> init;
    for (int j = 0; j < count; ++j) init.push_back(4.0 * setup.uniform() - 2.0);
    std::sort(init.begin(), init.end());
    init.erase(std::unique(init.begin(), init.end()), init.end());
    const double thetas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    const SimConfig cfg{thetas[i % 5], 0.01, 0.2};

    auto run = [&](std::uint64_t replica) {
      Rng rng = Rng::forReplica(opt.seed + 8, replica);
      return simulateTrajectory(init, cfg, rng, 1);
    };
    const auto frames = run(static_cast<std::uint64_t>(i));
    const auto frames2 = run(static_cast<std::uint64_t>(i));

    bool ok = true;
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const auto& ps = frames[fi].positions;
      for (std::size_t j = 1; j < ps.size(); ++j)
        if (!(ps[j - 1] < ps[j])) ok = false;  // simplicity
      if (fi > 0) {
        const auto& prev = frames[fi - 1].positions;
        if (ps.size() > prev.size()) ok = false;  // monotone counts
        if (cfg.theta == 1.0 && (prev.size() - ps.size()) % 2 != 0)
          ok = false;  // parity conservation
      }
      if (cfg.theta == 0.0 && !init.empty() && ps.empty()) ok = false;
    }
    if (frames.size() != frames2.size()) ok = false;
    for (std::size_t fi = 0; ok && fi < frames.size(); ++fi)
      if (frames[fi].positions != frames2[fi].positions ||
          frames[fi].time != frames2[fi].time)
        ok = false;  // bit determinism
    if (!ok) ++violations;
  }

  res.seconds = elapsedSeconds(start);
  res.pass = violations == 0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d random trajectories, %d violations", total,
                violations);
  res.detail = buf;
  return res;
}

}  // namespace

std::vector<CriterionResult> runAcceptance(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> out;
  out.push_back(pfaffianSuite(opt));
  out.push_back(kernelSuite(opt));
  out.push_back(dualitySuite(opt));
  out.push_back(mixtureSuite(opt));
  out.push_back(fredholmSuite(opt));
  out.push_back(approximationSuite(opt));
  out.push_back(invariantSuite(opt));
  return out;
}

}  // namespace cabm
