#include "cabm/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace cabm {

void validateSimConfig(const SimConfig& cfg) {
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0))
    throw std::invalid_argument("SimConfig: theta must lie in [0,1]");
  if (!(cfg.dt > 0.0 && cfg.dt <= 0.1))
    throw std::invalid_argument("SimConfig: dt must lie in (0, 0.1]");
  if (!(cfg.tEnd >= 0.0) || !std::isfinite(cfg.tEnd))
    throw std::invalid_argument("SimConfig: tEnd must be finite and >= 0");
}

void stepOnce(std::vector<double>& xs, double theta, double dt, Rng& rng) {
  const std::size_t n = xs.size();
  if (n == 0) return;

  static thread_local std::vector<double> moved;
  moved.resize(n);
  const double scale = std::sqrt(2.0 * dt);
  for (std::size_t i = 0; i < n; ++i) moved[i] = xs[i] + scale * rng.normal();

  static thread_local std::vector<double> out;
  out.clear();
  out.reserve(n);
  std::size_t i = 0;
  while (i < n) {
    if (i + 1 == n) {
      out.push_back(moved[i]);
      break;
    }
    const double d0 = xs[i + 1] - xs[i];
    const double d1 = moved[i + 1] - moved[i];
    bool react;
    double site;
    if (d1 <= 0.0) {
      // The pair crossed inside the step; meet near the old midpoint.
      react = true;
      site = 0.5 * (xs[i] + xs[i + 1]);
    } else {
      react = rng.uniform() <= std::exp(-d0 * d1 / (2.0 * dt));
      site = 0.5 * (moved[i] + moved[i + 1]);
    }
    if (react) {
      const bool annihilate = rng.uniform() <= theta;
      if (!annihilate) out.push_back(site);
      i += 2;
    } else {
      out.push_back(moved[i]);
      i += 1;
    }
  }
  std::sort(out.begin(), out.end());
  xs = out;
}

void evolve(std::vector<double>& xs, const SimConfig& cfg, Rng& rng) {
  validateSimConfig(cfg);
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("evolve: initial positions must be sorted");
  const auto fullSteps = static_cast<std::uint64_t>(std::floor(cfg.tEnd / cfg.dt));
  for (std::uint64_t s = 0; s < fullSteps; ++s) stepOnce(xs, cfg.theta, cfg.dt, rng);
  const double remainder = cfg.tEnd - static_cast<double>(fullSteps) * cfg.dt;
  if (remainder > 1e-12 * cfg.dt) stepOnce(xs, cfg.theta, remainder, rng);
}

std::vector<TrajectoryFrame> simulateTrajectory(std::vector<double> xs,
                                                const SimConfig& cfg, Rng& rng,
                                                int stride) {
  validateSimConfig(cfg);
  if (stride < 1) throw std::invalid_argument("simulateTrajectory: stride >= 1");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("simulateTrajectory: initial positions must be sorted");

  std::vector<TrajectoryFrame> frames;
  frames.push_back({0.0, xs});
  const auto fullSteps = static_cast<std::uint64_t>(std::floor(cfg.tEnd / cfg.dt));
  for (std::uint64_t s = 1; s <= fullSteps; ++s) {
    stepOnce(xs, cfg.theta, cfg.dt, rng);
    if (s % static_cast<std::uint64_t>(stride) == 0)
      frames.push_back({static_cast<double>(s) * cfg.dt, xs});
  }
  const double remainder = cfg.tEnd - static_cast<double>(fullSteps) * cfg.dt;
  if (remainder > 1e-12 * cfg.dt) stepOnce(xs, cfg.theta, remainder, rng);
  if (frames.back().time != cfg.tEnd) frames.push_back({cfg.tEnd, xs});
  return frames;
}

MCEstimate monteCarloMean(std::uint64_t replicates, std::uint64_t seed,
                          const std::function<double(Rng&, std::uint64_t)>& statistic) {
  if (replicates < 1) throw std::invalid_argument("monteCarloMean: replicates >= 1");

  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (replicates + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);

  auto runChunk = [&](std::uint64_t c) {
    double s = 0.0, q = 0.0;
    const std::uint64_t hi = std::min(replicates, (c + 1) * kChunk);
    for (std::uint64_t r = c * kChunk; r < hi; ++r) {
      Rng rng = Rng::forReplica(seed, r);
      const double v = statistic(rng, r);
      s += v;
      q += v * v;
    }
    sums[c] = s;
    squares[c] = q;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(
      std::min<std::uint64_t>({hw, 8, chunks}));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) runChunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::uint64_t c = next.fetch_add(1); c < chunks;
             c = next.fetch_add(1))
          runChunk(c);
      });
    for (auto& th : pool) th.join();
  }

  // Fixed-order reduction: identical results whatever the thread count.
  double sum = 0.0, square = 0.0;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    square += squares[c];
  }

  MCEstimate est;
  est.replicates = replicates;
  est.seed = seed;
  const auto n = static_cast<double>(replicates);
  est.mean = sum / n;
  if (replicates > 1) {
    const double var = std::max(0.0, (square - n * est.mean * est.mean) / (n - 1.0));
    est.stdError = std::sqrt(var / n);
  }
  return est;
}

double spinStatistic(std::span<const double> xs,
                     std::span<const double> endpoints, double theta) {
  if (endpoints.size() < 2 || endpoints.size() % 2 != 0)
    throw std::invalid_argument("spinStatistic: need an even number of endpoints");
  double prod = 1.0;
  for (std::size_t i = 0; i + 1 < endpoints.size(); i += 2) {
    const double a = endpoints[i], b = endpoints[i + 1];
    if (!(a <= b)) throw std::invalid_argument("spinStatistic: need a <= b per pair");
    const auto lo = std::upper_bound(xs.begin(), xs.end(), a);
    const auto hi = std::lower_bound(xs.begin(), xs.end(), b);
    const auto count = static_cast<std::uint64_t>(hi > lo ? hi - lo : 0);
    prod *= negThetaPow(theta, count);
  }
  return prod;
}

namespace {

void requireSortedInit(const std::vector<double>& init) {
  if (!std::is_sorted(init.begin(), init.end()))
    throw std::invalid_argument("initial positions must be sorted");
  for (double x : init)
    if (!std::isfinite(x))
      throw std::invalid_argument("initial positions must be finite");
}

}  // namespace

MCEstimate mcDualStatistic(const std::vector<double>& init, const SimConfig& cfg,
                           std::span<const double> endpoints,
                           std::uint64_t replicates, std::uint64_t seed) {
  validateSimConfig(cfg);
  requireSortedInit(init);
  const std::vector<double> ends(endpoints.begin(), endpoints.end());
  return monteCarloMean(replicates, seed, [&, ends](Rng& rng, std::uint64_t) {
    std::vector<double> xs = init;
    evolve(xs, cfg, rng);
    return spinStatistic(xs, ends, cfg.theta);
  });
}

SurvivorDistribution survivorDistribution(const std::vector<double>& init,
                                          const SimConfig& cfg,
                                          std::uint64_t replicates,
                                          std::uint64_t seed) {
  validateSimConfig(cfg);
  requireSortedInit(init);
  if (replicates < 1) throw std::invalid_argument("survivorDistribution: replicates >= 1");

  std::vector<std::uint64_t> counts(init.size() + 1, 0);
  for (std::uint64_t r = 0; r < replicates; ++r) {
    Rng rng = Rng::forReplica(seed, r);
    std::vector<double> xs = init;
    evolve(xs, cfg, rng);
    counts[std::min(xs.size(), init.size())] += 1;
  }

  SurvivorDistribution d;
  d.replicates = replicates;
  d.seed = seed;
  const auto n = static_cast<double>(replicates);
  d.probability.resize(counts.size());
  d.stdError.resize(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double p = static_cast<double>(counts[j]) / n;
    d.probability[j] = p;
    d.stdError[j] = std::sqrt(std::max(0.0, p * (1.0 - p) / n));
  }
  return d;
}

BinnedCounts binnedCounts(const std::vector<double>& init, const SimConfig& cfg,
                          double lo, double width, int bins,
                          std::uint64_t replicates, std::uint64_t seed) {
  validateSimConfig(cfg);
  requireSortedInit(init);
  if (!(width > 0.0) || bins < 1)
    throw std::invalid_argument("binnedCounts: need width > 0 and bins >= 1");
  if (replicates < 1) throw std::invalid_argument("binnedCounts: replicates >= 1");

  std::vector<double> sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> square(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (std::uint64_t r = 0; r < replicates; ++r) {
    Rng rng = Rng::forReplica(seed, r);
    std::vector<double> xs = init;
    evolve(xs, cfg, rng);
    std::fill(count.begin(), count.end(), 0.0);
    for (double x : xs) {
      const double rel = (x - lo) / width;
      if (rel >= 0.0 && rel < static_cast<double>(bins))
        count[static_cast<std::size_t>(rel)] += 1.0;
    }
    for (int b = 0; b < bins; ++b) {
      sum[b] += count[b];
      square[b] += count[b] * count[b];
    }
  }

  BinnedCounts out;
  out.lo = lo;
  out.width = width;
  out.replicates = replicates;
  out.seed = seed;
  const auto n = static_cast<double>(replicates);
  out.mean.resize(sum.size());
  out.stdError.resize(sum.size());
  for (std::size_t b = 0; b < sum.size(); ++b) {
    out.mean[b] = sum[b] / n;
    if (replicates > 1) {
      const double var =
          std::max(0.0, (square[b] - n * out.mean[b] * out.mean[b]) / (n - 1.0));
      out.stdError[b] = std::sqrt(var / n);
    }
  }
  return out;
}

MCEstimate mcPairCount(const std::vector<double>& init, const SimConfig& cfg,
                       double a0, double a1, double b0, double b1,
                       std::uint64_t replicates, std::uint64_t seed) {
  validateSimConfig(cfg);
  requireSortedInit(init);
  if (!(a0 < a1 && b0 < b1) || (a1 > b0 && b1 > a0))
    throw std::invalid_argument("mcPairCount: windows must be ordered and disjoint");
  return monteCarloMean(replicates, seed, [&](Rng& rng, std::uint64_t) {
    std::vector<double> xs = init;
    evolve(xs, cfg, rng);
    double na = 0.0, nb = 0.0;
    for (double x : xs) {
      if (x >= a0 && x < a1) na += 1.0;
      if (x >= b0 && x < b1) nb += 1.0;
    }
    return na * nb;
  });
}

MCEstimate mcAvoidanceFunctional(const std::vector<double>& init,
                                 const SimConfig& cfg, const StepFunction& phi,
                                 std::uint64_t replicates, std::uint64_t seed) {
  validateSimConfig(cfg);
  requireSortedInit(init);
  phi.validate(0.0, 1.0);
  for (double v : phi.values)
    if (v >= 1.0)
      throw std::invalid_argument("mcAvoidanceFunctional: phi values must stay below 1");
  if (phi.breakpoints.empty() || phi.values.front() != 0.0 || phi.values.back() != 0.0)
    throw std::invalid_argument(
        "mcAvoidanceFunctional: phi must vanish outside its breakpoints");
  return monteCarloMean(replicates, seed, [&](Rng& rng, std::uint64_t) {
    std::vector<double> xs = init;
    evolve(xs, cfg, rng);
    double prod = 1.0;
    for (double x : xs) prod *= 1.0 - phi(x);
    return prod;
  });
}

std::vector<double> latticeConfiguration(double lo, double hi, double spacing) {
  if (!(spacing > 0.0) || !(lo <= hi))
    throw std::invalid_argument("latticeConfiguration: need lo <= hi, spacing > 0");
  std::vector<double> xs;
  const auto count = static_cast<std::size_t>((hi - lo) / spacing + 1e-9) + 1;
  xs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) xs.push_back(lo + static_cast<double>(i) * spacing);
  return xs;
}

}  // namespace cabm
