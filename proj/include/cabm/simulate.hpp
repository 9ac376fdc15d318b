#pragma once

#include "cabm/initial_data.hpp"
#include "cabm/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cabm {

/// Parameters of one discrete-time run of the reacting particle system.
/// Particles diffuse with generator d^2/dx^2 (increment variance 2 dt); when
/// two neighbours meet they annihilate with probability theta, otherwise they
/// coalesce. Crossings inside a step are recovered with the Brownian-bridge
/// hitting probability exp(-d0 d1 / (2 dt)).
struct SimConfig {
  double theta = 0.0;
  double dt = 1e-2;
  double tEnd = 1.0;
};

void validateSimConfig(const SimConfig& cfg);

/// One Euler step of length dt: move, resolve reactions over pre-move
/// neighbour pairs left to right (a fresh survivor is not re-tested within
/// the same step), re-sort. xs must be sorted ascending.
void stepOnce(std::vector<double>& xs, double theta, double dt, Rng& rng);

/// Advances xs from time 0 to cfg.tEnd: floor(tEnd/dt) full steps plus one
/// remainder step if needed.
void evolve(std::vector<double>& xs, const SimConfig& cfg, Rng& rng);

struct TrajectoryFrame {
  double time = 0.0;
  std::vector<double> positions;
};

/// Full path of one replica, recording t = 0, every stride-th step, and the
/// final time.
std::vector<TrajectoryFrame> simulateTrajectory(std::vector<double> xs,
                                                const SimConfig& cfg, Rng& rng,
                                                int stride = 1);

/// Monte Carlo estimate with its standard error. Replica r of a run draws
/// from Rng::forReplica(seed, r), so the estimate depends only on
/// (seed, replicates, statistic), never on scheduling.
struct MCEstimate {
  double mean = 0.0;
  double stdError = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Averages statistic(rng, replica) over replicas with a fixed chunked
/// reduction order (chunks of 1024, combined in index order), parallel when
/// hardware allows.
MCEstimate monteCarloMean(std::uint64_t replicates, std::uint64_t seed,
                          const std::function<double(Rng&, std::uint64_t)>& statistic);

/// prod_i (-theta)^{#xs in (endpoints[2i], endpoints[2i+1])}.
double spinStatistic(std::span<const double> xs,
                     std::span<const double> endpoints, double theta);

/// MC estimate of E[ prod_i (-theta)^{N_tEnd(a_i, b_i)} ] for the system
/// started at init (sorted, coincident points allowed).
MCEstimate mcDualStatistic(const std::vector<double>& init, const SimConfig& cfg,
                           std::span<const double> endpoints,
                           std::uint64_t replicates, std::uint64_t seed);

/// P(N_tEnd = j) for j = 0..init.size(), each with its standard error.
struct SurvivorDistribution {
  std::vector<double> probability;
  std::vector<double> stdError;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};
SurvivorDistribution survivorDistribution(const std::vector<double>& init,
                                          const SimConfig& cfg,
                                          std::uint64_t replicates,
                                          std::uint64_t seed);

/// Mean bin counts: bin j covers [lo + j w, lo + (j+1) w). Dividing by w
/// estimates the one-point intensity at the bin centres.
struct BinnedCounts {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> mean;
  std::vector<double> stdError;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};
BinnedCounts binnedCounts(const std::vector<double>& init, const SimConfig& cfg,
                          double lo, double width, int bins,
                          std::uint64_t replicates, std::uint64_t seed);

/// MC estimate of E[N_A N_B] for two disjoint windows A = [a0,a1), B = [b0,b1);
/// estimates the integral of the pair intensity over A x B.
MCEstimate mcPairCount(const std::vector<double>& init, const SimConfig& cfg,
                       double a0, double a1, double b0, double b1,
                       std::uint64_t replicates, std::uint64_t seed);

/// MC estimate of E[ prod_p (1 - phi(X_p)) ] over final particles X_p, for a
/// step-function phi with values in [0,1) vanishing outside its breakpoints.
MCEstimate mcAvoidanceFunctional(const std::vector<double>& init,
                                 const SimConfig& cfg, const StepFunction& phi,
                                 std::uint64_t replicates, std::uint64_t seed);

/// Equally spaced particles covering [lo, hi]: the standard stand-in for the
/// fully occupied initial condition.
std::vector<double> latticeConfiguration(double lo, double hi, double spacing);

}  // namespace cabm
