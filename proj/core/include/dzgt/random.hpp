#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "dzgt/errors.hpp"

namespace dzgt {

/// All stochastic code draws from this engine type.
using Rng = std::mt19937_64;

/// One round of the splitmix64 output function (Steele, Lea & Flood 2014).
/// Used as the mixing primitive for counter-based seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a master seed and a coordinate path by hashing
/// each coordinate into the running state with splitmix64. Distinct paths give
/// (for all practical purposes) independent seeds; equal paths give equal seeds.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Fresh engine seeded from derive_seed(master, path).
Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Fixed role tags so per-agent noise, sphere directions, lower-level noise,
/// and evaluation draws come from non-overlapping substreams of the run seed.
enum class StreamRole : std::uint64_t {
  kInitIterate = 1,      // initial upper iterates x_{i,0}
  kUpperNoise = 2,       // xi draws for the two-point objective samples
  kSphereDirection = 3,  // random sphere directions v
  kLowerNoiseAtX = 4,    // zeta stream for the inner solve at x
  kLowerNoiseAtShifted = 5,  // zeta stream for the inner solve at x + v
  kEvalLower = 6,        // zeta stream for evaluation-time inner solves
  kEvalObjective = 7,    // xi stream for evaluation-time objective averaging
  kResidual = 8,         // zeta stream for natural-residual estimation
  kLipschitzProbe = 9,   // draws for numeric Lipschitz-constant estimation
};

/// Engine for (run, epoch, agent, role). Each agent at each epoch owns disjoint
/// streams per role, which is how the independence assumptions on xi / zeta and
/// the sampling directions are realized.
Rng agent_stream(std::uint64_t run_seed, long epoch, int agent, StreamRole role);

/// Single N(0,1) draw. A fresh std::normal_distribution is constructed per call
/// so the value is a pure function of the engine state (no distribution-internal
/// caching), which keeps replays and stream-splitting exact.
double standard_normal(Rng& rng);

/// Scalar Gaussian noise description for the oracle randomness (xi or zeta).
/// std_dev == 0 degenerates to the deterministic value `mean` without touching
/// the engine, so zero-variance runs consume no randomness from that stream.
struct NoiseModel {
  double mean = 0.0;
  double std_dev = 1.0;
  std::uint64_t stream_id = 0;  // label only; callers pick the engine

  static NoiseModel normal(double mean, double std_dev, std::uint64_t stream_id = 0);

  double draw(Rng& rng) const {
    if (std_dev == 0.0) return mean;
    return mean + std_dev * standard_normal(rng);
  }
};

}  // namespace dzgt
