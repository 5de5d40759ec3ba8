#pragma once

#include <vector>

#include "heatsheet/spectral.hpp"
#include "heatsheet/target.hpp"

namespace heatsheet {

// Riesz capacity Cap_beta via energy minimization over discrete probability
// measures, with the order conventions the hitting theorem relies on:
//   beta > 0 : kernel r^{-beta}
//   beta = 0 : kernel log_+(e/r)
//   beta < 0 : kernel 1, so every nonempty set has capacity exactly 1.
struct CapacityKernel {
  double beta = 1.0;

  double operator()(double r) const;
};

struct DiscreteMeasure {
  std::vector<Vec> support;
  Vec weights; // nonnegative, sums to 1
};

struct Discretization {
  std::vector<Vec> points;
  double covering_radius = 0.0;
};

// m points quasi-uniformly covering A. Boxes use an exact product lattice;
// balls, unions and other solids use greedy farthest-point thinning of a
// finer lattice intersected with A; point clouds pass through unchanged.
Discretization discretize_target(const TargetSet& target, int m);

struct EnergyResult {
  double energy = 0.0;
  DiscreteMeasure measure;
  int iterations = 0;
  double gap = 0.0; // final Frank-Wolfe duality gap
  bool converged = false;
};

// Minimizes mu^T K mu over the probability simplex by Frank-Wolfe with away
// steps and exact line search. Diagonal entries use kernel(cutoff).
EnergyResult min_energy(const std::vector<Vec>& points, double beta, double cutoff,
                        int max_iter = 10000, double relative_gap = 1e-6);

struct CapacityEstimate {
  double beta = 0.0;
  double value = 0.0;  // 1/energy for beta >= 0; 1 by convention for beta < 0
  double energy = 0.0; // NaN when the convention bypasses minimization
  int m = 0;
  int iterations = 0;
  double gap = 0.0;
  double covering_radius = 0.0;
};

CapacityEstimate cap(const TargetSet& target, double beta, int m);

} // namespace heatsheet
