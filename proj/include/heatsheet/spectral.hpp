#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "heatsheet/errors.hpp"

namespace heatsheet {

// Deterministic spectral kernel for the heat semigroup on [0,1] with
// Dirichlet boundary: Green kernel, variances, covariances and Gaussian
// densities of the stochastic convolution, all in the sine eigenbasis
//   phi_k(x) = sqrt(2) sin(k pi x),  lambda_k = pi^2 k^2.

using Vec = std::vector<double>;

struct SpaceTimePoint {
  double t = 0.0;
  double x = 0.0;
};

inline double eigenvalue(int k) {
  return M_PI * M_PI * static_cast<double>(k) * static_cast<double>(k);
}

// sqrt(2) sin(k pi x). Exactly zero at integer x so that reconstructions pin
// the Dirichlet boundary bit-exactly.
inline double phi(int k, double x) {
  if (x == std::floor(x)) return 0.0;
  return M_SQRT2 * std::sin(static_cast<double>(k) * M_PI * x);
}

// Retained-mode count plus the smallest time at which the truncated series
// is certified accurate. Every kernel/density evaluator checks the analytic
// tail bound and raises PrecisionError instead of silently truncating.
class Truncation {
public:
  explicit Truncation(int k_max = 128, double t_min = 1e-3);

  int k_max() const { return k_max_; }
  double t_min() const { return t_min_; }

  // Upper bound for sum_{k > k_max} exp(-pi^2 k^2 t).
  double tail_bound(double t) const;

  // Throws PrecisionError if the kernel series tail at time t exceeds 1e-14.
  void require_resolved(double t) const;

  static constexpr double kTailTolerance = 1e-14;

private:
  int k_max_;
  double t_min_;
};

// d-component continuous function on [0,1] given by samples at uniform nodes
// x_j = j/(n-1), j = 0..n-1. Node count must be odd (composite Simpson).
class SampledField {
public:
  SampledField(int components, int nodes);

  static SampledField zero(int components, int nodes);
  // u0_i(x) = amplitudes[i] * sin(pi x)
  static SampledField sine(const Vec& amplitudes, int nodes);
  // u0_i(x) = amplitudes[i] * 4 x (1-x)
  static SampledField parabola(const Vec& amplitudes, int nodes);
  static SampledField from_function(int components, int nodes,
                                    const std::function<void(double, std::span<double>)>& f);

  int components() const { return d_; }
  int nodes() const { return nodes_; }
  double node_x(int j) const { return static_cast<double>(j) / (nodes_ - 1); }
  double at(int j, int i) const { return values_[static_cast<std::size_t>(j) * d_ + i]; }
  double& at(int j, int i) { return values_[static_cast<std::size_t>(j) * d_ + i]; }
  double sup_norm() const;

private:
  int d_;
  int nodes_;
  std::vector<double> values_; // node-major
};

// Sine coefficients <u_i, phi_k>, component-major.
struct SineCoefficients {
  int components = 0;
  int k_max = 0;
  std::vector<double> a;

  double at(int i, int k1based) const {
    return a[static_cast<std::size_t>(i) * k_max + (k1based - 1)];
  }
  double& at(int i, int k1based) {
    return a[static_cast<std::size_t>(i) * k_max + (k1based - 1)];
  }
};

// Composite-Simpson projection of grid samples onto the first k_max modes.
SineCoefficients project_sine(const SampledField& u, int k_max);

// Cached phi_k(x_j) for a uniform grid of n_x+1 nodes; row j is contiguous.
class PhiTable {
public:
  PhiTable(int n_x, int k_max);
  int n_x() const { return n_x_; }
  int k_max() const { return k_max_; }
  std::span<const double> row(int j) const {
    return {values_.data() + static_cast<std::size_t>(j) * k_max_,
            static_cast<std::size_t>(k_max_)};
  }

private:
  int n_x_;
  int k_max_;
  std::vector<double> values_;
};

// Process-wide memoized tables; hot paths build each (n_x, k_max) pair once.
// Thread-safe, so the pure evaluators stay safe for concurrent callers.
std::shared_ptr<const PhiTable> shared_phi_table(int n_x, int k_max);

// G(t,x,y) = sum_k exp(-pi^2 k^2 t) phi_k(x) phi_k(y), t > 0.
double green_kernel(const SpaceTimePoint& p, double y, const Truncation& trunc);

// lambda(t,x): heat semigroup applied to u0, one value per component.
Vec semigroup_apply(const SineCoefficients& u0, double t, double x);
Vec semigroup_apply(const SampledField& u0, double t, double x, const Truncation& trunc);

// Var(u_i(t,x)) of the stochastic convolution, closed form.
double sigma2(double t, double x, const Truncation& trunc);

// lim_{t->inf} sigma2(t,x) = x(1-x)/2.
double stationary_variance(double x);

// Cov(v_i(t,x), v_i(s,y)) of the stochastic convolution.
double cov_v(double t, double x, double s, double y, const Truncation& trunc);

struct GaussianMarginal {
  Vec mean;        // lambda(t,x)
  double variance; // sigma2(t,x), identical across components
};

GaussianMarginal marginal(const SpaceTimePoint& p, const SineCoefficients& u0,
                          const Truncation& trunc);

// Density of u(t,x) at z for the drift-free equation: Gaussian with mean
// lambda(t,x) and covariance sigma2(t,x) * I.
double marginal_density(const SpaceTimePoint& p, const SineCoefficients& u0,
                        const Vec& z, const Truncation& trunc);

// Joint density of (v(t,x), v(s,y)) at (z1, z2): product over components of
// bivariate Gaussians assembled from sigma2 and cov_v.
double joint_density_v(const SpaceTimePoint& p1, const SpaceTimePoint& p2,
                       const Vec& z1, const Vec& z2, const Truncation& trunc);

// |t-s|^{1/2} + |x-y|.
double parabolic_metric(const SpaceTimePoint& p1, const SpaceTimePoint& p2);

} // namespace heatsheet
