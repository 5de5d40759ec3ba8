#pragma once

#include <string>
#include <vector>

#include "heatsheet/spectral.hpp"

namespace heatsheet {

struct VerifyCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Independent quadrature of the defining variance integral
// int_0^t int_0^1 G(t-r, x, v)^2 dv dr: composite Simpson over v (aliasing-
// exact for the truncated kernel at 1024 intervals), geometrically graded
// composite Simpson in t-r to resolve the short-time boundary layer.
double sigma2_by_quadrature(double t, double x, const Truncation& trunc,
                            int v_intervals = 1024, int tau_levels = 48,
                            int tau_intervals_per_level = 128);

// Simpson quadrature of int_0^1 G(s,x,z) G(t,z,y) dz.
double chapman_kolmogorov_quadrature(double s, double t, double x, double y,
                                     const Truncation& trunc, int intervals = 1024);

// Deterministic closed-form invariant suite (Chapman-Kolmogorov, sigma^2
// cross-checks, F/H series checks, boundary and symmetry pins).
std::vector<VerifyCheck> run_verify_suite();

} // namespace heatsheet
