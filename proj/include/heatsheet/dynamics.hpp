#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatsheet/potential.hpp"
#include "heatsheet/rng.hpp"
#include "heatsheet/spectral.hpp"

namespace heatsheet {

// Spectral state of the field: u_i(t,x) = sum_k a_{i,k} phi_k(x).
struct ModeState {
  int components = 0;
  int k_max = 0;
  double time = 0.0;
  std::vector<double> coeffs; // component-major, d x k_max

  double at(int i, int k1based) const {
    return coeffs[static_cast<std::size_t>(i) * k_max + (k1based - 1)];
  }
  double& at(int i, int k1based) {
    return coeffs[static_cast<std::size_t>(i) * k_max + (k1based - 1)];
  }
  Vec reconstruct(double x) const;
  bool all_finite() const;
};

// Decay factor of one heat mode over a step: exp(-pi^2 k^2 dt).
double ou_decay(int k, double dt);

// Exact distributional step of the k-th stochastic-convolution mode:
// decay * a + Normal(0, (1 - decay^2) / (2 lambda_k)).
double ou_mode_step(double a, int k, double dt, RngStream& rng);

// The noiseless part of the same step (pure heat decay).
double ou_mode_step_deterministic(double a, int k, double dt);

// Exact draw of the stochastic convolution v(t, .): independent modes with
// variance (1 - exp(-2 lambda_k t)) / (2 lambda_k).
ModeState sample_convolution(double t, int components, const Truncation& trunc, RngStream& rng);

// Space-time lattice record of one realization.
struct GridPath {
  int components = 0;
  int n_x = 0;
  int k_max = 0;
  double dt = 0.0;
  std::vector<double> times;  // n_times entries, times[0] = 0
  std::vector<double> values; // [time][node][component]

  // Seed provenance.
  std::uint64_t master_seed = 0;
  std::uint32_t replica = 0;
  std::string potential_label;

  // Per-step mode Brownian increments (steps x d x k_max), recorded only on
  // request; required by girsanov_weight.
  std::vector<double> noise_increments;

  int n_times() const { return static_cast<int>(times.size()); }
  double value(int n, int j, int i) const {
    return values[(static_cast<std::size_t>(n) * (n_x + 1) + j) * components + i];
  }
  double node_x(int j) const { return static_cast<double>(j) / n_x; }
  std::span<const double> frame(int n) const {
    const std::size_t stride = static_cast<std::size_t>(n_x + 1) * components;
    return {values.data() + n * stride, stride};
  }
  double frame_sup_norm(int n) const;
};

struct StepperOptions {
  int n_x = 128;
  double dt = 1e-3;
  bool noise_enabled = true;
  bool record_noise = false;
};

// Exponential-Euler integrator in mode space: exact linear decay, exact OU
// noise, explicit drift projected onto the sine basis by trapezoid quadrature
// on the spatial grid. Unconditionally stable; exact in distribution when the
// drift vanishes.
class FieldStepper {
public:
  FieldStepper(const SampledField& u0, const Potential& pot, const Truncation& trunc,
               const StepperOptions& opts, RngStream noise_stream);

  void step();

  double time() const { return static_cast<double>(steps_) * opts_.dt; }
  int steps_taken() const { return steps_; }
  int n_x() const { return opts_.n_x; }
  int components() const { return state_.components; }
  const ModeState& state() const { return state_; }
  // Current field values on the spatial grid, node-major (n_x+1) x d.
  std::span<const double> grid_values() const { return grid_values_; }
  double grid_sup_norm() const;
  // Mode Brownian increments of the last step (d x k_max); empty unless
  // record_noise was set.
  std::span<const double> last_noise_increments() const { return last_db_; }

private:
  void reconstruct_grid();
  void project_drift();

  StepperOptions opts_;
  const Potential* pot_;
  RngStream rng_;
  ModeState state_;
  std::shared_ptr<const PhiTable> phi_;
  int steps_ = 0;

  std::vector<double> decay_;      // per mode
  std::vector<double> noise_std_;  // per mode
  std::vector<double> drift_gain_; // per mode, (1 - decay)/lambda
  std::vector<double> db_slope_;   // Cov(xi, dB)/Var(xi)
  std::vector<double> db_resid_;   // std of dB residual given xi

  std::vector<double> grid_values_; // (n_x+1) x d
  std::vector<double> grad_buf_;    // (n_x+1) x d
  std::vector<double> drift_coeff_; // d x k_max
  std::vector<double> last_db_;     // d x k_max
};

struct IntegrateOptions {
  bool noise_enabled = true;
  bool record_noise = false;
};

// Runs the stepper to the horizon and records the field at every grid time.
// The u0 samples must vanish at the boundary; dt must not exceed 1e-2.
GridPath integrate(const SampledField& u0, const Potential& pot, double horizon, double dt,
                   const Truncation& trunc, int n_x, const StreamSet& streams,
                   const IntegrateOptions& opts = {});

// Path-space exponential-martingale likelihood ratio turning the law of a
// driftless path into the law of the drifted one:
//   exp( sum_n b^(t_n) . dB_n - 1/2 sum_n |b^(t_n)|^2 dt ),
// with b^ the trapezoid projection of grad U(u(t_n, .)) onto the sine modes,
// exactly the projection the drifted integrator injects.
double girsanov_weight(const GridPath& path, const Potential& pot);

// Flat binary layout: little-endian u64 d, n_x, n_times; f64 dt; then values
// row-major as little-endian f64.
void write_grid_path(const GridPath& path, std::ostream& os);
GridPath read_grid_path(std::istream& is);

} // namespace heatsheet
