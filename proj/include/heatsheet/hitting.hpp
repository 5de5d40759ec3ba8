#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "heatsheet/capacity.hpp"
#include "heatsheet/dynamics.hpp"
#include "heatsheet/potential.hpp"
#include "heatsheet/rng.hpp"
#include "heatsheet/stats.hpp"
#include "heatsheet/target.hpp"

namespace heatsheet {

// Space-time window I x J.
struct SpaceTimeWindow {
  double t0 = 1.0;
  double t1 = 2.0;
  double x0 = 0.2;
  double x1 = 0.8;
};

// Initial-data recipe; realized on a requested node grid.
struct U0Spec {
  enum class Kind { Zero, Sine, Parabola };
  Kind kind = Kind::Zero;
  Vec amplitudes; // per component; unused for Zero

  SampledField make(int components, int nodes) const;
  double sup_norm_bound() const;
};

struct ExperimentConfig {
  int d = 1;
  Potential potential = Potential::zero(1);
  U0Spec u0;
  double inner_n = 1.0; // N: restart radius
  double outer_k = 1.5; // K: exit radius
  double box_m = 2.0;   // M: target bounding-box scale
  SpaceTimeWindow window;
  double horizon = 50.0;
  double dt = 1e-3;
  int n_x = 128;
  int k_max = 128;
  double t_min = 1e-3;
  std::int64_t n_trials = 2000;
  std::uint64_t master_seed = 20260809;
  int workers = 1;
  double holder_epsilon = 0.1; // report-only exponent of the capacity lower bound
  int max_excursions = 20;
  int capacity_m = 500;

  Truncation truncation() const { return Truncation(k_max, t_min); }
  // Node count for alias-free Simpson projection of u0 onto k_max modes.
  int u0_nodes() const { return std::max(2 * k_max + 1, n_x + 1); }
  // Throws ConfigError when the excursion invariants are violated
  // (K > N + 2 |grad U|_inf, u0 inside the N-ball).
  void validate_excursions() const;
  // Throws ConfigError unless the target's bounding box fits in [-M, M]^d.
  void validate_target(const TargetSet& target) const;
};

struct HitDetection {
  bool hit = false;
  double min_distance = std::numeric_limits<double>::infinity();
  double first_t = std::numeric_limits<double>::quiet_NaN();
  double first_x = std::numeric_limits<double>::quiet_NaN();
};

// Grid-based hit test over a window of a recorded path; also reports the
// minimum distance to the target for discretization-bias diagnostics.
HitDetection detect_hit(const GridPath& path, const TargetSet& target,
                        const SpaceTimeWindow& window);

struct TrialRecord {
  std::int64_t trial = 0;
  bool hit = false;
  double first_hit_time = std::numeric_limits<double>::quiet_NaN();
  double min_distance = std::numeric_limits<double>::infinity();
  int excursions_used = 0;
};

struct HittingEstimate {
  std::int64_t n_trials = 0;
  std::int64_t n_hits = 0;
  double p_hat = 0.0;
  WilsonInterval wilson;
  SpaceTimeWindow window;
  Histogram min_distance_histogram;
  double capacity_beta = 0.0;
  double capacity_value = 0.0;
  double holder_epsilon = 0.0;
};

struct HittingExperiment {
  HittingEstimate estimate;
  std::vector<TrialRecord> trials;
};

// Monte Carlo window-hitting probability: independent paths from u0, grid
// hit detection, Wilson interval, and the capacity of the target at order
// d - 6 reported alongside.
HittingExperiment hitting_probability(const ExperimentConfig& cfg, const TargetSet& target,
                                      const SpaceTimeWindow& window);

// Crossing record of one path: T_k = first grid time with sup-norm >= K
// after S_{k-1}, S_k = first grid time with sup-norm <= N after T_k.
struct ExcursionRecord {
  double inner_n = 0.0;
  double outer_k = 0.0;
  std::vector<double> t_crossings; // T_1, T_2, ...
  std::vector<double> s_crossings; // S_1, S_2, ...
  int completed = 0;
  bool censored = false; // horizon reached before the next crossing
  double end_time = 0.0;
};

ExcursionRecord excursions(const ExperimentConfig& cfg, const StreamSet& streams);

// Minimal process interface driven by the restart orchestrator. advance()
// moves one grid step and returns the new sup-norm; hit_now() tests the
// current state against the target (only consulted inside detection windows).
class ExcursionProcess {
public:
  virtual ~ExcursionProcess() = default;
  virtual double advance() = 0;
  virtual double time() const = 0;
  virtual double sup_norm() const = 0;
  virtual bool hit_now() const = 0;
};

struct OrchestratorOptions {
  double inner_n = 1.0;
  double outer_k = 1.5;
  double horizon = 50.0;
  int max_excursions = 20;
  bool stop_on_hit = true;
};

struct OrchestratorRun {
  bool hit = false;
  int excursions_used = 0;
  std::vector<char> per_excursion_hit;
  double first_hit_time = std::numeric_limits<double>::quiet_NaN();
  ExcursionRecord record;
  bool censored = false;
};

// The proof-shaped restart loop: per excursion, scan the detection window
// [S_{k-1}+1, S_{k-1}+2], then wait for the exit above K and the return
// below N before restarting.
OrchestratorRun run_restart_orchestrator(ExcursionProcess& process,
                                         const OrchestratorOptions& opts);

struct HitUntilSuccessResult {
  bool hit = false;
  int excursions_used = 0;
  std::vector<char> per_excursion_hit;
  double first_hit_time = std::numeric_limits<double>::quiet_NaN();
  ExcursionRecord record;
  bool censored = false;
};

HitUntilSuccessResult hit_until_success(const ExperimentConfig& cfg, const TargetSet& target,
                                        int max_excursions, const StreamSet& streams);

// Closed contraction of A whose estimated Cap_beta is at least
// fraction * Cap_beta(A); mirrors the compact approximation of the proof.
TargetSet compact_core(const TargetSet& target, double fraction, double beta, int m = 500);

} // namespace heatsheet
