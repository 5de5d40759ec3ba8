#include "heatsheet/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatsheet/errors.hpp"
#include "heatsheet/parallel.hpp"

namespace heatsheet {

namespace {

// Node index range covered by [x0, x1] on a grid of n_x cells.
void node_range(double x0, double x1, int n_x, int& j_lo, int& j_hi) {
  j_lo = static_cast<int>(std::ceil(x0 * n_x - 1e-9));
  j_hi = static_cast<int>(std::floor(x1 * n_x + 1e-9));
  j_lo = std::max(j_lo, 0);
  j_hi = std::min(j_hi, n_x);
  if (j_lo > j_hi) throw DomainError("window.x selects no grid nodes");
}

class FieldProcess : public ExcursionProcess {
public:
  FieldProcess(const ExperimentConfig& cfg, const TargetSet* target, const StreamSet& streams)
      : stepper_(cfg.u0.make(cfg.d, cfg.u0_nodes()), cfg.potential, cfg.truncation(),
                 StepperOptions{cfg.n_x, cfg.dt, true, false}, streams.stream("noise")),
        target_(target) {
    node_range(cfg.window.x0, cfg.window.x1, cfg.n_x, j_lo_, j_hi_);
  }

  double advance() override {
    stepper_.step();
    return stepper_.grid_sup_norm();
  }
  double time() const override { return stepper_.time(); }
  double sup_norm() const override { return stepper_.grid_sup_norm(); }
  bool hit_now() const override {
    if (target_ == nullptr) return false;
    const auto values = stepper_.grid_values();
    const int d = stepper_.components();
    for (int j = j_lo_; j <= j_hi_; ++j) {
      if (target_->contains(values.subspan(static_cast<std::size_t>(j) * d, d))) return true;
    }
    return false;
  }

private:
  FieldStepper stepper_;
  const TargetSet* target_;
  int j_lo_ = 0, j_hi_ = 0;
};

} // namespace

SampledField U0Spec::make(int components, int nodes) const {
  switch (kind) {
    case Kind::Zero:
      return SampledField::zero(components, nodes);
    case Kind::Sine:
      if (static_cast<int>(amplitudes.size()) != components) {
        throw ConfigError("u0.amplitudes size must equal d");
      }
      return SampledField::sine(amplitudes, nodes);
    case Kind::Parabola:
      if (static_cast<int>(amplitudes.size()) != components) {
        throw ConfigError("u0.amplitudes size must equal d");
      }
      return SampledField::parabola(amplitudes, nodes);
  }
  return SampledField::zero(components, nodes);
}

double U0Spec::sup_norm_bound() const {
  if (kind == Kind::Zero) return 0.0;
  double m = 0.0;
  for (double a : amplitudes) m = std::max(m, std::abs(a));
  return m;
}

void ExperimentConfig::validate_excursions() const {
  const double required = inner_n + 2.0 * potential.grad_sup();
  if (!(outer_k > required)) {
    throw ConfigError("radii.outer_k must exceed radii.inner_n + 2*grad_sup = " +
                      std::to_string(required));
  }
  if (u0.sup_norm_bound() > inner_n + 1e-12) {
    throw ConfigError("u0 must start inside the closed N-ball (|u0|_inf <= radii.inner_n)");
  }
}

void ExperimentConfig::validate_target(const TargetSet& target) const {
  if (target.dimension() != d) {
    throw ConfigError("target dimension " + std::to_string(target.dimension()) +
                      " does not match d = " + std::to_string(d));
  }
  Vec lo, hi;
  target.bounding_box(lo, hi);
  for (int i = 0; i < d; ++i) {
    if (lo[i] < -box_m - 1e-12 || hi[i] > box_m + 1e-12) {
      throw ConfigError("target must fit inside [-M, M]^d with M = " + std::to_string(box_m));
    }
  }
}

HitDetection detect_hit(const GridPath& path, const TargetSet& target,
                        const SpaceTimeWindow& window) {
  if (window.t0 < path.times.front() - 1e-12 || window.t1 > path.times.back() + 1e-12) {
    throw DomainError("window lies outside the simulated time span");
  }
  int j_lo, j_hi;
  node_range(window.x0, window.x1, path.n_x, j_lo, j_hi);

  HitDetection det;
  const int d = path.components;
  for (int n = 0; n < path.n_times(); ++n) {
    const double t = path.times[n];
    if (t < window.t0 - 1e-12 || t > window.t1 + 1e-12) continue;
    for (int j = j_lo; j <= j_hi; ++j) {
      const std::size_t off = (static_cast<std::size_t>(n) * (path.n_x + 1) + j) * d;
      const std::span<const double> z(path.values.data() + off, d);
      const double dist = target.distance(z);
      det.min_distance = std::min(det.min_distance, dist);
      if (!det.hit && dist == 0.0) {
        det.hit = true;
        det.first_t = t;
        det.first_x = path.node_x(j);
      }
    }
  }
  return det;
}

HittingExperiment hitting_probability(const ExperimentConfig& cfg, const TargetSet& target,
                                      const SpaceTimeWindow& window) {
  cfg.validate_target(target);
  const Truncation trunc = cfg.truncation();
  int j_lo, j_hi;
  node_range(window.x0, window.x1, cfg.n_x, j_lo, j_hi);
  const int steps = static_cast<int>(std::llround(window.t1 / cfg.dt));
  const int n = static_cast<int>(cfg.n_trials);

  HittingExperiment out;
  out.trials.resize(n);

  parallel_for(n, cfg.workers, [&](int trial) {
    StreamSet streams(cfg.master_seed, static_cast<std::uint32_t>(trial));
    FieldStepper stepper(cfg.u0.make(cfg.d, cfg.u0_nodes()), cfg.potential, trunc,
                         StepperOptions{cfg.n_x, cfg.dt, true, false}, streams.stream("noise"));
    TrialRecord rec;
    rec.trial = trial;
    for (int s = 1; s <= steps; ++s) {
      stepper.step();
      const double t = stepper.time();
      if (t < window.t0 - 1e-12) continue;
      const auto values = stepper.grid_values();
      for (int j = j_lo; j <= j_hi; ++j) {
        const std::span<const double> z =
            values.subspan(static_cast<std::size_t>(j) * cfg.d, cfg.d);
        const double dist = target.distance(z);
        rec.min_distance = std::min(rec.min_distance, dist);
        if (!rec.hit && dist == 0.0) {
          rec.hit = true;
          rec.first_hit_time = t;
        }
      }
    }
    out.trials[trial] = rec;
  });

  HittingEstimate& est = out.estimate;
  est.n_trials = n;
  est.window = window;
  std::vector<double> min_dists;
  min_dists.reserve(n);
  for (const TrialRecord& r : out.trials) {
    if (r.hit) ++est.n_hits;
    min_dists.push_back(r.min_distance);
  }
  est.p_hat = static_cast<double>(est.n_hits) / static_cast<double>(n);
  est.wilson = wilson_interval(est.n_hits, n);
  est.min_distance_histogram =
      make_histogram(min_dists, 0.0, 2.0 * cfg.box_m * std::sqrt(cfg.d), 32);
  est.capacity_beta = static_cast<double>(cfg.d) - 6.0;
  est.capacity_value = cap(target, est.capacity_beta, cfg.capacity_m).value;
  est.holder_epsilon = cfg.holder_epsilon;
  return out;
}

ExcursionRecord excursions(const ExperimentConfig& cfg, const StreamSet& streams) {
  cfg.validate_excursions();
  FieldProcess process(cfg, nullptr, streams);

  ExcursionRecord rec;
  rec.inner_n = cfg.inner_n;
  rec.outer_k = cfg.outer_k;
  bool awaiting_exit = true; // alternates: exit above K, then return below N
  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  for (int s = 1; s <= steps; ++s) {
    const double norm = process.advance();
    if (awaiting_exit && norm >= cfg.outer_k) {
      rec.t_crossings.push_back(process.time());
      awaiting_exit = false;
    } else if (!awaiting_exit && norm <= cfg.inner_n) {
      rec.s_crossings.push_back(process.time());
      awaiting_exit = true;
      ++rec.completed;
    }
  }
  rec.end_time = process.time();
  rec.censored = rec.completed == 0 || !awaiting_exit;
  return rec;
}

OrchestratorRun run_restart_orchestrator(ExcursionProcess& process,
                                         const OrchestratorOptions& opts) {
  OrchestratorRun run;
  run.record.inner_n = opts.inner_n;
  run.record.outer_k = opts.outer_k;
  double restart_time = process.time();
  const double eps = 1e-9;

  auto censor = [&] {
    run.censored = true;
    run.record.censored = true;
    run.record.end_time = process.time();
    return run;
  };

  for (int k = 1; k <= opts.max_excursions; ++k) {
    const double window_lo = restart_time + 1.0;
    const double window_hi = restart_time + 2.0;
    bool window_hit = false;
    run.excursions_used = k;

    // Advance until the K-exit, scanning the detection window on the way.
    // The window closes at the exit time: detection lives inside
    // [S_{k-1}, T_k], so an early exit truncates or suppresses it.
    double t_exit;
    while (true) {
      if (process.time() >= opts.horizon - eps) {
        run.per_excursion_hit.push_back(window_hit ? 1 : 0);
        return censor();
      }
      const double norm = process.advance();
      const double t = process.time();
      if (t >= window_lo - eps && t <= window_hi + eps && !window_hit && process.hit_now()) {
        window_hit = true;
        run.hit = true;
        if (std::isnan(run.first_hit_time)) run.first_hit_time = t;
        if (opts.stop_on_hit) {
          run.per_excursion_hit.push_back(1);
          run.record.end_time = t;
          return run;
        }
      }
      if (norm >= opts.outer_k) {
        t_exit = t;
        break;
      }
    }

    run.per_excursion_hit.push_back(window_hit ? 1 : 0);

    // Return below N; the restart state of the next excursion.
    double s_return;
    while (true) {
      if (process.time() >= opts.horizon - eps) return censor();
      if (process.advance() <= opts.inner_n) {
        s_return = process.time();
        break;
      }
    }
    run.record.t_crossings.push_back(t_exit);
    run.record.s_crossings.push_back(s_return);
    ++run.record.completed;
    restart_time = s_return;
  }
  run.record.end_time = process.time();
  return run;
}

HitUntilSuccessResult hit_until_success(const ExperimentConfig& cfg, const TargetSet& target,
                                        int max_excursions, const StreamSet& streams) {
  cfg.validate_excursions();
  cfg.validate_target(target);
  FieldProcess process(cfg, &target, streams);
  OrchestratorOptions opts;
  opts.inner_n = cfg.inner_n;
  opts.outer_k = cfg.outer_k;
  opts.horizon = cfg.horizon;
  opts.max_excursions = max_excursions;
  opts.stop_on_hit = true;
  const OrchestratorRun run = run_restart_orchestrator(process, opts);

  HitUntilSuccessResult res;
  res.hit = run.hit;
  res.excursions_used = run.excursions_used;
  res.per_excursion_hit = run.per_excursion_hit;
  res.first_hit_time = run.first_hit_time;
  res.record = run.record;
  res.censored = run.censored;
  return res;
}

TargetSet compact_core(const TargetSet& target, double fraction, double beta, int m) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DomainError("compact_core requires fraction in (0,1)");
  }
  if (beta < 0.0) return target; // capacity 1 for every nonempty shrink
  if (target.kind() == TargetSet::Kind::PointCloud) return target;

  const double base = cap(target, beta, m).value;
  if (!(base > 0.0) || !std::isfinite(base)) return target;

  double s = beta > 0.0 ? std::pow(fraction, 1.0 / beta) : fraction;
  for (int step = 0; step < 20; ++step) {
    const TargetSet shrunk = target.scaled(s);
    const double value = cap(shrunk, beta, m).value;
    if (value >= fraction * base) return shrunk;
    s = 0.5 * (s + 1.0);
  }
  throw ApproximationError("compact_core: could not reach capacity fraction " +
                           std::to_string(fraction) + " after 20 bisection steps");
}

} // namespace heatsheet
