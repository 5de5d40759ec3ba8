#include "heatsheet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "heatsheet/errors.hpp"

namespace heatsheet {

namespace {

constexpr double kMaxDt = 1e-2;

void write_le_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_le_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  write_le_u64(os, u);
}

std::uint64_t read_le_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double read_le_f64(std::istream& is) {
  const std::uint64_t u = read_le_u64(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

} // namespace

Vec ModeState::reconstruct(double x) const {
  Vec out(components, 0.0);
  for (int k = k_max; k >= 1; --k) {
    const double p = phi(k, x);
    for (int i = 0; i < components; ++i) out[i] += at(i, k) * p;
  }
  return out;
}

bool ModeState::all_finite() const {
  for (double a : coeffs) {
    if (!std::isfinite(a)) return false;
  }
  return true;
}

double ou_decay(int k, double dt) { return std::exp(-eigenvalue(k) * dt); }

double ou_mode_step_deterministic(double a, int k, double dt) {
  return ou_decay(k, dt) * a;
}

double ou_mode_step(double a, int k, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw DomainError("ou_mode_step requires dt > 0");
  const double lam = eigenvalue(k);
  const double sd = std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam));
  return ou_decay(k, dt) * a + sd * rng.normal();
}

ModeState sample_convolution(double t, int components, const Truncation& trunc, RngStream& rng) {
  if (!(t > 0.0)) throw DomainError("sample_convolution requires t > 0");
  ModeState s;
  s.components = components;
  s.k_max = trunc.k_max();
  s.time = t;
  s.coeffs.resize(static_cast<std::size_t>(components) * trunc.k_max());
  for (int i = 0; i < components; ++i) {
    for (int k = 1; k <= trunc.k_max(); ++k) {
      const double lam = eigenvalue(k);
      const double sd = std::sqrt(-std::expm1(-2.0 * lam * t) / (2.0 * lam));
      s.at(i, k) = sd * rng.normal();
    }
  }
  return s;
}

double GridPath::frame_sup_norm(int n) const {
  double m = 0.0;
  for (double v : frame(n)) m = std::max(m, std::abs(v));
  return m;
}

FieldStepper::FieldStepper(const SampledField& u0, const Potential& pot,
                           const Truncation& trunc, const StepperOptions& opts,
                           RngStream noise_stream)
    : opts_(opts), pot_(&pot), rng_(noise_stream),
      phi_(shared_phi_table(opts.n_x, trunc.k_max())) {
  pot.require_certified();
  if (pot.dimension() != u0.components()) {
    throw ConfigError("potential dimension " + std::to_string(pot.dimension()) +
                      " does not match field components " + std::to_string(u0.components()));
  }
  if (!(opts.dt > 0.0) || opts.dt > kMaxDt) {
    throw ConfigError("stepper.dt must lie in (0, 1e-2], got " + std::to_string(opts.dt));
  }
  if (opts.n_x < 2) throw ConfigError("stepper.n_x must be >= 2");
  if (std::abs(u0.at(0, 0)) > 1e-12 ||
      std::abs(u0.at(u0.nodes() - 1, 0)) > 1e-12) {
    throw ConfigError("initial data must vanish at the boundary");
  }

  state_.components = u0.components();
  state_.k_max = trunc.k_max();
  state_.time = 0.0;
  state_.coeffs = project_sine(u0, trunc.k_max()).a;

  const int K = state_.k_max;
  decay_.resize(K);
  noise_std_.resize(K);
  drift_gain_.resize(K);
  db_slope_.resize(K);
  db_resid_.resize(K);
  for (int k = 1; k <= K; ++k) {
    const double lam = eigenvalue(k);
    const double dt = opts_.dt;
    const double dec = std::exp(-lam * dt);
    const double var = -std::expm1(-2.0 * lam * dt) / (2.0 * lam);
    const double cov = -std::expm1(-lam * dt) / lam; // Cov(xi, dB)
    decay_[k - 1] = dec;
    noise_std_[k - 1] = std::sqrt(var);
    drift_gain_[k - 1] = cov;
    db_slope_[k - 1] = cov / var;
    // Var(dB | xi) = dt - cov^2/var = (2/lam) (lam dt/2 - tanh(lam dt/2)).
    db_resid_[k - 1] = std::sqrt((2.0 / lam) * (lam * dt / 2.0 - std::tanh(lam * dt / 2.0)));
  }

  grid_values_.assign(static_cast<std::size_t>(opts_.n_x + 1) * state_.components, 0.0);
  grad_buf_.assign(grid_values_.size(), 0.0);
  drift_coeff_.assign(static_cast<std::size_t>(state_.components) * K, 0.0);
  if (opts_.record_noise) last_db_.assign(drift_coeff_.size(), 0.0);
  reconstruct_grid();
}

void FieldStepper::reconstruct_grid() {
  const int K = state_.k_max;
  const int d = state_.components;
  for (int j = 1; j < opts_.n_x; ++j) {
    const double* prow = phi_->row(j).data();
    for (int i = 0; i < d; ++i) {
      const double* c = state_.coeffs.data() + static_cast<std::size_t>(i) * K;
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += c[k] * prow[k];
      grid_values_[static_cast<std::size_t>(j) * d + i] = acc;
    }
  }
  // Dirichlet boundary rows stay exactly zero.
}

void FieldStepper::project_drift() {
  const int K = state_.k_max;
  const int d = state_.components;
  const int n_x = opts_.n_x;
  const double dx = 1.0 / n_x;

  for (int j = 0; j <= n_x; ++j) {
    const double* z = grid_values_.data() + static_cast<std::size_t>(j) * d;
    double* g = grad_buf_.data() + static_cast<std::size_t>(j) * d;
    pot_->gradient(std::span<const double>(z, d), std::span<double>(g, d));
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(g[i])) {
        throw IntegrationError("drift evaluation produced NaN at step " +
                               std::to_string(steps_) + ", node " + std::to_string(j));
      }
      if (std::abs(g[i]) > pot_->grad_sup() + 1e-9) {
        throw IntegrationError("drift magnitude " + std::to_string(std::abs(g[i])) +
                               " exceeds certified grad_sup at step " + std::to_string(steps_));
      }
    }
  }

  std::fill(drift_coeff_.begin(), drift_coeff_.end(), 0.0);
  // Trapezoid rule; phi vanishes at both boundary nodes.
  for (int j = 1; j < n_x; ++j) {
    const double* prow = phi_->row(j).data();
    const double* g = grad_buf_.data() + static_cast<std::size_t>(j) * d;
    for (int i = 0; i < d; ++i) {
      double* bc = drift_coeff_.data() + static_cast<std::size_t>(i) * K;
      const double gi = g[i] * dx;
      for (int k = 0; k < K; ++k) bc[k] += gi * prow[k];
    }
  }
}

void FieldStepper::step() {
  const int K = state_.k_max;
  const int d = state_.components;
  const bool drifted = !pot_->is_zero();
  if (drifted) project_drift();

  for (int i = 0; i < d; ++i) {
    double* c = state_.coeffs.data() + static_cast<std::size_t>(i) * K;
    const double* bc = drift_coeff_.data() + static_cast<std::size_t>(i) * K;
    double* db = opts_.record_noise ? last_db_.data() + static_cast<std::size_t>(i) * K : nullptr;
    for (int k = 0; k < K; ++k) {
      double xi = 0.0;
      if (opts_.noise_enabled) {
        xi = noise_std_[k] * rng_.normal();
        if (opts_.record_noise) {
          db[k] = db_slope_[k] * xi + db_resid_[k] * rng_.normal();
        }
      } else if (opts_.record_noise) {
        db[k] = 0.0;
      }
      c[k] = decay_[k] * c[k] + (drifted ? drift_gain_[k] * bc[k] : 0.0) + xi;
      if (!std::isfinite(c[k])) {
        throw IntegrationError("mode coefficient became non-finite at step " +
                               std::to_string(steps_));
      }
    }
  }
  ++steps_;
  reconstruct_grid();
}

double FieldStepper::grid_sup_norm() const {
  double m = 0.0;
  for (double v : grid_values_) m = std::max(m, std::abs(v));
  return m;
}

GridPath integrate(const SampledField& u0, const Potential& pot, double horizon, double dt,
                   const Truncation& trunc, int n_x, const StreamSet& streams,
                   const IntegrateOptions& opts) {
  if (!(horizon > 0.0)) throw ConfigError("integrate horizon must be > 0");
  StepperOptions sopts;
  sopts.n_x = n_x;
  sopts.dt = dt;
  sopts.noise_enabled = opts.noise_enabled;
  sopts.record_noise = opts.record_noise;
  FieldStepper stepper(u0, pot, trunc, sopts, streams.stream("noise"));

  const int steps = static_cast<int>(std::llround(horizon / dt));
  const int d = u0.components();
  GridPath path;
  path.components = d;
  path.n_x = n_x;
  path.k_max = trunc.k_max();
  path.dt = dt;
  path.master_seed = streams.master();
  path.replica = streams.replica();
  path.potential_label = pot.label();
  path.times.resize(steps + 1);
  path.values.resize(static_cast<std::size_t>(steps + 1) * (n_x + 1) * d);
  if (opts.record_noise) {
    path.noise_increments.reserve(static_cast<std::size_t>(steps) * d * trunc.k_max());
  }

  auto record_frame = [&](int n) {
    path.times[n] = static_cast<double>(n) * dt;
    const auto g = stepper.grid_values();
    std::copy(g.begin(), g.end(),
              path.values.begin() + static_cast<std::size_t>(n) * (n_x + 1) * d);
  };
  record_frame(0);
  for (int n = 1; n <= steps; ++n) {
    stepper.step();
    record_frame(n);
    if (opts.record_noise) {
      const auto db = stepper.last_noise_increments();
      path.noise_increments.insert(path.noise_increments.end(), db.begin(), db.end());
    }
  }
  return path;
}

double girsanov_weight(const GridPath& path, const Potential& pot) {
  if (pot.is_zero()) return 1.0;
  pot.require_certified();
  if (path.potential_label != "zero") {
    throw StateError("girsanov_weight requires a path generated under the zero potential");
  }
  const int steps = path.n_times() - 1;
  const int d = path.components;
  const int K = path.k_max;
  if (path.noise_increments.size() != static_cast<std::size_t>(steps) * d * K) {
    throw StateError("girsanov_weight requires recorded noise increments");
  }
  const auto phi_table = shared_phi_table(path.n_x, K);
  const double dx = 1.0 / path.n_x;
  const double dt = path.dt;

  std::vector<double> g(d), bc(static_cast<std::size_t>(d) * K);
  double log_w = 0.0;
  for (int n = 0; n < steps; ++n) {
    std::fill(bc.begin(), bc.end(), 0.0);
    for (int j = 1; j < path.n_x; ++j) {
      const std::size_t off = (static_cast<std::size_t>(n) * (path.n_x + 1) + j) * d;
      pot.gradient(std::span<const double>(path.values.data() + off, d),
                   std::span<double>(g.data(), d));
      const double* prow = phi_table->row(j).data();
      for (int i = 0; i < d; ++i) {
        double* bci = bc.data() + static_cast<std::size_t>(i) * K;
        const double gi = g[i] * dx;
        for (int k = 0; k < K; ++k) bci[k] += gi * prow[k];
      }
    }
    const double* db = path.noise_increments.data() + static_cast<std::size_t>(n) * d * K;
    double dot = 0.0, sq = 0.0;
    for (std::size_t m = 0; m < bc.size(); ++m) {
      dot += bc[m] * db[m];
      sq += bc[m] * bc[m];
    }
    log_w += dot - 0.5 * sq * dt;
  }
  return std::exp(log_w);
}

void write_grid_path(const GridPath& path, std::ostream& os) {
  write_le_u64(os, static_cast<std::uint64_t>(path.components));
  write_le_u64(os, static_cast<std::uint64_t>(path.n_x));
  write_le_u64(os, static_cast<std::uint64_t>(path.n_times()));
  write_le_f64(os, path.dt);
  for (double v : path.values) write_le_f64(os, v);
}

GridPath read_grid_path(std::istream& is) {
  GridPath path;
  path.components = static_cast<int>(read_le_u64(is));
  path.n_x = static_cast<int>(read_le_u64(is));
  const int n_times = static_cast<int>(read_le_u64(is));
  path.dt = read_le_f64(is);
  path.times.resize(n_times);
  for (int n = 0; n < n_times; ++n) path.times[n] = n * path.dt;
  path.values.resize(static_cast<std::size_t>(n_times) * (path.n_x + 1) * path.components);
  for (double& v : path.values) v = read_le_f64(is);
  if (!is) throw StateError("truncated grid path stream");
  return path;
}

} // namespace heatsheet
