#include "heatsheet/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heatsheet/dynamics.hpp"
#include "heatsheet/errors.hpp"
#include "heatsheet/stats.hpp"

namespace heatsheet {

namespace {

// Composite trapezoid of U along grid values.
double integral_u(const Potential& pot, std::span<const double> values, int d, int n_x) {
  const double dx = 1.0 / n_x;
  double acc = 0.0;
  for (int j = 0; j <= n_x; ++j) {
    const double w = (j == 0 || j == n_x) ? 0.5 : 1.0;
    acc += w * pot.value(values.subspan(static_cast<std::size_t>(j) * d, d));
  }
  return acc * dx;
}

} // namespace

const char* bridge_mode_name(BridgeMode mode) {
  return mode == BridgeMode::Standard ? "standard" : "stationary";
}

double BridgeSample::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

BridgeSample sample_bridge(BridgeMode mode, int components, int n_x,
                           const Truncation& trunc, RngStream& rng) {
  const int K = trunc.k_max();
  BridgeSample b;
  b.mode = mode;
  b.components = components;
  b.n_x = n_x;
  b.values.assign(static_cast<std::size_t>(n_x + 1) * components, 0.0);

  const double scale = mode == BridgeMode::Standard ? 1.0 : 0.5;
  std::vector<double> coeff(static_cast<std::size_t>(components) * K);
  for (int i = 0; i < components; ++i) {
    for (int k = 1; k <= K; ++k) {
      const double sd = std::sqrt(scale / eigenvalue(k));
      coeff[static_cast<std::size_t>(i) * K + (k - 1)] = sd * rng.normal();
    }
  }
  const auto phi_table = shared_phi_table(n_x, K);
  for (int j = 1; j < n_x; ++j) {
    const double* prow = phi_table->row(j).data();
    for (int i = 0; i < components; ++i) {
      const double* c = coeff.data() + static_cast<std::size_t>(i) * K;
      double acc = 0.0;
      for (int k = 0; k < K; ++k) acc += c[k] * prow[k];
      b.values[static_cast<std::size_t>(j) * components + i] = acc;
    }
  }
  return b;
}

double bridge_sup_cdf_series(double R) {
  if (!(R > 0.0)) throw DomainError("bridge_sup_cdf requires R > 0");
  double sum = 0.0;
  double sign = -1.0;
  for (int k = 1; k <= 512; ++k) {
    const double term = std::exp(-2.0 * k * k * R * R);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return 1.0 + 2.0 * sum;
}

double bridge_sup_cdf_theta(double R) {
  if (!(R > 0.0)) throw DomainError("bridge_sup_cdf requires R > 0");
  double sum = 0.0;
  for (int k = 1; k <= 512; ++k) {
    const double e = (2.0 * k - 1.0) * (2.0 * k - 1.0) * M_PI * M_PI / (8.0 * R * R);
    const double term = std::exp(-e);
    sum += term;
    if (term < 1e-300) break;
  }
  return std::sqrt(2.0 * M_PI) / R * sum;
}

double bridge_sup_cdf(double R) {
  return R < 0.2 ? bridge_sup_cdf_theta(R) : bridge_sup_cdf_series(R);
}

double bm_sup_cdf(double x) {
  if (!(x > 0.0)) throw DomainError("bm_sup_cdf requires x > 0");
  if (x >= 20.0) return 1.0; // 1 to double precision
  double sum = 0.0;
  double sign = 1.0;
  for (long k = 0; k < 10000000; ++k) {
    const double q = (2.0 * k + 1.0);
    const double term = std::exp(-q * q * M_PI * M_PI / (8.0 * x * x)) / q;
    sum += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return 4.0 / M_PI * sum;
}

double corrected_sup_norm(std::span<const double> values, int components, int n_x,
                          double variance_rate, RngStream& rng) {
  const double cell_var = variance_rate / n_x;
  // A cell interior can only beat `best` if its endpoints are within a few
  // standard deviations of it; exp(-2*(8 sd)^2/cell_var) = e^-128 is dead.
  const double margin = 8.0 * std::sqrt(cell_var);
  double best = 0.0;
  for (int i = 0; i < components; ++i) {
    for (int j = 0; j <= n_x; ++j) {
      best = std::max(best, std::abs(values[static_cast<std::size_t>(j) * components + i]));
    }
  }
  for (int i = 0; i < components; ++i) {
    for (int j = 0; j < n_x; ++j) {
      const double a = values[static_cast<std::size_t>(j) * components + i];
      const double b = values[static_cast<std::size_t>(j + 1) * components + i];
      if (std::max(std::abs(a), std::abs(b)) + margin <= best) continue;
      const double gap2 = (a - b) * (a - b);
      const double hi = 0.5 * (a + b + std::sqrt(gap2 - 2.0 * cell_var * std::log(rng.uniform())));
      const double lo = 0.5 * (a + b - std::sqrt(gap2 - 2.0 * cell_var * std::log(rng.uniform())));
      best = std::max({best, hi, -lo});
    }
  }
  return best;
}

bool gibbs_accept(double integral, double sup_bound, double u) {
  return u < std::exp(2.0 * (integral - sup_bound));
}

GibbsSampleBatch gibbs_sample(const Potential& pot, BridgeMode mode, int n_target,
                              int n_x, const Truncation& trunc, const StreamSet& streams) {
  pot.require_certified();
  if (n_target < 1) throw DomainError("gibbs_sample requires n_target >= 1");

  GibbsSampleBatch batch;
  batch.potential_label = pot.label();
  batch.mode = mode;
  batch.samples.reserve(n_target);

  RngStream bridge_rng = streams.stream("gibbs-bridge");
  RngStream accept_rng = streams.stream("gibbs-accept");
  RngStream cell_rng = streams.stream("gibbs-cells");

  const int d = pot.dimension();
  constexpr std::int64_t kProposalCheck = 1000000;

  while (static_cast<int>(batch.samples.size()) < n_target) {
    BridgeSample prop = sample_bridge(mode, d, n_x, trunc, bridge_rng);
    ++batch.proposals;
    ProposalRecord rec;
    rec.int_u = integral_u(pot, prop.values, d, n_x);
    rec.sup_norm = corrected_sup_norm(prop.values, d, n_x, bridge_variance_rate(mode), cell_rng);
    rec.accepted = gibbs_accept(rec.int_u, pot.sup_value(), accept_rng.uniform());
    batch.records.push_back(rec);
    if (rec.accepted) batch.samples.push_back(std::move(prop));

    if (batch.proposals >= kProposalCheck &&
        static_cast<double>(batch.samples.size()) < 1e-4 * static_cast<double>(batch.proposals)) {
      throw EfficiencyError("gibbs_sample: acceptance rate below 1e-4 after " +
                            std::to_string(batch.proposals) +
                            " proposals; rescale the potential");
    }
  }
  batch.acceptance_rate =
      static_cast<double>(batch.samples.size()) / static_cast<double>(batch.proposals);
  return batch;
}

BallMassEstimate ball_mass_from_batch(const GibbsSampleBatch& batch, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball_mass requires R > 0");
  std::int64_t inside = 0;
  std::int64_t total = 0;
  for (const ProposalRecord& r : batch.records) {
    if (!r.accepted) continue;
    ++total;
    if (r.sup_norm < radius) ++inside;
  }
  if (total == 0) throw StateError("ball_mass: batch carries no accepted samples");
  BallMassEstimate est;
  est.n = total;
  est.mass = static_cast<double>(inside) / static_cast<double>(total);
  est.se = std::sqrt(est.mass * (1.0 - est.mass) / static_cast<double>(total));
  est.complement = 1.0 - est.mass;
  return est;
}

BallMassEstimate ball_mass(const Potential& pot, double radius, BridgeMode mode,
                           int n, int n_x, const Truncation& trunc, const StreamSet& streams) {
  if (!(radius > 0.0)) throw DomainError("ball_mass requires R > 0");
  return ball_mass_from_batch(gibbs_sample(pot, mode, n, n_x, trunc, streams), radius);
}

ErgodicReport ergodic_check(const Potential& pot, const SampledField& u0, double t1,
                            double t2, int n, double dt, int n_x, const Truncation& trunc,
                            const StreamSet& streams) {
  if (!(t1 > 0.0) || !(t2 >= t1)) throw DomainError("ergodic_check requires 0 < t1 <= t2");
  const int d = pot.dimension();
  const int K = trunc.k_max();
  const auto phi_table = shared_phi_table(n_x, K);

  std::vector<double> sup_t1(n), sup_t2(n);

  if (pot.is_zero()) {
    // Exact marginal sampling: each mode is an independent OU bridge mode.
    const SineCoefficients c0 = project_sine(u0, K);
    std::vector<double> grid(static_cast<std::size_t>(n_x + 1) * d, 0.0);
    for (int trial = 0; trial < n; ++trial) {
      RngStream rng = StreamSet(streams.master(), streams.replica() + trial).stream("ergodic");
      ModeState s;
      s.components = d;
      s.k_max = K;
      s.coeffs.resize(static_cast<std::size_t>(d) * K);
      for (int i = 0; i < d; ++i) {
        for (int k = 1; k <= K; ++k) {
          const double lam = eigenvalue(k);
          const double sd1 = std::sqrt(-std::expm1(-2.0 * lam * t1) / (2.0 * lam));
          s.at(i, k) = std::exp(-lam * t1) * c0.at(i, k) + sd1 * rng.normal();
        }
      }
      auto grid_sup = [&](const ModeState& ms) {
        double m = 0.0;
        for (int j = 1; j < n_x; ++j) {
          const double* prow = phi_table->row(j).data();
          for (int i = 0; i < d; ++i) {
            const double* cc = ms.coeffs.data() + static_cast<std::size_t>(i) * K;
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += cc[k] * prow[k];
            m = std::max(m, std::abs(acc));
          }
        }
        return m;
      };
      sup_t1[trial] = grid_sup(s);
      // Exact OU transition from t1 to t2.
      const double gap = t2 - t1;
      if (gap > 0.0) {
        for (int i = 0; i < d; ++i) {
          for (int k = 1; k <= K; ++k) {
            const double lam = eigenvalue(k);
            const double sd = std::sqrt(-std::expm1(-2.0 * lam * gap) / (2.0 * lam));
            s.at(i, k) = std::exp(-lam * gap) * s.at(i, k) + sd * rng.normal();
          }
        }
      }
      sup_t2[trial] = grid_sup(s);
    }
  } else {
    StepperOptions opts;
    opts.n_x = n_x;
    opts.dt = dt;
    const int steps_t1 = static_cast<int>(std::llround(t1 / dt));
    const int steps_t2 = static_cast<int>(std::llround(t2 / dt));
    for (int trial = 0; trial < n; ++trial) {
      StreamSet trial_streams(streams.master(), streams.replica() + trial);
      FieldStepper stepper(u0, pot, trunc, opts, trial_streams.stream("noise"));
      for (int step = 1; step <= steps_t2; ++step) {
        stepper.step();
        if (step == steps_t1) sup_t1[trial] = stepper.grid_sup_norm();
      }
      sup_t2[trial] = stepper.grid_sup_norm();
    }
  }

  // Gibbs draws from the stationary-mode invariant law, plain grid sup.
  StreamSet gibbs_streams(streams.master(), streams.replica() + 900000000u);
  const GibbsSampleBatch batch =
      gibbs_sample(pot, BridgeMode::Stationary, n, n_x, trunc, gibbs_streams);
  std::vector<double> sup_gibbs;
  sup_gibbs.reserve(n);
  for (const BridgeSample& s : batch.samples) sup_gibbs.push_back(s.sup_norm());

  ErgodicReport rep;
  rep.n = n;
  rep.ks_t1_t2 = ks_statistic_two_sample(sup_t1, sup_t2);
  rep.ks_t2_gibbs = ks_statistic_two_sample(sup_t2, sup_gibbs);
  rep.critical_t1_t2 = ks_two_sample_critical_001(n, n);
  rep.critical_t2_gibbs = ks_two_sample_critical_001(n, sup_gibbs.size());
  rep.pass_t1_t2 = rep.ks_t1_t2 < rep.critical_t1_t2;
  rep.pass_t2_gibbs = rep.ks_t2_gibbs < rep.critical_t2_gibbs;
  return rep;
}

} // namespace heatsheet
