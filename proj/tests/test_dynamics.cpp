#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "heatsheet/dynamics.hpp"
#include "heatsheet/hitting.hpp"
#include "heatsheet/stats.hpp"
#include "oracles.hpp"

using namespace heatsheet;

namespace {

const Truncation kTrunc(128, 1e-3);

// Cholesky solve for small SPD systems (test-side linear algebra).
std::vector<double> spd_solve(std::vector<double> a, std::vector<double> b, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = (i == j) ? std::sqrt(s) : s / a[j * n + j];
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return b;
}

} // namespace

TEST_CASE("ou mode step: decay, variance, and step-splitting") {
  CHECK(ou_mode_step_deterministic(1.0, 1, 0.02) ==
        doctest::Approx(std::exp(-M_PI * M_PI * 0.02)).epsilon(1e-15));

  const int n = 100000;
  for (int k : {1, 3, 17}) {
    const double lam = eigenvalue(k);
    const double dt = 5e-3;
    const double target = -std::expm1(-2.0 * lam * dt) / (2.0 * lam);

    RngStream rng(11, static_cast<std::uint32_t>(k), "ou");
    std::vector<double> one(n), two(n);
    for (int i = 0; i < n; ++i) one[i] = ou_mode_step(0.0, k, dt, rng);
    for (int i = 0; i < n; ++i) {
      two[i] = ou_mode_step(ou_mode_step(0.0, k, dt / 2.0, rng), k, dt / 2.0, rng);
    }
    const double v1 = variance(one);
    const double v2 = variance(two);
    CHECK(std::abs(v1 - target) < 3.0 * variance_se(target, n));
    CHECK(std::abs(v1 - v2) < 3.0 * std::sqrt(2.0) * variance_se(target, n));
  }
}

TEST_CASE("ou step preserves the stationary mode law") {
  const int n = 100000;
  for (int k : {1, 8, 128}) {
    for (double dt : {1e-3, 1e-2}) {
      const double lam = eigenvalue(k);
      const double sd = std::sqrt(1.0 / (2.0 * lam));
      RngStream rng(5, static_cast<std::uint32_t>(100 * k), "stat");
      std::vector<double> xs(n);
      for (double& x : xs) x = ou_mode_step(sd * rng.normal(), k, dt, rng);
      CHECK(std::abs(variance(xs) - sd * sd) < 3.0 * variance_se(sd * sd, n));
    }
  }
}

TEST_CASE("sample_convolution: stationary variance, covariance, mean") {
  const int n = 100000;
  RngStream rng(21, 0, "conv");
  std::vector<double> at_half(n), v_t1(n), v_t2(n);
  for (int i = 0; i < n; ++i) {
    // Exact joint draw at t=0.1 and t=0.2 via the exact OU transition.
    ModeState s = sample_convolution(0.1, 1, kTrunc, rng);
    v_t1[i] = s.reconstruct(0.6)[0];
    for (int k = 1; k <= s.k_max; ++k) s.at(0, k) = ou_mode_step(s.at(0, k), k, 0.1, rng);
    v_t2[i] = s.reconstruct(0.3)[0];
  }
  {
    RngStream rng5(22, 0, "conv5");
    for (int i = 0; i < n; ++i) {
      at_half[i] = sample_convolution(5.0, 1, kTrunc, rng5).reconstruct(0.5)[0];
    }
  }

  const double var5 = variance(at_half);
  CHECK(std::abs(var5 - 0.125) < 3.0 * variance_se(0.125, n) + 1.0 / (M_PI * M_PI * 128));
  CHECK(std::abs(mean(at_half)) < 3.0 * std::sqrt(0.125 / n));

  const double m1 = mean(v_t1), m2 = mean(v_t2);
  double cov = 0.0;
  for (int i = 0; i < n; ++i) cov += (v_t1[i] - m1) * (v_t2[i] - m2);
  cov /= n - 1;
  const double expected = cov_v(0.2, 0.3, 0.1, 0.6, kTrunc);
  const double s11 = sigma2(0.1, 0.6, kTrunc);
  const double s22 = sigma2(0.2, 0.3, kTrunc);
  const double se_cov = std::sqrt((s11 * s22 + expected * expected) / n);
  CHECK(std::abs(cov - expected) < 3.0 * se_cov);
}

TEST_CASE("integrate: deterministic heat flow matches the semigroup") {
  const SampledField u0 = SampledField::parabola({0.8}, 257);
  const Potential pot = Potential::zero(1);
  StreamSet streams(77, 0);
  IntegrateOptions opts;
  opts.noise_enabled = false;
  const GridPath path = integrate(u0, pot, 0.5, 5e-3, kTrunc, 128, streams, opts);

  const SineCoefficients c0 = project_sine(u0, 128);
  for (int n : {20, 60, 100}) {
    for (int j : {13, 64, 100}) {
      const Vec lam = semigroup_apply(c0, path.times[n], path.node_x(j));
      CHECK(path.value(n, j, 0) == doctest::Approx(lam[0]).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("integrate: grid-path invariants and determinism") {
  const SampledField u0 = SampledField::sine({0.7, -0.4}, 257);
  const Potential pot = Potential::cosine({1.0, 0.5});
  StreamSet streams(123456789, 42);
  const GridPath a = integrate(u0, pot, 0.05, 1e-3, kTrunc, 128, streams);
  const GridPath b = integrate(u0, pot, 0.05, 1e-3, kTrunc, 128, streams);

  CHECK(a.times.front() == 0.0);
  CHECK(a.n_times() == 51);
  // Boundary rows exactly zero at every frame.
  for (int n = 0; n < a.n_times(); ++n) {
    for (int i = 0; i < a.components; ++i) {
      CHECK(a.value(n, 0, i) == 0.0);
      CHECK(a.value(n, a.n_x, i) == 0.0);
    }
  }
  // Frame zero reproduces u0 within truncation error.
  for (int j : {1, 37, 91}) {
    CHECK(a.value(0, j, 0) ==
          doctest::Approx(0.7 * std::sin(M_PI * a.node_x(j))).epsilon(1e-6).scale(1.0));
  }
  // Identical config and seed: bit-identical paths.
  REQUIRE(a.values.size() == b.values.size());
  CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
}

TEST_CASE("integrate rejects bad inputs") {
  const SampledField u0 = SampledField::zero(1, 257);
  StreamSet streams(1, 0);
  CHECK_THROWS_AS(integrate(u0, Potential::zero(1), 1.0, 0.02, kTrunc, 128, streams),
                  ConfigError);

  // Potential lacking certified bounds.
  const Potential bad = Potential::custom(
      1, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) { g[0] = 0.0; },
      std::numeric_limits<double>::quiet_NaN(), 1.0, 1.0, "uncertified");
  CHECK_THROWS_AS(integrate(u0, bad, 0.1, 1e-3, kTrunc, 128, streams), ConfigError);

  // NaN drift carries the step index.
  const Potential nan_drift = Potential::custom(
      1, [](std::span<const double>) { return 0.0; },
      [](std::span<const double>, std::span<double> g) {
        g[0] = std::numeric_limits<double>::quiet_NaN();
      },
      0.0, 1.0, 1.0, "nan-drift");
  CHECK_THROWS_WITH_AS(integrate(u0, nan_drift, 0.1, 1e-3, kTrunc, 128, streams),
                       doctest::Contains("step 0"), IntegrationError);
}

TEST_CASE("integrate: driftless marginal variance matches sigma2 over 1e4 replicas") {
  const int n = 10000;
  const SampledField u0 = SampledField::zero(1, 257);
  const Potential pot = Potential::zero(1);
  StepperOptions opts;
  opts.n_x = 128;
  opts.dt = 1e-2;
  std::vector<double> at_mid(n);
  for (int trial = 0; trial < n; ++trial) {
    FieldStepper stepper(u0, pot, kTrunc, opts, RngStream(314159, trial, "noise"));
    for (int s = 0; s < 100; ++s) stepper.step();
    at_mid[trial] = stepper.grid_values()[64];
  }
  const double target = sigma2(1.0, 0.5, kTrunc);
  CHECK(std::abs(variance(at_mid) - target) < 3.0 * variance_se(target, n));
}

TEST_CASE("exactness: 4-point marginals are Gaussian with mean lambda, covariance cov_v") {
  // Two times x two nodes, drift-free, started from a sine profile.
  const int n = 20000;
  const double t1 = 0.1, t2 = 0.2;
  const int j1 = 44, j2 = 84; // x = j/128
  const double x1 = j1 / 128.0, x2 = j2 / 128.0;
  const SampledField u0 = SampledField::sine({0.5}, 257);
  const SineCoefficients c0 = project_sine(u0, 128);

  const Vec mean_vec = {semigroup_apply(c0, t1, x1)[0], semigroup_apply(c0, t1, x2)[0],
                        semigroup_apply(c0, t2, x1)[0], semigroup_apply(c0, t2, x2)[0]};
  const std::vector<std::pair<double, double>> pts = {{t1, x1}, {t1, x2}, {t2, x1}, {t2, x2}};
  std::vector<double> cov_mat(16);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      cov_mat[a * 4 + b] =
          cov_v(pts[a].first, pts[a].second, pts[b].first, pts[b].second, kTrunc);
    }
  }

  StepperOptions opts;
  opts.n_x = 128;
  opts.dt = 1e-2;
  const Potential pot = Potential::zero(1);
  std::vector<Vec> draws(n, Vec(4));
  for (int trial = 0; trial < n; ++trial) {
    FieldStepper stepper(u0, pot, kTrunc, opts, RngStream(271828, trial, "noise"));
    for (int s = 1; s <= 20; ++s) {
      stepper.step();
      if (s == 10) {
        draws[trial][0] = stepper.grid_values()[j1];
        draws[trial][1] = stepper.grid_values()[j2];
      }
    }
    draws[trial][2] = stepper.grid_values()[j1];
    draws[trial][3] = stepper.grid_values()[j2];
  }

  // Standardized Z-scores of each coordinate mean.
  for (int a = 0; a < 4; ++a) {
    double m = 0.0;
    for (const Vec& v : draws) m += v[a];
    m /= n;
    const double z = (m - mean_vec[a]) / std::sqrt(cov_mat[a * 4 + a] / n);
    CHECK(std::abs(z) < 3.5);
  }

  // Mahalanobis distances: mean 4 and a chi-square GOF against chi2_df4.
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) {
    Vec r(4);
    for (int a = 0; a < 4; ++a) r[a] = draws[i][a] - mean_vec[a];
    const Vec sol = spd_solve(cov_mat, r, 4);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) acc += r[a] * sol[a];
    q[i] = acc;
  }
  CHECK(std::abs(mean(q) - 4.0) < 3.0 * std::sqrt(8.0 / n));

  const int bins = 10;
  std::vector<std::int64_t> counts(bins, 0);
  for (double v : q) {
    int b = static_cast<int>(std::floor(oracles::chi2_cdf_df4(v) * bins));
    b = std::clamp(b, 0, bins - 1);
    ++counts[b];
  }
  double pearson = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (std::int64_t c : counts) {
    pearson += (c - expected) * (c - expected) / expected;
  }
  CHECK(pearson < 21.666); // chi2_9 at alpha = 0.01
}

TEST_CASE("girsanov: zero potential gives weight one; state errors") {
  const SampledField u0 = SampledField::zero(1, 129);
  StreamSet streams(9, 0);
  IntegrateOptions opts;
  opts.record_noise = true;
  const Truncation trunc(64, 1e-3);
  const GridPath path = integrate(u0, Potential::zero(1), 0.2, 5e-3, trunc, 64, streams, opts);
  CHECK(girsanov_weight(path, Potential::zero(1)) == 1.0);

  // Missing increments.
  const GridPath bare = integrate(u0, Potential::zero(1), 0.2, 5e-3, trunc, 64, streams);
  CHECK_THROWS_AS(girsanov_weight(bare, Potential::cosine({1.0})), StateError);

  // Drifted provenance is rejected.
  const GridPath drifted =
      integrate(u0, Potential::cosine({1.0}), 0.2, 5e-3, trunc, 64, streams, opts);
  CHECK_THROWS_AS(girsanov_weight(drifted, Potential::cosine({1.0})), StateError);
}

TEST_CASE("girsanov: martingale property E[weight] = 1") {
  const int n = 4000;
  const SampledField u0 = SampledField::zero(1, 129);
  const Potential pot = Potential::cosine({1.0});
  const Truncation trunc(64, 1e-3);
  IntegrateOptions opts;
  opts.record_noise = true;
  std::vector<double> w(n);
  for (int trial = 0; trial < n; ++trial) {
    StreamSet streams(112233, static_cast<std::uint32_t>(trial));
    const GridPath path = integrate(u0, Potential::zero(1), 0.5, 5e-3, trunc, 64, streams, opts);
    w[trial] = girsanov_weight(path, pot);
  }
  const double m = mean(w);
  const double se = std::sqrt(variance(w) / n);
  CHECK(std::abs(m - 1.0) < 3.0 * se);
  CHECK(se < 0.05); // the weights are well-behaved at this horizon
}

TEST_CASE("girsanov: importance sampling agrees with direct drifted simulation") {
  // d=1, cosine potential; window-hit probability estimated two ways.
  const int n = 1500;
  const Potential pot = Potential::cosine({1.0});
  const Truncation trunc(64, 1e-3);
  const TargetSet target = TargetSet::ball({0.25}, 0.15);
  const SpaceTimeWindow window{0.3, 0.6, 0.25, 0.75};
  const SampledField u0 = SampledField::zero(1, 129);

  double is_sum = 0.0, is_sq = 0.0;
  std::int64_t direct_hits = 0;
  IntegrateOptions record;
  record.record_noise = true;
  for (int trial = 0; trial < n; ++trial) {
    StreamSet streams(445566, static_cast<std::uint32_t>(trial));
    const GridPath path = integrate(u0, Potential::zero(1), 0.6, 5e-3, trunc, 64, streams, record);
    const double w = girsanov_weight(path, pot);
    const double v = detect_hit(path, target, window).hit ? w : 0.0;
    is_sum += v;
    is_sq += v * v;

    StreamSet streams2(778899, static_cast<std::uint32_t>(trial));
    const GridPath drifted = integrate(u0, pot, 0.6, 5e-3, trunc, 64, streams2);
    if (detect_hit(drifted, target, window).hit) ++direct_hits;
  }
  const double is_mean = is_sum / n;
  const double is_se = std::sqrt((is_sq / n - is_mean * is_mean) / n);
  const double direct = static_cast<double>(direct_hits) / n;
  const double direct_se = std::sqrt(direct * (1.0 - direct) / n);
  CHECK(std::abs(is_mean - direct) < 3.0 * std::sqrt(is_se * is_se + direct_se * direct_se));
}

TEST_CASE("grid path binary round trip") {
  const SampledField u0 = SampledField::sine({0.4}, 129);
  StreamSet streams(31337, 5);
  const Truncation trunc(64, 1e-3);
  const GridPath path = integrate(u0, Potential::zero(1), 0.03, 1e-3, trunc, 64, streams);
  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_grid_path(path, buf);
  const GridPath back = read_grid_path(buf);
  CHECK(back.components == path.components);
  CHECK(back.n_x == path.n_x);
  CHECK(back.n_times() == path.n_times());
  CHECK(back.dt == path.dt);
  CHECK(back.values == path.values);
}
