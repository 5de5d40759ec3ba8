#include "heatsheet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace heatsheet {

namespace {

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(x));
  }
}

} // namespace

Truncation::Truncation(int k_max, double t_min) : k_max_(k_max), t_min_(t_min) {
  if (k_max_ < 1) throw ConfigError("truncation.k_max must be >= 1");
  if (!(t_min_ > 0.0)) throw ConfigError("truncation.t_min must be > 0");
  if (tail_bound(t_min_) >= kTailTolerance) {
    throw ConfigError("truncation: tail bound " + std::to_string(tail_bound(t_min_)) +
                      " at t_min=" + std::to_string(t_min_) +
                      " exceeds 1e-14; raise k_max or t_min");
  }
}

double Truncation::tail_bound(double t) const {
  // k^2 >= (K+1)^2 + 2(K+1)(k-K-1) for k > K gives a geometric majorant.
  const double a = eigenvalue(k_max_ + 1) * t;
  const double r = std::exp(-2.0 * M_PI * M_PI * (k_max_ + 1) * t);
  if (r >= 1.0) return HUGE_VAL;
  return std::exp(-a) / (1.0 - r);
}

void Truncation::require_resolved(double t) const {
  const double tail = tail_bound(t);
  if (!(tail < kTailTolerance)) {
    throw PrecisionError("series tail " + std::to_string(tail) + " at t=" +
                         std::to_string(t) + " exceeds 1e-14 with k_max=" +
                         std::to_string(k_max_) + "; raise k_max explicitly");
  }
}

SampledField::SampledField(int components, int nodes)
    : d_(components), nodes_(nodes),
      values_(static_cast<std::size_t>(components) * nodes, 0.0) {
  if (components < 1) throw ConfigError("field components must be >= 1");
  if (nodes < 3 || nodes % 2 == 0) {
    throw ConfigError("field node count must be odd and >= 3, got " + std::to_string(nodes));
  }
}

SampledField SampledField::zero(int components, int nodes) {
  return SampledField(components, nodes);
}

SampledField SampledField::sine(const Vec& amplitudes, int nodes) {
  return from_function(static_cast<int>(amplitudes.size()), nodes,
                       [&](double x, std::span<double> out) {
                         const double s = std::sin(M_PI * x);
                         for (std::size_t i = 0; i < amplitudes.size(); ++i) out[i] = amplitudes[i] * s;
                       });
}

SampledField SampledField::parabola(const Vec& amplitudes, int nodes) {
  return from_function(static_cast<int>(amplitudes.size()), nodes,
                       [&](double x, std::span<double> out) {
                         const double s = 4.0 * x * (1.0 - x);
                         for (std::size_t i = 0; i < amplitudes.size(); ++i) out[i] = amplitudes[i] * s;
                       });
}

SampledField SampledField::from_function(
    int components, int nodes, const std::function<void(double, std::span<double>)>& f) {
  SampledField u(components, nodes);
  std::vector<double> buf(components);
  for (int j = 0; j < nodes; ++j) {
    f(u.node_x(j), buf);
    for (int i = 0; i < components; ++i) u.at(j, i) = buf[i];
  }
  return u;
}

double SampledField::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SineCoefficients project_sine(const SampledField& u, int k_max) {
  const int n = u.nodes();
  const double h = 1.0 / (n - 1);
  SineCoefficients c;
  c.components = u.components();
  c.k_max = k_max;
  c.a.assign(static_cast<std::size_t>(c.components) * k_max, 0.0);
  // Simpson weights h/3 * (1,4,2,...,2,4,1).
  for (int k = 1; k <= k_max; ++k) {
    for (int j = 1; j < n - 1; ++j) { // phi vanishes at both endpoints
      const double w = (j % 2 == 1) ? 4.0 : 2.0;
      const double pw = w * phi(k, u.node_x(j)) * h / 3.0;
      for (int i = 0; i < u.components(); ++i) c.at(i, k) += pw * u.at(j, i);
    }
  }
  return c;
}

PhiTable::PhiTable(int n_x, int k_max)
    : n_x_(n_x), k_max_(k_max),
      values_(static_cast<std::size_t>(n_x + 1) * k_max) {
  for (int j = 0; j <= n_x; ++j) {
    const double x = static_cast<double>(j) / n_x;
    for (int k = 1; k <= k_max; ++k) {
      values_[static_cast<std::size_t>(j) * k_max + (k - 1)] = phi(k, x);
    }
  }
}

std::shared_ptr<const PhiTable> shared_phi_table(int n_x, int k_max) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const PhiTable>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  auto& entry = cache[{n_x, k_max}];
  if (!entry) entry = std::make_shared<PhiTable>(n_x, k_max);
  return entry;
}

double green_kernel(const SpaceTimePoint& p, double y, const Truncation& trunc) {
  if (!(p.t > 0.0)) throw DomainError("green_kernel requires t > 0");
  check_unit_interval(p.x, "x");
  check_unit_interval(y, "y");
  trunc.require_resolved(p.t);
  double sum = 0.0;
  for (int k = trunc.k_max(); k >= 1; --k) {
    sum += std::exp(-eigenvalue(k) * p.t) * phi(k, p.x) * phi(k, y);
  }
  return sum;
}

Vec semigroup_apply(const SineCoefficients& u0, double t, double x) {
  if (t < 0.0) throw DomainError("semigroup_apply requires t >= 0");
  check_unit_interval(x, "x");
  Vec out(u0.components, 0.0);
  for (int k = u0.k_max; k >= 1; --k) {
    const double w = std::exp(-eigenvalue(k) * t) * phi(k, x);
    for (int i = 0; i < u0.components; ++i) out[i] += w * u0.at(i, k);
  }
  return out;
}

Vec semigroup_apply(const SampledField& u0, double t, double x, const Truncation& trunc) {
  return semigroup_apply(project_sine(u0, trunc.k_max()), t, x);
}

double sigma2(double t, double x, const Truncation& trunc) {
  if (t < 0.0) throw DomainError("sigma2 requires t >= 0");
  check_unit_interval(x, "x");
  double sum = 0.0;
  for (int k = trunc.k_max(); k >= 1; --k) {
    const double lam = eigenvalue(k);
    const double p = phi(k, x);
    sum += p * p * (-std::expm1(-2.0 * lam * t)) / (2.0 * lam);
  }
  return sum;
}

double stationary_variance(double x) {
  check_unit_interval(x, "x");
  return x * (1.0 - x) / 2.0;
}

double cov_v(double t, double x, double s, double y, const Truncation& trunc) {
  if (t < 0.0 || s < 0.0) throw DomainError("cov_v requires t,s >= 0");
  check_unit_interval(x, "x");
  check_unit_interval(y, "y");
  const double lo = std::min(s, t);
  double sum = 0.0;
  for (int k = trunc.k_max(); k >= 1; --k) {
    const double lam = eigenvalue(k);
    // exp(-lam (t+s)) (exp(2 lam min) - 1) / (2 lam), evaluated stably as
    // exp(-lam |t-s|) (1 - exp(-2 lam min)) / (2 lam).
    const double w = std::exp(-lam * std::abs(t - s)) * (-std::expm1(-2.0 * lam * lo)) / (2.0 * lam);
    sum += phi(k, x) * phi(k, y) * w;
  }
  return sum;
}

GaussianMarginal marginal(const SpaceTimePoint& p, const SineCoefficients& u0,
                          const Truncation& trunc) {
  if (!(p.t > 0.0)) throw DomainError("marginal requires t > 0");
  trunc.require_resolved(p.t);
  return GaussianMarginal{semigroup_apply(u0, p.t, p.x), sigma2(p.t, p.x, trunc)};
}

double marginal_density(const SpaceTimePoint& p, const SineCoefficients& u0,
                        const Vec& z, const Truncation& trunc) {
  const GaussianMarginal m = marginal(p, u0, trunc);
  const int d = static_cast<int>(z.size());
  if (d != u0.components) throw DomainError("marginal_density: z dimension mismatch");
  double q = 0.0;
  for (int i = 0; i < d; ++i) {
    const double r = z[i] - m.mean[i];
    q += r * r;
  }
  return std::pow(2.0 * M_PI * m.variance, -0.5 * d) * std::exp(-q / (2.0 * m.variance));
}

double joint_density_v(const SpaceTimePoint& p1, const SpaceTimePoint& p2,
                       const Vec& z1, const Vec& z2, const Truncation& trunc) {
  if (!(p1.t > 0.0) || !(p2.t > 0.0)) throw DomainError("joint_density_v requires t,s > 0");
  if (p1.t == p2.t && p1.x == p2.x) {
    throw DomainError("joint_density_v requires distinct space-time points");
  }
  if (z1.size() != z2.size()) throw DomainError("joint_density_v: z dimension mismatch");
  const double s11 = sigma2(p1.t, p1.x, trunc);
  const double s22 = sigma2(p2.t, p2.x, trunc);
  const double s12 = cov_v(p1.t, p1.x, p2.t, p2.x, trunc);
  const double det = s11 * s22 - s12 * s12;
  if (!(det > 1e-300)) {
    throw DegeneracyError("joint covariance numerically singular at (t=" +
                          std::to_string(p1.t) + ",x=" + std::to_string(p1.x) + ") vs (s=" +
                          std::to_string(p2.t) + ",y=" + std::to_string(p2.x) + ")");
  }
  double density = 1.0;
  const double norm = 1.0 / (2.0 * M_PI * std::sqrt(det));
  for (std::size_t i = 0; i < z1.size(); ++i) {
    const double a = z1[i];
    const double b = z2[i];
    const double quad = (s22 * a * a - 2.0 * s12 * a * b + s11 * b * b) / det;
    density *= norm * std::exp(-0.5 * quad);
  }
  return density;
}

double parabolic_metric(const SpaceTimePoint& p1, const SpaceTimePoint& p2) {
  return std::sqrt(std::abs(p1.t - p2.t)) + std::abs(p1.x - p2.x);
}

} // namespace heatsheet
