#include "heatsheet/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heatsheet/errors.hpp"

namespace heatsheet {

namespace {

double dist(const Vec& a, const Vec& b) {
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = a[i] - b[i];
    q += r * r;
  }
  return std::sqrt(q);
}

// Cell-centered lattice intersected with the set.
std::vector<Vec> lattice_candidates(const TargetSet& target, double pitch) {
  Vec lo, hi;
  target.bounding_box(lo, hi);
  const int d = target.dimension();
  std::vector<int> counts(d);
  for (int i = 0; i < d; ++i) {
    counts[i] = std::max(1, static_cast<int>(std::ceil((hi[i] - lo[i]) / pitch)));
  }
  std::vector<Vec> pts;
  std::vector<int> idx(d, 0);
  Vec z(d);
  while (true) {
    for (int i = 0; i < d; ++i) z[i] = lo[i] + (idx[i] + 0.5) * pitch;
    if (target.contains(z)) pts.push_back(z);
    int i = 0;
    while (i < d && ++idx[i] == counts[i]) idx[i++] = 0;
    if (i == d) break;
  }
  return pts;
}

Discretization discretize_box(const TargetSet& target, int m) {
  const Vec& lo = target.box_lo();
  const Vec& hi = target.box_hi();
  const int d = target.dimension();
  Vec len(d);
  double positive_product = 1.0;
  int positive_dims = 0;
  for (int i = 0; i < d; ++i) {
    len[i] = hi[i] - lo[i];
    if (len[i] > 0.0) {
      positive_product *= len[i];
      ++positive_dims;
    }
  }
  std::vector<int> counts(d, 1);
  if (positive_dims > 0) {
    const double scale = std::pow(m / positive_product, 1.0 / positive_dims);
    for (int i = 0; i < d; ++i) {
      if (len[i] > 0.0) counts[i] = std::max(2, static_cast<int>(std::lround(len[i] * scale)));
    }
  }
  Discretization out;
  std::vector<int> idx(d, 0);
  Vec z(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      z[i] = counts[i] == 1 ? 0.5 * (lo[i] + hi[i])
                            : lo[i] + len[i] * idx[i] / (counts[i] - 1);
    }
    out.points.push_back(z);
    int i = 0;
    while (i < d && ++idx[i] == counts[i]) idx[i++] = 0;
    if (i == d) break;
  }
  double half_diag2 = 0.0;
  for (int i = 0; i < d; ++i) {
    if (counts[i] > 1) {
      const double cell = len[i] / (counts[i] - 1);
      half_diag2 += cell * cell;
    }
  }
  out.covering_radius = 0.5 * std::sqrt(half_diag2);
  return out;
}

Discretization thin_by_farthest_point(std::vector<Vec> candidates, int m, double slack) {
  Discretization out;
  if (static_cast<int>(candidates.size()) <= m) {
    out.points = std::move(candidates);
    out.covering_radius = slack;
    return out;
  }
  const int n = static_cast<int>(candidates.size());
  // Deterministic start: candidate nearest the centroid.
  Vec centroid(candidates.front().size(), 0.0);
  for (const Vec& p : candidates) {
    for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += p[i];
  }
  for (double& c : centroid) c /= n;
  int first = 0;
  double best = HUGE_VAL;
  for (int j = 0; j < n; ++j) {
    const double dj = dist(candidates[j], centroid);
    if (dj < best) {
      best = dj;
      first = j;
    }
  }
  std::vector<double> nearest(n);
  out.points.reserve(m);
  out.points.push_back(candidates[first]);
  for (int j = 0; j < n; ++j) nearest[j] = dist(candidates[j], candidates[first]);
  while (static_cast<int>(out.points.size()) < m) {
    int far = 0;
    for (int j = 1; j < n; ++j) {
      if (nearest[j] > nearest[far]) far = j;
    }
    out.points.push_back(candidates[far]);
    for (int j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist(candidates[j], candidates[far]));
  }
  out.covering_radius = *std::max_element(nearest.begin(), nearest.end()) + slack;
  return out;
}

} // namespace

double CapacityKernel::operator()(double r) const {
  if (beta < 0.0) return 1.0;
  if (beta == 0.0) {
    if (r <= 0.0) return HUGE_VAL;
    return std::max(0.0, 1.0 - std::log(r));
  }
  if (r <= 0.0) return HUGE_VAL;
  return std::pow(r, -beta);
}

Discretization discretize_target(const TargetSet& target, int m) {
  if (m < 1) throw DomainError("discretize_target requires m >= 1");

  if (target.kind() == TargetSet::Kind::PointCloud) {
    Discretization out;
    for (const Vec& p : target.cloud_points()) {
      bool dup = false;
      for (const Vec& q : out.points) {
        if (dist(p, q) == 0.0) {
          dup = true;
          break;
        }
      }
      if (!dup) out.points.push_back(p);
    }
    out.covering_radius = target.cloud_tolerance();
    return out;
  }

  if (target.kind() == TargetSet::Kind::Ball && target.ball_radius() == 0.0) {
    return Discretization{{target.ball_center()}, 0.0};
  }

  if (target.kind() == TargetSet::Kind::Box) {
    return discretize_box(target, m);
  }

  // Ball / union: fine cell-centered lattice, thinned to exactly m points.
  Vec lo, hi;
  target.bounding_box(lo, hi);
  double volume = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) volume *= std::max(hi[i] - lo[i], 1e-12);
  double pitch = std::pow(volume / (8.0 * m), 1.0 / target.dimension());
  std::vector<Vec> candidates;
  for (int attempt = 0; attempt < 8; ++attempt) {
    candidates = lattice_candidates(target, pitch);
    if (static_cast<int>(candidates.size()) >= 2 * m || candidates.size() > 200000) break;
    pitch *= 0.6;
  }
  if (candidates.empty()) throw DomainError("discretize_target: target set appears empty");
  const double slack = 0.5 * pitch * std::sqrt(static_cast<double>(target.dimension()));
  return thin_by_farthest_point(std::move(candidates), m, slack);
}

EnergyResult min_energy(const std::vector<Vec>& points, double beta, double cutoff,
                        int max_iter, double relative_gap) {
  if (points.empty()) throw DomainError("min_energy requires at least one point");
  const CapacityKernel kernel{beta};
  const int m = static_cast<int>(points.size());

  EnergyResult res;
  res.measure.support = points;

  const double diag = kernel(cutoff);
  if (!std::isfinite(diag)) {
    // Infinite self-energy: every probability vector has infinite energy.
    res.energy = HUGE_VAL;
    res.measure.weights.assign(m, 1.0 / m);
    res.converged = true;
    return res;
  }

  std::vector<double> K(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    K[static_cast<std::size_t>(i) * m + i] = diag;
    for (int j = i + 1; j < m; ++j) {
      const double k = kernel(dist(points[i], points[j]));
      K[static_cast<std::size_t>(i) * m + j] = k;
      K[static_cast<std::size_t>(j) * m + i] = k;
    }
  }
  auto col = [&](int j) { return K.data() + static_cast<std::size_t>(j) * m; };

  std::vector<double> mu(m, 1.0 / m);
  std::vector<double> q(m, 0.0); // K mu
  for (int j = 0; j < m; ++j) {
    const double* cj = col(j);
    const double w = mu[j];
    for (int i = 0; i < m; ++i) q[i] += w * cj[i];
  }

  double energy = 0.0;
  for (int i = 0; i < m; ++i) energy += mu[i] * q[i];

  for (int iter = 1; iter <= max_iter; ++iter) {
    int s = 0, v = -1;
    double qmin = HUGE_VAL, qmax = -HUGE_VAL;
    for (int i = 0; i < m; ++i) {
      if (q[i] < qmin) {
        qmin = q[i];
        s = i;
      }
      if (mu[i] > 0.0 && q[i] > qmax) {
        qmax = q[i];
        v = i;
      }
    }
    const double gap_fw = 2.0 * (energy - qmin);
    res.gap = gap_fw;
    res.iterations = iter;
    if (gap_fw <= relative_gap * energy) {
      res.converged = true;
      break;
    }
    const double gap_away = 2.0 * (qmax - energy);

    if (gap_fw >= gap_away) {
      // Toward step: d = e_s - mu, exact line search, d^T K d = K_ss - 2 q_s + E.
      const double curv = diag - 2.0 * q[s] + energy;
      double gamma = curv > 0.0 ? gap_fw / (2.0 * curv) : 1.0;
      gamma = std::clamp(gamma, 0.0, 1.0);
      const double* cs = col(s);
      for (int i = 0; i < m; ++i) {
        mu[i] *= (1.0 - gamma);
        q[i] = (1.0 - gamma) * q[i] + gamma * cs[i];
      }
      mu[s] += gamma;
    } else {
      // Away step: d = mu - e_v, capped at the weight of the away vertex.
      const double alpha_v = mu[v];
      if (alpha_v >= 1.0) break; // single-atom measure
      const double gamma_max = alpha_v / (1.0 - alpha_v);
      const double curv = energy - 2.0 * q[v] + diag;
      double gamma = curv > 0.0 ? gap_away / (2.0 * curv) : gamma_max;
      gamma = std::clamp(gamma, 0.0, gamma_max);
      const double* cv = col(v);
      for (int i = 0; i < m; ++i) {
        mu[i] *= (1.0 + gamma);
        q[i] = (1.0 + gamma) * q[i] - gamma * cv[i];
      }
      mu[v] = std::max(mu[v] - gamma, 0.0);
    }

    energy = 0.0;
    for (int i = 0; i < m; ++i) energy += mu[i] * q[i];
  }

  if (!res.converged) {
    throw ConvergenceError("min_energy: Frank-Wolfe gap " + std::to_string(res.gap) +
                           " above tolerance after " + std::to_string(max_iter) + " iterations");
  }
  res.energy = energy;
  res.measure.weights = std::move(mu);
  return res;
}

CapacityEstimate cap(const TargetSet& target, double beta, int m) {
  CapacityEstimate est;
  est.beta = beta;

  if (beta < 0.0) {
    // Nonempty sets carry capacity 1 by convention; construction guarantees
    // nonemptiness.
    est.value = 1.0;
    est.energy = std::numeric_limits<double>::quiet_NaN();
    est.m = 0;
    return est;
  }

  const Discretization disc = discretize_target(target, m);
  est.m = static_cast<int>(disc.points.size());
  est.covering_radius = disc.covering_radius;

  const EnergyResult er = min_energy(disc.points, beta, disc.covering_radius / 2.0);
  est.energy = er.energy;
  est.iterations = er.iterations;
  est.gap = er.gap;
  if (std::isinf(er.energy)) {
    est.value = 0.0;
  } else if (er.energy <= 0.0) {
    est.value = HUGE_VAL;
  } else {
    est.value = 1.0 / er.energy;
  }
  return est;
}

} // namespace heatsheet
