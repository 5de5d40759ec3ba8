#include "heatsheet/target.hpp"

#include <algorithm>
#include <cmath>

#include "heatsheet/errors.hpp"

namespace heatsheet {

namespace {

double norm2(std::span<const double> a, const Vec& b) {
  double q = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double r = a[i] - b[i];
    q += r * r;
  }
  return std::sqrt(q);
}

} // namespace

TargetSet TargetSet::ball(Vec center, double radius) {
  if (center.empty()) throw ConfigError("target.ball: empty center");
  if (radius < 0.0) throw ConfigError("target.ball: negative radius");
  TargetSet t;
  t.kind_ = Kind::Ball;
  t.dimension_ = static_cast<int>(center.size());
  t.center_ = std::move(center);
  t.radius_ = radius;
  return t;
}

TargetSet TargetSet::box(Vec lo, Vec hi) {
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("target.box: lo/hi size mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw ConfigError("target.box: lo exceeds hi");
  }
  TargetSet t;
  t.kind_ = Kind::Box;
  t.dimension_ = static_cast<int>(lo.size());
  t.lo_ = std::move(lo);
  t.hi_ = std::move(hi);
  return t;
}

TargetSet TargetSet::point_cloud(std::vector<Vec> points, double tolerance) {
  if (points.empty()) throw ConfigError("target.point_cloud: empty point list");
  if (tolerance < 0.0) throw ConfigError("target.point_cloud: negative tolerance");
  const std::size_t d = points.front().size();
  for (const Vec& p : points) {
    if (p.size() != d) throw ConfigError("target.point_cloud: ragged points");
  }
  TargetSet t;
  t.kind_ = Kind::PointCloud;
  t.dimension_ = static_cast<int>(d);
  t.points_ = std::move(points);
  t.tolerance_ = tolerance;
  return t;
}

TargetSet TargetSet::union_of(std::vector<TargetSet> members) {
  if (members.empty()) throw ConfigError("target.union: empty member list");
  const int d = members.front().dimension();
  for (const TargetSet& m : members) {
    if (m.dimension() != d) throw ConfigError("target.union: mixed dimensions");
  }
  TargetSet t;
  t.kind_ = Kind::Union;
  t.dimension_ = d;
  t.members_ = std::move(members);
  return t;
}

bool TargetSet::contains(std::span<const double> z) const {
  switch (kind_) {
    case Kind::Ball:
      return norm2(z, center_) <= radius_;
    case Kind::Box:
      for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (z[i] < lo_[i] || z[i] > hi_[i]) return false;
      }
      return true;
    case Kind::PointCloud: {
      for (const Vec& p : points_) {
        if (norm2(z, p) <= tolerance_) return true;
      }
      return false;
    }
    case Kind::Union:
      for (const TargetSet& m : members_) {
        if (m.contains(z)) return true;
      }
      return false;
  }
  return false;
}

double TargetSet::distance(std::span<const double> z) const {
  switch (kind_) {
    case Kind::Ball:
      return std::max(0.0, norm2(z, center_) - radius_);
    case Kind::Box: {
      double q = 0.0;
      for (std::size_t i = 0; i < lo_.size(); ++i) {
        const double r = std::max({lo_[i] - z[i], 0.0, z[i] - hi_[i]});
        q += r * r;
      }
      return std::sqrt(q);
    }
    case Kind::PointCloud: {
      double best = HUGE_VAL;
      for (const Vec& p : points_) best = std::min(best, norm2(z, p));
      return std::max(0.0, best - tolerance_);
    }
    case Kind::Union: {
      double best = HUGE_VAL;
      for (const TargetSet& m : members_) best = std::min(best, m.distance(z));
      return best;
    }
  }
  return HUGE_VAL;
}

void TargetSet::bounding_box(Vec& lo, Vec& hi) const {
  lo.assign(dimension_, HUGE_VAL);
  hi.assign(dimension_, -HUGE_VAL);
  switch (kind_) {
    case Kind::Ball:
      for (int i = 0; i < dimension_; ++i) {
        lo[i] = center_[i] - radius_;
        hi[i] = center_[i] + radius_;
      }
      break;
    case Kind::Box:
      lo = lo_;
      hi = hi_;
      break;
    case Kind::PointCloud:
      for (const Vec& p : points_) {
        for (int i = 0; i < dimension_; ++i) {
          lo[i] = std::min(lo[i], p[i] - tolerance_);
          hi[i] = std::max(hi[i], p[i] + tolerance_);
        }
      }
      break;
    case Kind::Union:
      for (const TargetSet& m : members_) {
        Vec mlo, mhi;
        m.bounding_box(mlo, mhi);
        for (int i = 0; i < dimension_; ++i) {
          lo[i] = std::min(lo[i], mlo[i]);
          hi[i] = std::max(hi[i], mhi[i]);
        }
      }
      break;
  }
}

TargetSet TargetSet::scaled(double s) const {
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("target.scaled requires s in (0,1]");
  switch (kind_) {
    case Kind::Ball:
      return ball(center_, radius_ * s);
    case Kind::Box: {
      Vec lo(dimension_), hi(dimension_);
      for (int i = 0; i < dimension_; ++i) {
        const double c = 0.5 * (lo_[i] + hi_[i]);
        lo[i] = c + s * (lo_[i] - c);
        hi[i] = c + s * (hi_[i] - c);
      }
      return box(std::move(lo), std::move(hi));
    }
    case Kind::PointCloud:
      return *this;
    case Kind::Union: {
      std::vector<TargetSet> scaled_members;
      scaled_members.reserve(members_.size());
      for (const TargetSet& m : members_) scaled_members.push_back(m.scaled(s));
      return union_of(std::move(scaled_members));
    }
  }
  return *this;
}

std::string TargetSet::describe() const {
  switch (kind_) {
    case Kind::Ball:
      return "ball(r=" + std::to_string(radius_) + ", d=" + std::to_string(dimension_) + ")";
    case Kind::Box:
      return "box(d=" + std::to_string(dimension_) + ")";
    case Kind::PointCloud:
      return "point_cloud(n=" + std::to_string(points_.size()) + ")";
    case Kind::Union:
      return "union(n=" + std::to_string(members_.size()) + ")";
  }
  return "?";
}

} // namespace heatsheet
