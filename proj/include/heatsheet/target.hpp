#pragma once

#include <memory>
#include <string>
#include <vector>

#include "heatsheet/spectral.hpp"

namespace heatsheet {

// Bounded Borel target set A in R^d: ball, axis box, finite union, or point
// cloud (a union of tolerance-balls around listed points). Membership and
// Euclidean distance agree: contains(z) iff distance(z) == 0.
class TargetSet {
public:
  enum class Kind { Ball, Box, PointCloud, Union };

  static TargetSet ball(Vec center, double radius);
  static TargetSet box(Vec lo, Vec hi);
  static TargetSet point_cloud(std::vector<Vec> points, double tolerance);
  static TargetSet union_of(std::vector<TargetSet> members);

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }

  bool contains(std::span<const double> z) const;
  double distance(std::span<const double> z) const;

  void bounding_box(Vec& lo, Vec& hi) const;

  // Closed contraction about the centroid by factor s in (0,1]; point clouds
  // are returned unchanged (already compact).
  TargetSet scaled(double s) const;

  // Accessors used by discretization.
  const Vec& ball_center() const { return center_; }
  double ball_radius() const { return radius_; }
  const Vec& box_lo() const { return lo_; }
  const Vec& box_hi() const { return hi_; }
  const std::vector<Vec>& cloud_points() const { return points_; }
  double cloud_tolerance() const { return tolerance_; }
  const std::vector<TargetSet>& members() const { return members_; }

  std::string describe() const;

private:
  TargetSet() = default;

  Kind kind_ = Kind::Ball;
  int dimension_ = 0;
  Vec center_;
  double radius_ = 0.0;
  Vec lo_, hi_;
  std::vector<Vec> points_;
  double tolerance_ = 0.0;
  std::vector<TargetSet> members_;
};

} // namespace heatsheet
