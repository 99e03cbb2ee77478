#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace dualgen::geom {

using Point3 = Eigen::Vector3d;
using PointCloud = std::vector<Point3>;

/// Proper rigid motion p -> R p + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  /// (this ∘ other)(p) = this(other(p))
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// RᵀR = I and det R = +1, both within tol.
  bool is_proper(double tol = 1e-9) const;
};

PointCloud apply_transform(const RigidTransform& transform, std::span<const Point3> points);

Point3 centroid(std::span<const Point3> points);

/// Least-squares proper rigid transform T with T(source[i]) ≈ target[i].
/// Throws DegenerateInput for fewer than three points or collinear input.
RigidTransform kabsch(std::span<const Point3> source, std::span<const Point3> target);

/// Root mean squared distance between corresponding points. Throws LengthMismatch.
double rmsd(std::span<const Point3> a, std::span<const Point3> b);

/// For each point, the indices of its k nearest other points ordered by
/// distance, ties broken by ascending index. Throws KTooLarge when k >= n.
std::vector<std::vector<std::size_t>> knn_neighbors(std::span<const Point3> points, std::size_t k);

/// Rotation by `angle` radians about a (normalized) axis.
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);

}  // namespace dualgen::geom
