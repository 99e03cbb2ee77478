#include "dualgen/geom.hpp"

#include <algorithm>
#include <numeric>

#include "dualgen/error.hpp"

namespace dualgen::geom {

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidTransform::is_proper(double tol) const {
  const double orth = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return orth <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

PointCloud apply_transform(const RigidTransform& transform, std::span<const Point3> points) {
  PointCloud out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(transform.apply(p));
  return out;
}

Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) throw DegenerateInput("centroid of an empty point set");
  Point3 sum = Point3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

RigidTransform kabsch(std::span<const Point3> source, std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw LengthMismatch("kabsch: source has " + std::to_string(source.size()) + " points, target has " +
                         std::to_string(target.size()));
  }
  if (source.size() < 3) throw DegenerateInput("kabsch: need at least 3 points");

  const Point3 cs = centroid(source);
  const Point3 ct = centroid(target);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double scale = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Point3 a = source[i] - cs;
    const Point3 b = target[i] - ct;
    cov += a * b.transpose();
    scale = std::max({scale, a.norm(), b.norm()});
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Rank < 2 means the points span at most a line: rotation about it is free.
  if (scale == 0.0 || sv(1) <= 1e-12 * std::max(sv(0), scale * scale)) {
    throw DegenerateInput("kabsch: points are collinear or coincident");
  }

  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;

  RigidTransform out;
  out.rotation = v * d * u.transpose();
  out.translation = ct - out.rotation * cs;
  return out;
}

double rmsd(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.size() != b.size() || a.empty()) {
    throw LengthMismatch("rmsd: point counts " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

std::vector<std::vector<std::size_t>> knn_neighbors(std::span<const Point3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k == 0 || k >= n) {
    throw KTooLarge("knn: k=" + std::to_string(k) + " needs 0 < k < " + std::to_string(n));
  }
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> order(n);
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist2[j] = (points[i] - points[j]).squaredNorm();
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (dist2[a] != dist2[b]) return dist2[a] < dist2[b];
                        return a < b;
                      });
    out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace dualgen::geom
