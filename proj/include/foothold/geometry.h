#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace foothold
{

using Point2 = Eigen::Vector2d;

/// Tolerance used by every geometric predicate unless a caller passes its own (meters).
inline constexpr double kGeometryEpsilon = 1e-9;

inline double cross2(const Eigen::Vector2d & a, const Eigen::Vector2d & b)
{
  return a.x() * b.y() - a.y() * b.x();
}

/// Left-hand perpendicular of a planar vector.
inline Eigen::Vector2d perp(const Eigen::Vector2d & v)
{
  return {-v.y(), v.x()};
}

struct Line2
{
  Point2 point = Point2::Zero();
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();

  /// Builds a line with a normalized direction. Throws InvalidArgument on a zero direction.
  static Line2 through(const Point2 & point, const Eigen::Vector2d & direction);

  /// Unit normal pointing to the left of the direction.
  Eigen::Vector2d normal() const { return perp(direction); }

  /// Positive on the left of the direction.
  double signedDistance(const Point2 & p) const { return normal().dot(p - point); }

  Point2 project(const Point2 & p) const { return point + direction * direction.dot(p - point); }
};

/// Planar rigid transform (sole pose on the ground).
struct Pose2
{
  Point2 position = Point2::Zero();
  double yaw = 0.;

  Eigen::Matrix2d rotation() const;
  Point2 toWorld(const Point2 & local) const { return position + rotation() * local; }
  Point2 toLocal(const Point2 & world) const { return rotation().transpose() * (world - position); }
};

/** Convex planar support region, vertices counter-clockwise.
 *
 * Degenerate contacts are represented with one or two distinct vertices
 * (possibly repeated), so point and line footholds share the same type.
 */
class FootholdPolygon
{
public:
  FootholdPolygon() = default;
  explicit FootholdPolygon(std::vector<Point2> vertices, std::string frame = "sole");

  /// Axis-aligned rectangle centered on the frame origin.
  static FootholdPolygon rectangle(double length, double width, std::string frame = "sole");

  const std::vector<Point2> & vertices() const { return vertices_; }
  const std::string & frame() const { return frame_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }

  double area() const;

  /// Area centroid, or the midpoint of the extreme vertices for degenerate polygons.
  Point2 centroid() const;

  /// Vertices with consecutive near-duplicates removed.
  std::vector<Point2> distinctVertices(double eps = kGeometryEpsilon) const;

  bool isDegenerate(double eps = kGeometryEpsilon) const;

  bool isConvex(double tol = 1e-10) const;

  /// Negative inside, positive outside. Degenerate polygons have no interior.
  double signedDistance(const Point2 & p) const;

  bool contains(const Point2 & p, double tol = kGeometryEpsilon) const { return signedDistance(p) <= tol; }

  Point2 closestPoint(const Point2 & p) const;

  /// Maps vertices from this polygon's frame into the frame of `pose` (local to world).
  FootholdPolygon transformed(const Pose2 & pose, std::string frame) const;

  /// Inverse of transformed().
  FootholdPolygon toLocal(const Pose2 & pose, std::string frame) const;

private:
  std::vector<Point2> vertices_;
  std::string frame_ = "sole";
};

struct Plane3
{
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

struct PlaneIntersection
{
  /// Intersection line expressed in the ground plane frame.
  Line2 axis;
  /// Angle between the planes, in [0, pi/2].
  double theta = 0.;
  /// Same line in 3D.
  Eigen::Vector3d point3 = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction3 = Eigen::Vector3d::UnitX();
};

/// In-plane orthonormal basis used to express points of a plane in 2D.
void planeBasis(const Plane3 & plane, Eigen::Vector3d & e1, Eigen::Vector3d & e2);

double polygonArea(std::span<const Point2> vertices);

FootholdPolygon convexHull(std::span<const Point2> points, double eps = kGeometryEpsilon);

/// Intersection of `polygon` with the closed half-plane bounded by `cut` that contains `keep`.
FootholdPolygon cropPolygon(const FootholdPolygon & polygon, const Line2 & cut, const Point2 & keep,
                            double eps = kGeometryEpsilon);

/// Weighted total-least-squares line (principal axis about the weighted centroid).
Line2 fitLineWeighted(std::span<const Point2> points, std::span<const double> weights);

PlaneIntersection planeIntersection(const Plane3 & foot, const Plane3 & ground);

/** Approximates a convex polygon with exactly four vertices.
 *
 * Repeatedly removes a vertex or merges an adjacent pair, picking the
 * operation with the smallest area change. Merged vertices may leave the
 * original polygon by at most `maxDilation` meters. Polygons with fewer than
 * four distinct vertices are padded with duplicates.
 */
FootholdPolygon reduceToFourCorners(const FootholdPolygon & polygon, double maxDilation = 0.005);

/// Distance from `p` to the segment [a, b].
double segmentDistance(const Point2 & p, const Point2 & a, const Point2 & b);

} // namespace foothold
