#include <foothold/geometry.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include <foothold/error.h>

namespace foothold
{

Line2 Line2::through(const Point2 & point, const Eigen::Vector2d & direction)
{
  const double norm = direction.norm();
  if(!(norm > 0.) || !std::isfinite(norm))
  {
    throw Error(ErrorCode::InvalidArgument, "line direction must be a non-zero finite vector");
  }
  return Line2{point, direction / norm};
}

Eigen::Matrix2d Pose2::rotation() const
{
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

double polygonArea(std::span<const Point2> vertices)
{
  const std::size_t n = vertices.size();
  if(n < 3)
  {
    return 0.;
  }
  double twice = 0.;
  for(std::size_t i = 0; i < n; ++i)
  {
    twice += cross2(vertices[i], vertices[(i + 1) % n]);
  }
  return 0.5 * twice;
}

double segmentDistance(const Point2 & p, const Point2 & a, const Point2 & b)
{
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if(len2 <= 0.)
  {
    return (p - a).norm();
  }
  const double t = std::clamp(ab.dot(p - a) / len2, 0., 1.);
  return (p - (a + t * ab)).norm();
}

namespace
{

Point2 segmentClosest(const Point2 & p, const Point2 & a, const Point2 & b)
{
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if(len2 <= 0.)
  {
    return a;
  }
  const double t = std::clamp(ab.dot(p - a) / len2, 0., 1.);
  return a + t * ab;
}

double perimeter(const std::vector<Point2> & v)
{
  double total = 0.;
  for(std::size_t i = 0; i < v.size(); ++i)
  {
    total += (v[(i + 1) % v.size()] - v[i]).norm();
  }
  return total;
}

} // namespace

FootholdPolygon::FootholdPolygon(std::vector<Point2> vertices, std::string frame)
: vertices_(std::move(vertices)), frame_(std::move(frame))
{
  for(const auto & v : vertices_)
  {
    if(!v.allFinite())
    {
      throw Error(ErrorCode::InvalidArgument, "polygon vertices must be finite");
    }
  }
}

FootholdPolygon FootholdPolygon::rectangle(double length, double width, std::string frame)
{
  const double hx = 0.5 * length;
  const double hy = 0.5 * width;
  return FootholdPolygon({{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}, std::move(frame));
}

double FootholdPolygon::area() const
{
  return std::max(0., polygonArea(vertices_));
}

std::vector<Point2> FootholdPolygon::distinctVertices(double eps) const
{
  std::vector<Point2> out;
  for(const auto & v : vertices_)
  {
    if(out.empty() || (v - out.back()).norm() > eps)
    {
      out.push_back(v);
    }
  }
  while(out.size() > 1 && (out.front() - out.back()).norm() <= eps)
  {
    out.pop_back();
  }
  return out;
}

bool FootholdPolygon::isDegenerate(double eps) const
{
  const auto distinct = distinctVertices(eps);
  if(distinct.size() < 3)
  {
    return true;
  }
  const double per = perimeter(distinct);
  return 2. * polygonArea(distinct) <= eps * per;
}

Point2 FootholdPolygon::centroid() const
{
  if(vertices_.empty())
  {
    throw Error(ErrorCode::EmptyFoothold, "centroid of an empty polygon");
  }
  if(!isDegenerate())
  {
    const std::size_t n = vertices_.size();
    double twice = 0.;
    Point2 acc = Point2::Zero();
    for(std::size_t i = 0; i < n; ++i)
    {
      const Point2 & a = vertices_[i];
      const Point2 & b = vertices_[(i + 1) % n];
      const double c = cross2(a, b);
      twice += c;
      acc += (a + b) * c;
    }
    return acc / (3. * twice);
  }
  // Midpoint of the farthest pair.
  std::size_t bi = 0, bj = 0;
  double best = -1.;
  for(std::size_t i = 0; i < vertices_.size(); ++i)
  {
    for(std::size_t j = i; j < vertices_.size(); ++j)
    {
      const double d = (vertices_[i] - vertices_[j]).squaredNorm();
      if(d > best)
      {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  return 0.5 * (vertices_[bi] + vertices_[bj]);
}

bool FootholdPolygon::isConvex(double tol) const
{
  const auto v = distinctVertices();
  const std::size_t n = v.size();
  if(n < 3)
  {
    return true;
  }
  for(std::size_t i = 0; i < n; ++i)
  {
    const Eigen::Vector2d e0 = v[(i + 1) % n] - v[i];
    const Eigen::Vector2d e1 = v[(i + 2) % n] - v[(i + 1) % n];
    if(cross2(e0, e1) < -tol)
    {
      return false;
    }
  }
  return true;
}

double FootholdPolygon::signedDistance(const Point2 & p) const
{
  if(vertices_.empty())
  {
    return std::numeric_limits<double>::infinity();
  }
  const std::size_t n = vertices_.size();
  double boundary = std::numeric_limits<double>::infinity();
  for(std::size_t i = 0; i < n; ++i)
  {
    boundary = std::min(boundary, segmentDistance(p, vertices_[i], vertices_[(i + 1) % n]));
  }
  if(isDegenerate())
  {
    return boundary;
  }
  for(std::size_t i = 0; i < n; ++i)
  {
    const Eigen::Vector2d e = vertices_[(i + 1) % n] - vertices_[i];
    if(e.squaredNorm() <= 0.)
    {
      continue;
    }
    if(cross2(e, p - vertices_[i]) < 0.)
    {
      return boundary;
    }
  }
  return -boundary;
}

Point2 FootholdPolygon::closestPoint(const Point2 & p) const
{
  if(vertices_.empty())
  {
    throw Error(ErrorCode::EmptyFoothold, "closest point on an empty polygon");
  }
  if(signedDistance(p) <= 0. && !isDegenerate())
  {
    return p;
  }
  const std::size_t n = vertices_.size();
  Point2 best = vertices_.front();
  double bestDist = std::numeric_limits<double>::infinity();
  for(std::size_t i = 0; i < n; ++i)
  {
    const Point2 q = segmentClosest(p, vertices_[i], vertices_[(i + 1) % n]);
    const double d = (q - p).squaredNorm();
    if(d < bestDist)
    {
      bestDist = d;
      best = q;
    }
  }
  return best;
}

FootholdPolygon FootholdPolygon::transformed(const Pose2 & pose, std::string frame) const
{
  std::vector<Point2> out;
  out.reserve(vertices_.size());
  for(const auto & v : vertices_)
  {
    out.push_back(pose.toWorld(v));
  }
  return FootholdPolygon(std::move(out), std::move(frame));
}

FootholdPolygon FootholdPolygon::toLocal(const Pose2 & pose, std::string frame) const
{
  std::vector<Point2> out;
  out.reserve(vertices_.size());
  for(const auto & v : vertices_)
  {
    out.push_back(pose.toLocal(v));
  }
  return FootholdPolygon(std::move(out), std::move(frame));
}

FootholdPolygon convexHull(std::span<const Point2> points, double eps)
{
  if(points.empty())
  {
    throw Error(ErrorCode::EmptyPointSet, "convex hull of an empty point set");
  }
  std::vector<Point2> pts(points.begin(), points.end());
  for(const auto & p : pts)
  {
    if(!p.allFinite())
    {
      throw Error(ErrorCode::InvalidArgument, "convex hull input must be finite");
    }
  }
  std::sort(pts.begin(), pts.end(),
            [](const Point2 & a, const Point2 & b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  std::vector<Point2> unique;
  for(const auto & p : pts)
  {
    if(unique.empty() || (p - unique.back()).norm() > eps)
    {
      unique.push_back(p);
    }
  }
  if(unique.size() < 3)
  {
    if(unique.size() == 2 && (unique[0] - unique[1]).norm() <= eps)
    {
      unique.pop_back();
    }
    return FootholdPolygon(unique);
  }

  // Monotone chain; a middle point is dropped when it lies within eps of the chord.
  auto turnsLeft = [eps](const Point2 & o, const Point2 & a, const Point2 & b) {
    const double chord = (b - o).norm();
    return cross2(a - o, b - o) > eps * std::max(chord, 1e-300);
  };
  std::vector<Point2> hull(2 * unique.size());
  std::size_t k = 0;
  for(const auto & p : unique)
  {
    while(k >= 2 && !turnsLeft(hull[k - 2], hull[k - 1], p))
    {
      --k;
    }
    hull[k++] = p;
  }
  for(std::size_t i = unique.size() - 1, lower = k + 1; i-- > 0;)
  {
    const Point2 & p = unique[i];
    while(k >= lower && !turnsLeft(hull[k - 2], hull[k - 1], p))
    {
      --k;
    }
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return FootholdPolygon(hull);
}

FootholdPolygon cropPolygon(const FootholdPolygon & polygon, const Line2 & cut, const Point2 & keep, double eps)
{
  const double keepSide = cut.signedDistance(keep);
  if(std::abs(keepSide) <= eps)
  {
    throw Error(ErrorCode::InvalidArgument, "keep point lies on the cut line");
  }
  const double sign = keepSide > 0. ? 1. : -1.;
  const auto & v = polygon.vertices();
  const std::size_t n = v.size();
  std::vector<Point2> clipped;
  if(n == 1)
  {
    if(sign * cut.signedDistance(v[0]) >= -eps)
    {
      clipped.push_back(v[0]);
    }
  }
  else
  {
    for(std::size_t i = 0; i < n; ++i)
    {
      const Point2 & a = v[i];
      const Point2 & b = v[(i + 1) % n];
      const double da = sign * cut.signedDistance(a);
      const double db = sign * cut.signedDistance(b);
      if(da >= -eps)
      {
        clipped.push_back(a);
      }
      if((da > eps && db < -eps) || (da < -eps && db > eps))
      {
        const double t = da / (da - db);
        clipped.push_back(a + t * (b - a));
      }
    }
  }
  if(clipped.empty())
  {
    throw Error(ErrorCode::EmptyFoothold, "cropped foothold is empty");
  }
  FootholdPolygon hull = convexHull(clipped, eps);
  return FootholdPolygon(hull.vertices(), polygon.frame());
}

Line2 fitLineWeighted(std::span<const Point2> points, std::span<const double> weights)
{
  if(points.size() != weights.size())
  {
    throw Error(ErrorCode::DimensionMismatch, "fitLineWeighted: points and weights differ in length");
  }
  if(points.size() < 2)
  {
    throw Error(ErrorCode::DegenerateFit, "line fit needs at least two points");
  }
  double total = 0.;
  Point2 mean = Point2::Zero();
  for(std::size_t i = 0; i < points.size(); ++i)
  {
    if(!(weights[i] >= 0.) || !points[i].allFinite())
    {
      throw Error(ErrorCode::InvalidArgument, "line fit weights must be non-negative and points finite");
    }
    total += weights[i];
    mean += weights[i] * points[i];
  }
  if(!(total > 0.))
  {
    throw Error(ErrorCode::InvalidArgument, "line fit weights sum to zero");
  }
  mean /= total;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for(std::size_t i = 0; i < points.size(); ++i)
  {
    const Eigen::Vector2d d = points[i] - mean;
    cov += weights[i] * d * d.transpose();
  }
  cov /= total;
  if(cov.trace() <= kGeometryEpsilon * kGeometryEpsilon)
  {
    throw Error(ErrorCode::DegenerateFit, "all weighted points coincide");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  Eigen::Vector2d dir = eig.eigenvectors().col(1);
  if(dir.x() < 0. || (dir.x() == 0. && dir.y() < 0.))
  {
    dir = -dir;
  }
  return Line2::through(mean, dir);
}

void planeBasis(const Plane3 & plane, Eigen::Vector3d & e1, Eigen::Vector3d & e2)
{
  const Eigen::Vector3d & n = plane.normal;
  Eigen::Vector3d ref = Eigen::Vector3d::UnitX();
  if(std::abs(n.dot(ref)) > 0.9)
  {
    ref = Eigen::Vector3d::UnitY();
  }
  e1 = (ref - n * n.dot(ref)).normalized();
  e2 = n.cross(e1);
}

PlaneIntersection planeIntersection(const Plane3 & foot, const Plane3 & ground)
{
  const Eigen::Vector3d & n1 = foot.normal;
  const Eigen::Vector3d & n2 = ground.normal;
  if(std::abs(n1.norm() - 1.) > 1e-9 || std::abs(n2.norm() - 1.) > 1e-9)
  {
    throw Error(ErrorCode::InvalidArgument, "plane normals must be unit vectors");
  }
  const Eigen::Vector3d d = n1.cross(n2);
  const double s = d.norm();
  if(s < 1e-8)
  {
    throw Error(ErrorCode::ParallelPlanes, "foot and ground planes are parallel");
  }
  PlaneIntersection out;
  out.theta = std::atan2(s, std::abs(n1.dot(n2)));
  out.direction3 = d / s;

  // Point on both planes closest to the ground plane origin.
  Eigen::Matrix3d M;
  M.row(0) = n1.transpose();
  M.row(1) = n2.transpose();
  M.row(2) = out.direction3.transpose();
  const Eigen::Vector3d rhs(n1.dot(foot.point), n2.dot(ground.point), out.direction3.dot(ground.point));
  out.point3 = M.partialPivLu().solve(rhs);

  Eigen::Vector3d e1, e2;
  planeBasis(ground, e1, e2);
  const Eigen::Vector3d rel = out.point3 - ground.point;
  const Eigen::Vector2d dir2(out.direction3.dot(e1), out.direction3.dot(e2));
  out.axis = Line2::through(Point2(rel.dot(e1), rel.dot(e2)), dir2);
  return out;
}

namespace
{

/// Intersection of the lines (a0 + t (a1 - a0)) and (b0 + s (b1 - b0)); false when near-parallel.
bool lineIntersection(const Point2 & a0, const Point2 & a1, const Point2 & b0, const Point2 & b1, Point2 & out)
{
  const Eigen::Vector2d da = a1 - a0;
  const Eigen::Vector2d db = b1 - b0;
  const double denom = cross2(da, db);
  if(std::abs(denom) <= 1e-12 * da.norm() * db.norm())
  {
    return false;
  }
  const double t = cross2(b0 - a0, db) / denom;
  out = a0 + t * da;
  return true;
}

} // namespace

namespace
{

/// Area of the intersection of two convex polygons (clips `a` by every edge of `b`).
double overlapArea(const FootholdPolygon & a, const FootholdPolygon & b)
{
  FootholdPolygon clipped = a;
  const auto edges = b.distinctVertices();
  for(std::size_t i = 0; i < edges.size(); ++i)
  {
    const Point2 & p = edges[i];
    const Point2 & q = edges[(i + 1) % edges.size()];
    const Line2 line = Line2::through(p, q - p);
    try
    {
      clipped = cropPolygon(clipped, line, p + line.normal());
    }
    catch(const Error &)
    {
      return 0.;
    }
  }
  return clipped.area();
}

/// Largest quadrilateral with vertices among `v` (CCW): split on the best diagonal (a, c).
std::vector<Point2> bestInscribedQuad(const std::vector<Point2> & v)
{
  const std::size_t n = v.size();
  auto tri = [&](std::size_t i, std::size_t j, std::size_t k) { return 0.5 * cross2(v[j] - v[i], v[k] - v[i]); };
  double best = -1.;
  std::array<std::size_t, 4> pick{0, 1, 2, 3};
  for(std::size_t a = 0; a < n; ++a)
  {
    for(std::size_t c = a + 2; c < n; ++c)
    {
      if(a == 0 && c == n - 1)
      {
        continue;
      }
      double left = -1., right = -1.;
      std::size_t bl = a + 1, br = (c + 1) % n;
      for(std::size_t b = a + 1; b < c; ++b)
      {
        const double t = tri(a, b, c);
        if(t > left)
        {
          left = t;
          bl = b;
        }
      }
      for(std::size_t d = (c + 1) % n; d != a; d = (d + 1) % n)
      {
        const double t = tri(c, d, a);
        if(t > right)
        {
          right = t;
          br = d;
        }
      }
      if(left + right > best)
      {
        best = left + right;
        pick = {a, bl, c, br};
      }
    }
  }
  std::sort(pick.begin(), pick.end());
  return {v[pick[0]], v[pick[1]], v[pick[2]], v[pick[3]]};
}

} // namespace

FootholdPolygon reduceToFourCorners(const FootholdPolygon & polygon, double maxDilation)
{
  if(polygon.empty())
  {
    throw Error(ErrorCode::EmptyFoothold, "cannot reduce an empty polygon");
  }
  const FootholdPolygon original = convexHull(polygon.vertices());
  std::vector<Point2> v = original.vertices();

  if(v.size() <= 4)
  {
    switch(v.size())
    {
      case 1: v = {v[0], v[0], v[0], v[0]}; break;
      case 2: v = {v[0], v[0], v[1], v[1]}; break;
      case 3: v = {v[0], v[1], v[2], v[2]}; break;
      default: break;
    }
    return FootholdPolygon(v, polygon.frame());
  }

  while(v.size() > 4)
  {
    const std::size_t n = v.size();
    double bestCost = std::numeric_limits<double>::infinity();
    std::size_t bestIndex = 0;
    bool bestIsMerge = false;
    Point2 bestPoint = Point2::Zero();
    for(std::size_t i = 0; i < n; ++i)
    {
      const Point2 & prev = v[(i + n - 1) % n];
      const Point2 & cur = v[i];
      const Point2 & next = v[(i + 1) % n];
      const Point2 & after = v[(i + 2) % n];

      // Drop vertex i.
      const double dropLoss = 0.5 * cross2(cur - prev, next - prev);
      if(dropLoss < bestCost)
      {
        bestCost = dropLoss;
        bestIndex = i;
        bestIsMerge = false;
      }

      // Merge edge (i, i+1) into the intersection of the neighbouring edge extensions.
      Point2 apex;
      if(lineIntersection(prev, cur, after, next, apex))
      {
        const bool ahead = (apex - cur).dot(cur - prev) >= 0. && (apex - next).dot(next - after) >= 0.;
        if(ahead && original.signedDistance(apex) <= maxDilation)
        {
          const double gain = 0.5 * std::abs(cross2(apex - cur, next - cur));
          if(gain < bestCost)
          {
            bestCost = gain;
            bestIndex = i;
            bestIsMerge = true;
            bestPoint = apex;
          }
        }
      }
      else
      {
        // Near-parallel neighbours: collapse the edge to its midpoint.
        const Point2 mid = 0.5 * (cur + next);
        const std::vector<Point2> before{prev, cur, next, after};
        const std::vector<Point2> afterMerge{prev, mid, after};
        const double loss = std::abs(polygonArea(before) - polygonArea(afterMerge));
        if(loss < bestCost)
        {
          bestCost = loss;
          bestIndex = i;
          bestIsMerge = true;
          bestPoint = mid;
        }
      }
    }
    if(bestIsMerge)
    {
      v[bestIndex] = bestPoint;
      v.erase(v.begin() + static_cast<std::ptrdiff_t>((bestIndex + 1) % n));
    }
    else
    {
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(bestIndex));
    }
  }
  // Greedy merging can get stuck on far-from-optimal configurations; keep the
  // exact inscribed quadrilateral when it retains more of the original area.
  const std::vector<Point2> inscribed = bestInscribedQuad(original.vertices());
  FootholdPolygon merged(v, polygon.frame());
  FootholdPolygon subset(inscribed, polygon.frame());
  if(polygonArea(inscribed) > overlapArea(merged, original))
  {
    return subset;
  }
  return merged;
}

} // namespace foothold
