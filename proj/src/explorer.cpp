#include <foothold/explorer.h>

#include <algorithm>
#include <cmath>

#include <foothold/error.h>

namespace foothold
{

namespace
{

constexpr double kParallelTheta = 1e-6;

const Plane3 kGround{Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()};

void pushDistinct(std::vector<Point2> & out, const Point2 & p)
{
  if(out.empty() || (out.back() - p).norm() > kGeometryEpsilon)
  {
    out.push_back(p);
  }
}

/// Parameter range of `line` inside a convex polygon, false when it misses.
bool clipLine(const Line2 & line, const FootholdPolygon & poly, double & t0, double & t1)
{
  t0 = -1e9;
  t1 = 1e9;
  const auto & v = poly.vertices();
  for(std::size_t i = 0; i < v.size(); ++i)
  {
    const Point2 & a = v[i];
    const Point2 & b = v[(i + 1) % v.size()];
    const Eigen::Vector2d e = b - a;
    if(e.norm() <= kGeometryEpsilon)
    {
      continue;
    }
    // Inside is left of each CCW edge: cross(e, p - a) >= 0.
    const double c0 = cross2(e, line.point - a);
    const double c1 = cross2(e, line.direction);
    if(std::abs(c1) < 1e-15)
    {
      if(c0 < 0.)
      {
        return false;
      }
      continue;
    }
    const double t = -c0 / c1;
    if(c1 > 0.)
    {
      t0 = std::max(t0, t);
    }
    else
    {
      t1 = std::min(t1, t);
    }
  }
  return t1 >= t0;
}

std::vector<double> decayedWeights(const std::vector<CopSample> & history, double decay)
{
  std::vector<double> w(history.size());
  double factor = 1.;
  for(std::size_t k = history.size(); k-- > 0;)
  {
    w[k] = history[k].weight * factor;
    factor *= decay;
  }
  return w;
}

void finish(ExplorationState & s, const ExplorerConfig & cfg, std::optional<FootholdPolygon> & update)
{
  FootholdPolygon estimate;
  if(cfg.prior == PriorGeometry::None && s.trace.crops.empty())
  {
    // Nothing tipped: the whole assumed foothold held every probe.
    estimate = reduceToFourCorners(s.assumedFoothold);
  }
  else
  {
    try
    {
      estimate = estimateFromHistory(s, cfg);
    }
    catch(const Error &)
    {
      estimate = reduceToFourCorners(s.assumedFoothold);
    }
  }
  s.phase = ExplorePhase::Done;
  s.trace.finalFoothold = estimate;
  s.trace.duration = s.elapsed;
  s.desiredCop = estimate.centroid();
  update = estimate;
}

} // namespace

const char * toString(ExplorePhase p)
{
  switch(p)
  {
    case ExplorePhase::Idle:
      return "idle";
    case ExplorePhase::Probing:
      return "probing";
    case ExplorePhase::Settling:
      return "settling";
    case ExplorePhase::Done:
      return "done";
  }
  return "unknown";
}

const char * toString(PriorGeometry p)
{
  switch(p)
  {
    case PriorGeometry::None:
      return "none";
    case PriorGeometry::Line:
      return "line";
    case PriorGeometry::Point:
      return "point";
  }
  return "unknown";
}

const char * toString(DetectionSource s)
{
  return s == DetectionSource::Velocity ? "velocity" : "geometric";
}

PriorGeometry priorFromString(const std::string & s)
{
  if(s == "none")
  {
    return PriorGeometry::None;
  }
  if(s == "line")
  {
    return PriorGeometry::Line;
  }
  if(s == "point")
  {
    return PriorGeometry::Point;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown prior geometry '" + s + "'");
}

void ExplorerConfig::validate() const
{
  if(!(omegaThreshold > 0.) || !(thetaThreshold > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "exploration thresholds must be positive");
  }
  if(!(historyWeightDecay > 0.) || historyWeightDecay > 1.)
  {
    throw Error(ErrorCode::InvalidConfig, "exploration.history_weight_decay must be in (0, 1]");
  }
  if(!(waypointDwell > 0.) || !(samplePeriod > 0.) || !(settleDwell >= 0.) || !(timeout > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "exploration durations must be positive");
  }
  if(!(waypointInset >= 0.) || !(stripWidth > 0.) || velocityConfirmSamples < 1)
  {
    throw Error(ErrorCode::InvalidConfig, "exploration inset, strip width and confirmation count must be positive");
  }
}

ExplorationState ExplorationState::start(const FootholdPolygon & assumed, const ExplorerConfig & cfg)
{
  ExplorationState s;
  s.phase = ExplorePhase::Probing;
  s.assumedFoothold = assumed;
  s.sole = assumed;
  s.waypoints = planWaypoints(assumed, cfg.waypointInset);
  s.desiredCop = s.waypoints.front();
  s.trace.waypoints.push_back({0., s.desiredCop});
  return s;
}

std::vector<Point2> planWaypoints(const FootholdPolygon & assumed, double inset)
{
  const Point2 c = assumed.centroid();
  std::vector<Point2> out{c};
  const auto distinct = assumed.distinctVertices();
  if(distinct.size() <= 1)
  {
    return out;
  }
  const bool area = !assumed.isDegenerate() && distinct.size() >= 3;
  const std::size_t n = distinct.size();
  for(std::size_t i = 0; i < n; ++i)
  {
    const Point2 & v = distinct[i];
    const double toCentroid = (c - v).norm();
    Point2 w;
    if(area)
    {
      const Point2 & prev = distinct[(i + n - 1) % n];
      const Point2 & next = distinct[(i + 1) % n];
      const Eigen::Vector2d n1 = perp((v - prev).normalized());
      const Eigen::Vector2d n2 = perp((next - v).normalized());
      const Eigen::Vector2d offset = inset * (n1 + n2) / (1. + n1.dot(n2));
      w = v + offset;
      if(offset.norm() >= 0.5 * toCentroid || assumed.signedDistance(w) > -inset + 1e-9)
      {
        w = v + 0.5 * (c - v);
      }
    }
    else
    {
      const double step = std::min(inset, 0.5 * toCentroid);
      w = toCentroid > kGeometryEpsilon ? Point2(v + step * (c - v) / toCentroid) : v;
    }
    pushDistinct(out, w);
  }
  pushDistinct(out, c);
  return out;
}

std::optional<RotationDetection> detectRotationVelocity(const Eigen::Vector3d & footAngularVelocity,
                                                        const ExplorerConfig & cfg)
{
  const Eigen::Vector2d tangential = footAngularVelocity.head<2>();
  const double omega = tangential.norm();
  if(!std::isfinite(omega) || omega <= cfg.omegaThreshold)
  {
    return std::nullopt;
  }
  RotationDetection d;
  d.axis = Line2::through(Point2::Zero(), tangential);
  d.omega = omega;
  d.source = DetectionSource::Velocity;
  return d;
}

std::optional<RotationDetection> detectRotationGeometric(const Plane3 & footPlane, const Plane3 & groundPlane,
                                                         const ExplorerConfig & cfg)
{
  PlaneIntersection r;
  try
  {
    r = planeIntersection(footPlane, groundPlane);
  }
  catch(const Error & e)
  {
    if(e.code() == ErrorCode::ParallelPlanes)
    {
      return std::nullopt;
    }
    throw;
  }
  if(r.theta <= cfg.thetaThreshold)
  {
    return std::nullopt;
  }
  RotationDetection d;
  d.axis = r.axis;
  d.theta = r.theta;
  d.source = DetectionSource::Geometric;
  return d;
}

ExplorationState applyRotationCrop(const ExplorationState & state, const RotationDetection & det,
                                   const Point2 & measuredCop, const ExplorerConfig & cfg)
{
  ExplorationState s = state;
  const Line2 & axis = det.axis;
  const double dMeasured = axis.signedDistance(measuredCop);
  const double dDesired = axis.signedDistance(state.desiredCop);
  Point2 keep;
  if(std::abs(dMeasured) > cfg.keepMargin)
  {
    keep = measuredCop;
  }
  else if(std::abs(dDesired) > kGeometryEpsilon)
  {
    keep = state.desiredCop - 2. * dDesired * axis.normal();
  }
  else
  {
    // Keep whichever side holds more of the current estimate.
    const Point2 a = state.assumedFoothold.centroid() + 1e-3 * axis.normal();
    const Point2 b = state.assumedFoothold.centroid() - 1e-3 * axis.normal();
    double areaA = 0., areaB = 0.;
    try
    {
      areaA = cropPolygon(state.assumedFoothold, axis, a).area();
    }
    catch(const Error &)
    {
    }
    try
    {
      areaB = cropPolygon(state.assumedFoothold, axis, b).area();
    }
    catch(const Error &)
    {
    }
    keep = areaA >= areaB ? a : b;
  }
  if(std::abs(axis.signedDistance(keep)) <= kGeometryEpsilon)
  {
    keep += 1e-6 * axis.normal();
  }
  try
  {
    s.assumedFoothold = cropPolygon(state.assumedFoothold, axis, keep);
  }
  catch(const Error & e)
  {
    if(e.code() != ErrorCode::EmptyFoothold)
    {
      throw;
    }
    s.assumedFoothold = FootholdPolygon(std::vector<Point2>(4, state.assumedFoothold.closestPoint(measuredCop)));
  }
  s.trace.crops.push_back({state.elapsed, det, keep, s.assumedFoothold.area()});
  return s;
}

FootholdPolygon estimateFromHistory(const ExplorationState & state, const ExplorerConfig & cfg)
{
  const auto & history = state.copHistory;
  if(history.empty())
  {
    throw Error(ErrorCode::EmptyPointSet, "no CoP history to estimate from");
  }
  std::vector<Point2> points;
  points.reserve(history.size());
  for(const auto & h : history)
  {
    points.push_back(h.cop);
  }
  const std::vector<double> weights = decayedWeights(history, cfg.historyWeightDecay);

  switch(cfg.prior)
  {
    case PriorGeometry::None:
      return reduceToFourCorners(convexHull(points));
    case PriorGeometry::Point:
    {
      Point2 c = Point2::Zero();
      double total = 0.;
      for(std::size_t k = 0; k < points.size(); ++k)
      {
        c += weights[k] * points[k];
        total += weights[k];
      }
      c /= total;
      return FootholdPolygon(std::vector<Point2>(4, c));
    }
    case PriorGeometry::Line:
    {
      const Line2 line = fitLineWeighted(points, weights);
      const FootholdPolygon & bound = state.sole.empty() ? state.assumedFoothold : state.sole;
      const Eigen::Vector2d h = 0.5 * cfg.stripWidth * line.normal();
      double t0 = 0., t1 = 0.;
      if(!clipLine(line, bound, t0, t1))
      {
        t0 = 1e9;
        t1 = -1e9;
        for(const auto & p : points)
        {
          const double t = line.direction.dot(p - line.point);
          t0 = std::min(t0, t);
          t1 = std::max(t1, t);
        }
      }
      // Each strip edge is clipped to the sole on its own, so the strip never leaves it.
      std::vector<Point2> corners;
      for(double side : {-1., 1.})
      {
        Line2 edge = line;
        edge.point += side * h;
        double s0 = t0, s1 = t1;
        if(!clipLine(edge, bound, s0, s1))
        {
          s0 = t0;
          s1 = t1;
        }
        corners.push_back(edge.point + s0 * edge.direction);
        corners.push_back(edge.point + s1 * edge.direction);
      }
      FootholdPolygon strip = convexHull(corners);
      return reduceToFourCorners(strip);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown prior geometry");
}

ExplorerOutput explorerStep(const ExplorationState & state, const ExplorerSensors & sensors, const ExplorerConfig & cfg,
                            double dt)
{
  if(!(dt > 0.))
  {
    throw Error(ErrorCode::InvalidArgument, "explorer step needs dt > 0");
  }
  ExplorerOutput out;
  out.state = state;
  ExplorationState & s = out.state;
  if(s.phase == ExplorePhase::Idle)
  {
    s = ExplorationState::start(state.assumedFoothold, cfg);
  }
  if(s.phase == ExplorePhase::Done)
  {
    out.desiredCop = s.desiredCop;
    return out;
  }
  s.elapsed += dt;

  // CoP history as short window averages of the loaded foot.
  if(sensors.load >= cfg.minLoad)
  {
    if(s.windowCount == 0)
    {
      s.windowStart = s.elapsed - dt;
    }
    s.windowSum += sensors.measuredCop;
    ++s.windowCount;
    if(s.elapsed - s.windowStart >= cfg.samplePeriod - 1e-12)
    {
      const double t = s.elapsed;
      if(s.copHistory.empty() || t > s.copHistory.back().t)
      {
        s.copHistory.push_back({t, s.windowSum / s.windowCount, 1.});
      }
      s.windowSum.setZero();
      s.windowCount = 0;
    }
  }
  else
  {
    s.windowSum.setZero();
    s.windowCount = 0;
  }

  double theta = 0.;
  std::optional<PlaneIntersection> geometric;
  try
  {
    geometric = planeIntersection(sensors.footPlane, kGround);
    theta = geometric->theta;
  }
  catch(const Error &)
  {
  }
  const bool rising = theta >= s.lastTheta - 1e-12;
  s.lastTheta = theta;
  const auto velocity = detectRotationVelocity(sensors.footAngularVelocity, cfg);
  s.velocityStreak = velocity ? s.velocityStreak + 1 : 0;
  const auto tilted = detectRotationGeometric(sensors.footPlane, kGround, cfg);

  if(s.phase == ExplorePhase::Settling && !rising)
  {
    s.tiltFalling = true;
  }
  const bool detected = rising && (tilted || s.velocityStreak >= cfg.velocityConfirmSamples);
  // A foot that rolls back through flat and tips again while settling is rotating about a new axis.
  if(detected && (s.phase == ExplorePhase::Probing || (s.phase == ExplorePhase::Settling && s.tiltFalling)))
  {
    RotationDetection det;
    if(tilted)
    {
      det = *tilted;
    }
    else
    {
      det = *velocity;
      if(geometric && theta > kParallelTheta)
      {
        // The plane intersection locates the axis even below the tilt threshold.
        det.axis = geometric->axis;
        det.theta = theta;
      }
      else
      {
        det.axis = Line2::through(sensors.measuredCop, det.axis.direction);
      }
    }
    s = applyRotationCrop(s, det, sensors.measuredCop, cfg);
    s.phase = ExplorePhase::Settling;
    s.settleTime = 0.;
    s.velocityStreak = 0;
    s.tiltFalling = false;
    // Hold the CoP on the rotation line so the foot can flatten.
    s.desiredCop = s.assumedFoothold.closestPoint(det.axis.project(sensors.measuredCop));
  }
  else if(s.phase == ExplorePhase::Settling)
  {
    s.settleTime += dt;
    const bool flat = theta <= 0.5 * cfg.thetaThreshold && sensors.footAngularVelocity.head<2>().norm() < cfg.omegaThreshold;
    if(s.settleTime >= cfg.settleDwell && flat)
    {
      s.phase = ExplorePhase::Probing;
      s.waypoints = planWaypoints(s.assumedFoothold, cfg.waypointInset);
      s.waypointIndex = 0;
      s.waypointTime = 0.;
      s.desiredCop = s.waypoints.front();
      s.trace.waypoints.push_back({s.elapsed, s.desiredCop});
    }
  }
  else if(s.phase == ExplorePhase::Probing)
  {
    s.waypointTime += dt;
    if(s.waypointTime >= cfg.waypointDwell - 1e-12)
    {
      ++s.waypointIndex;
      s.waypointTime = 0.;
      if(s.waypointIndex >= s.waypoints.size())
      {
        finish(s, cfg, out.footholdUpdate);
      }
      else
      {
        s.desiredCop = s.waypoints[s.waypointIndex];
        s.trace.waypoints.push_back({s.elapsed, s.desiredCop});
      }
    }
  }

  if(s.phase != ExplorePhase::Done && s.elapsed >= cfg.timeout)
  {
    finish(s, cfg, out.footholdUpdate);
  }
  out.desiredCop = s.desiredCop;
  return out;
}

} // namespace foothold
