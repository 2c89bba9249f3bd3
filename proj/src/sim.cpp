#include <foothold/sim.h>

#include <algorithm>
#include <cmath>

#include <foothold/error.h>

namespace foothold
{

void NoiseConfig::validate() const
{
  for(double s : {copSigma, gyroSigma, comSigma, comVelocitySigma, placementSigma})
  {
    if(!(s >= 0.) || !std::isfinite(s))
    {
      throw Error(ErrorCode::InvalidConfig, "noise: sigmas must be finite and non-negative");
    }
  }
}

NoiseConfig NoiseConfig::scaled(double factor) const
{
  NoiseConfig n = *this;
  n.copSigma *= factor;
  n.gyroSigma *= factor;
  n.comSigma *= factor;
  n.comVelocitySigma *= factor;
  n.placementSigma *= factor;
  return n;
}

void SimConfig::validate() const
{
  if(!(dt > 1e-4) || !(dt <= 0.01))
  {
    throw Error(ErrorCode::InvalidConfig, "dt: must be in (1e-4, 0.01] s");
  }
  if(!(edgeCompliance >= 0.) || !(tipGain > 0.) || !(tipRateCap > 0.) || !(flatTilt > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "sim: edge_compliance must be non-negative and tip gains positive");
  }
}

namespace
{

struct FlywheelStep
{
  double accel = 0.;
  double angle = 0.;
  double rate = 0.;
  bool saturated = false;
};

constexpr double kFlywheelStopTolerance = 1e-3;

FlywheelStep flywheelAxis(double angle, double rate, double command, double aMax, double rateLimit, double angleLimit,
                          double dt)
{
  FlywheelStep s;
  double a = std::clamp(command, -aMax, aMax);
  s.saturated = a != command;
  if(rate + a * dt > rateLimit)
  {
    a = (rateLimit - rate) / dt;
    s.saturated = true;
  }
  else if(rate + a * dt < -rateLimit)
  {
    a = (-rateLimit - rate) / dt;
    s.saturated = true;
  }
  double next = angle + rate * dt + 0.5 * a * dt * dt;
  if(std::abs(next) > angleLimit)
  {
    // Hard stop: the flywheel lands on the limit and keeps no outward rate.
    const double limit = std::copysign(angleLimit, next);
    a = 2. * (limit - angle - rate * dt) / (dt * dt);
    if((rate + a * dt) * limit < 0.)
    {
      a = -rate / dt;
    }
    next = limit;
    s.saturated = true;
  }
  if(std::abs(next) >= angleLimit - kFlywheelStopTolerance)
  {
    s.saturated = true;
  }
  s.accel = a;
  s.angle = next;
  s.rate = rate + a * dt;
  return s;
}

} // namespace

ReducedBipedState stepDynamics(const ReducedBipedState & state, const ActuationCommand & command,
                               const RobotModel & model, const BalanceGains & gains, const SimConfig & config,
                               TickRecord * record)
{
  const double dt = config.dt;
  const double m = model.lipm.mass;
  const double mg = m * model.lipm.gravity;
  const double w = model.lipm.omega0();
  ReducedBipedState next = state;
  next.t = state.t + dt;
  TickRecord rec;

  double fzTotal = 0.;
  for(std::size_t i = 0; i < 2; ++i)
  {
    const auto & f = state.feet[i];
    if(f.inContact && !f.trueContact.empty() && command.feet[i].loaded)
    {
      fzTotal += std::max(command.feet[i].fz, 0.);
    }
  }

  Point2 cop = Point2::Zero();
  for(std::size_t i = 0; i < 2; ++i)
  {
    FootState & f = next.feet[i];
    const FootCommand & c = command.feet[i];
    if(!f.inContact)
    {
      f.tilt = 0.;
      f.tiltRate = 0.;
      f.load = 0.;
      continue;
    }
    const bool supported = !f.trueContact.empty() && c.loaded && fzTotal > 0.;
    const double fz = supported ? mg * std::max(c.fz, 0.) / fzTotal : 0.;
    f.load = fz;
    Point2 achieved = f.trueContact.empty() ? c.cop : f.trueContact.closestPoint(c.cop);
    const double excess = (c.cop - achieved).norm();
    if(fz > 0. && excess > config.edgeCompliance)
    {
      const Eigen::Vector2d out = (c.cop - achieved) / excess;
      const double rate = std::min(config.tipGain * fz * excess, config.tipRateCap);
      if(f.tilt > config.flatTilt && out.dot(f.liftDirection) > 0.)
      {
        // Pushing on the lifted side rolls the foot back down.
        f.tilt = std::max(f.tilt - rate * dt, 0.);
        f.tiltRate = f.tilt > 0. ? -rate : 0.;
      }
      else
      {
        f.tiltAxis = Line2::through(achieved, perp(out));
        f.liftDirection = -out;
        f.tiltRate = rate;
        f.tilt = std::min(f.tilt + rate * dt, 0.5 * 3.14159265358979323846);
        rec.tipping[i] = true;
      }
    }
    else
    {
      const double a = c.tiltAccel;
      double tilt = f.tilt + f.tiltRate * dt + 0.5 * a * dt * dt;
      double rate = f.tiltRate + a * dt;
      if(tilt <= 0.)
      {
        tilt = 0.;
        rate = 0.;
      }
      f.tilt = tilt;
      f.tiltRate = rate;
    }
    if(f.tilt > config.flatTilt && !f.trueContact.empty())
    {
      // A tilted foot only bears load along its pivot line.
      achieved = f.trueContact.closestPoint(f.tiltAxis.project(achieved));
    }
    f.cop = achieved;
    rec.footCop[i] = f.pose.toWorld(achieved);
    rec.footFz[i] = fz;
    cop += fz * rec.footCop[i];
  }
  const bool grounded = fzTotal > 0.;
  cop = grounded ? Point2(cop / mg) : state.com;

  const double aMax = gains.lungeTorqueLimit / model.flywheelInertia;
  Eigen::Vector2d accel;
  next.flywheelSaturated = false;
  for(int k = 0; k < 2; ++k)
  {
    const auto s = flywheelAxis(state.flywheelAngle[k], state.flywheelRate[k], command.flywheelAccel[k], aMax,
                                model.flywheelRateLimit, gains.flywheelAngleLimit, dt);
    accel[k] = s.accel;
    next.flywheelAngle[k] = s.angle;
    next.flywheelRate[k] = s.rate;
    next.flywheelSaturated = next.flywheelSaturated || s.saturated;
  }
  const Eigen::Vector2d torque = model.flywheelInertia * accel;
  const Point2 cmp = grounded ? Point2(cop + offsetFromComTorque(torque) / mg) : state.com;

  // Exact LIPM solution with the CMP held over the tick.
  const double ch = std::cosh(w * dt);
  const double sh = std::sinh(w * dt);
  const Eigen::Vector2d d = state.com - cmp;
  next.com = cmp + d * ch + state.comVelocity * (sh / w);
  next.comVelocity = d * (w * sh) + state.comVelocity * ch;

  rec.cop = cop;
  rec.cmp = cmp;
  rec.flywheelTorque = torque;
  rec.force = m * (next.comVelocity - state.comVelocity) / dt;
  if(record)
  {
    *record = rec;
  }
  return next;
}

ReducedBipedState applyPush(const ReducedBipedState & state, const Eigen::Vector2d & impulse, const RobotModel & model)
{
  if(!impulse.allFinite())
  {
    throw Error(ErrorCode::InvalidArgument, "push impulse must be finite");
  }
  ReducedBipedState next = state;
  next.comVelocity += impulse / model.lipm.mass;
  return next;
}

SensorBundle sense(const ReducedBipedState & state, const NoiseConfig & noise, const RobotModel & model,
                   std::mt19937_64 & rng)
{
  std::normal_distribution<double> n(0., 1.);
  const FootholdPolygon sole = model.sole();
  SensorBundle out;
  for(std::size_t i = 0; i < 2; ++i)
  {
    const FootState & f = state.feet[i];
    FootSensors & s = out.feet[i];
    const double cx = n(rng), cy = n(rng);
    const double gx = n(rng), gy = n(rng), gz = n(rng);
    s.inContact = f.inContact;
    s.load = f.load;
    s.plane = f.plane();
    s.angularVelocity = f.angularVelocity() + noise.gyroSigma * Eigen::Vector3d(gx, gy, gz);
    s.cop = f.cop + noise.copSigma * Point2(cx, cy);
    if(!sole.contains(s.cop, 0.))
    {
      s.cop = sole.closestPoint(s.cop);
    }
  }
  const double px = n(rng), py = n(rng), vx = n(rng), vy = n(rng);
  out.com = state.com + noise.comSigma * Point2(px, py);
  out.comVelocity = state.comVelocity + noise.comVelocitySigma * Eigen::Vector2d(vx, vy);
  return out;
}

const char * toString(TerrainKind k)
{
  switch(k)
  {
    case TerrainKind::Full:
      return "full";
    case TerrainKind::Line:
      return "line";
    case TerrainKind::Point:
      return "point";
    case TerrainKind::Polygon:
      return "polygon";
  }
  return "unknown";
}

TerrainKind terrainKindFromString(const std::string & s)
{
  if(s == "full")
  {
    return TerrainKind::Full;
  }
  if(s == "line")
  {
    return TerrainKind::Line;
  }
  if(s == "point")
  {
    return TerrainKind::Point;
  }
  if(s == "polygon")
  {
    return TerrainKind::Polygon;
  }
  throw Error(ErrorCode::InvalidConfig, "terrain.type: unknown kind '" + s + "'");
}

Line2 TerrainSpec::line() const
{
  const Eigen::Vector2d d(std::cos(angle), std::sin(angle));
  return Line2::through(offset * perp(d), d);
}

FootholdPolygon TerrainSpec::region(const FootholdPolygon & sole) const
{
  switch(kind)
  {
    case TerrainKind::Full:
      return sole;
    case TerrainKind::Line:
    {
      const Line2 l = line();
      return FootholdPolygon({l.point - l.direction, l.point + l.direction});
    }
    case TerrainKind::Point:
    {
      const double h = 0.5 * size;
      return FootholdPolygon({point + Point2(-h, -h), point + Point2(h, -h), point + Point2(h, h), point + Point2(-h, h)});
    }
    case TerrainKind::Polygon:
      return convexHull(vertices);
  }
  return sole;
}

FootholdPolygon intersectConvex(const FootholdPolygon & a, const FootholdPolygon & b)
{
  FootholdPolygon out = a;
  const auto v = b.distinctVertices();
  const Point2 inside = b.centroid();
  for(std::size_t i = 0; i < v.size(); ++i)
  {
    const Point2 & p = v[i];
    const Point2 & q = v[(i + 1) % v.size()];
    out = cropPolygon(out, Line2::through(p, q - p), inside);
  }
  return out;
}

FootholdPolygon trueContactAt(const TerrainSpec & terrain, const Pose2 & planned, const Pose2 & actual,
                              const FootholdPolygon & sole)
{
  if(terrain.kind == TerrainKind::Full)
  {
    return sole;
  }
  const FootholdPolygon local = terrain.region(sole).transformed(planned, "world").toLocal(actual, "sole");
  try
  {
    return intersectConvex(local, sole);
  }
  catch(const Error & e)
  {
    if(e.code() != ErrorCode::EmptyFoothold)
    {
      throw;
    }
    return FootholdPolygon();
  }
}

} // namespace foothold
