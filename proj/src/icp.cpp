#include <foothold/icp.h>

#include <algorithm>
#include <cmath>

#include <foothold/error.h>

namespace foothold
{

double LipmParams::omega0() const
{
  return std::sqrt(gravity / height);
}

void LipmParams::validate() const
{
  if(!(mass > 0.) || !(gravity > 0.) || !(height > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "LIPM mass, gravity and height must be positive");
  }
}

void BalanceGains::validate() const
{
  if(!(kp >= 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "gains.k_p must be non-negative");
  }
  if(!(momentumWeightNominal > 0.) || !(momentumWeightMax >= momentumWeightNominal))
  {
    throw Error(ErrorCode::InvalidConfig, "gains: need 0 < momentum_weight_nominal <= momentum_weight_max");
  }
  if(!(edgeMargin > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "gains.edge_margin must be positive");
  }
  if(!(lungeTorqueLimit >= 0.) || !(flywheelAngleLimit >= 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "gains: lunge limits must be non-negative");
  }
}

Point2 computeIcp(const Point2 & com, const Eigen::Vector2d & comVelocity, const LipmParams & params)
{
  return com + comVelocity / params.omega0();
}

Eigen::Vector2d icpDynamics(const Point2 & icp, const Point2 & cmp, const LipmParams & params)
{
  return params.omega0() * (icp - cmp);
}

Point2 cmpControlLaw(const Point2 & icp, const IcpTarget & reference, const LipmParams & params,
                     const BalanceGains & gains)
{
  return icp - reference.velocity / params.omega0() + gains.kp * (icp - reference.icp);
}

Eigen::Vector2d desiredLinearMomentumRate(const Point2 & com, const Point2 & desiredCmp, const LipmParams & params)
{
  return params.mass * params.gravity / params.height * (com - desiredCmp);
}

Eigen::Vector2d angularMomentumRate(const Point2 & cmp, const Point2 & cop, const LipmParams & params)
{
  return params.mass * params.gravity * (cmp - cop);
}

Eigen::Vector2d comTorqueFromOffset(const Eigen::Vector2d & groundForm)
{
  return {-groundForm.y(), groundForm.x()};
}

Eigen::Vector2d offsetFromComTorque(const Eigen::Vector2d & torque)
{
  return {torque.y(), -torque.x()};
}

IcpReference::IcpReference(std::vector<IcpSegment> segments, Point2 finalIcp, double omega0)
: segments_(std::move(segments)), finalIcp_(std::move(finalIcp)), omega0_(omega0)
{
}

IcpReference IcpReference::constant(const Point2 & icp, double omega0)
{
  return IcpReference({}, icp, omega0);
}

double IcpReference::duration() const
{
  double total = 0.;
  for(const auto & s : segments_)
  {
    total += s.duration;
  }
  return total;
}

Point2 IcpReference::segmentEnd(std::size_t k) const
{
  const IcpSegment & s = segments_.at(k);
  return s.cmp + (s.icpStart - s.cmp) * std::exp(omega0_ * s.duration);
}

IcpTarget IcpReference::evaluate(double t) const
{
  double start = 0.;
  for(const auto & s : segments_)
  {
    if(t < start + s.duration)
    {
      const double local = std::max(0., t - start);
      IcpTarget out;
      out.icp = s.cmp + (s.icpStart - s.cmp) * std::exp(omega0_ * local);
      out.velocity = omega0_ * (out.icp - s.cmp);
      return out;
    }
    start += s.duration;
  }
  return IcpTarget{finalIcp_, Eigen::Vector2d::Zero()};
}

Point2 IcpReference::cmpAt(double t) const
{
  double start = 0.;
  for(const auto & s : segments_)
  {
    if(t < start + s.duration)
    {
      return s.cmp;
    }
    start += s.duration;
  }
  return finalIcp_;
}

Point2 connectingCmp(const Point2 & from, const Point2 & to, double duration, double omega0)
{
  const double growth = std::exp(omega0 * duration);
  if(!(duration > 0.) || growth - 1. <= 1e-12)
  {
    throw Error(ErrorCode::InvalidArgument, "connecting segment needs a positive duration");
  }
  // to = c + (from - c) e^{w T}  =>  c = (from e^{w T} - to) / (e^{w T} - 1)
  return (from * growth - to) / (growth - 1.);
}

IcpReference IcpReference::withLeadIn(const Point2 & fromIcp, double duration) const
{
  const Point2 target = segments_.empty() ? finalIcp_ : segments_.front().icpStart;
  std::vector<IcpSegment> segments;
  segments.reserve(segments_.size() + 1);
  segments.push_back({duration, connectingCmp(fromIcp, target, duration, omega0_), fromIcp});
  segments.insert(segments.end(), segments_.begin(), segments_.end());
  return IcpReference(std::move(segments), finalIcp_, omega0_);
}

IcpReference buildIcpReference(const std::vector<PlannedFoothold> & footsteps, const std::vector<double> & swingTimes,
                               const std::vector<double> & transferTimes, const Point2 & finalIcp,
                               const LipmParams & params)
{
  if(footsteps.empty())
  {
    throw Error(ErrorCode::NoFootsteps, "ICP reference needs at least one footstep");
  }
  if(swingTimes.size() != footsteps.size() || transferTimes.size() != footsteps.size())
  {
    throw Error(ErrorCode::DimensionMismatch, "one swing and one transfer time per footstep");
  }
  const double omega0 = params.omega0();
  std::vector<IcpSegment> segments(footsteps.size());
  Point2 end = finalIcp;
  for(std::size_t k = footsteps.size(); k-- > 0;)
  {
    const double duration = swingTimes[k] + transferTimes[k];
    if(!(swingTimes[k] >= 0.) || !(transferTimes[k] >= 0.) || !(duration > 0.))
    {
      throw Error(ErrorCode::InvalidArgument, "footstep durations must be positive");
    }
    const Point2 & cmp = footsteps[k].centroid;
    segments[k].duration = duration;
    segments[k].cmp = cmp;
    segments[k].icpStart = cmp + (end - cmp) * std::exp(-omega0 * duration);
    end = segments[k].icpStart;
  }
  return IcpReference(std::move(segments), finalIcp, omega0);
}

Point2 adjustFinalIcp(const FootholdPolygon & /*stance*/, const FootholdPolygon & upcoming,
                      const Point2 & nominalFinalIcp, const Point2 & stanceCentroid, const FinalIcpAdjustment & config)
{
  const double ratio = config.fullSoleArea > 0. ? upcoming.area() / config.fullSoleArea : 1.;
  const double scale = std::clamp(ratio, config.minScale, 1.);
  return stanceCentroid + scale * (nominalFinalIcp - stanceCentroid);
}

double momentumWeightSchedule(const Point2 & icp, const FootholdPolygon & support, const BalanceGains & gains)
{
  if(support.empty())
  {
    return gains.momentumWeightMax;
  }
  const double d = support.signedDistance(icp);
  const double alpha = std::clamp((d + gains.edgeMargin) / (2. * gains.edgeMargin), 0., 1.);
  return gains.momentumWeightNominal + alpha * (gains.momentumWeightMax - gains.momentumWeightNominal);
}

} // namespace foothold
