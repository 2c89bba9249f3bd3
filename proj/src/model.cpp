#include <foothold/model.h>

#include <cmath>

#include <foothold/error.h>

namespace foothold
{

const char * toString(Side s)
{
  return s == Side::Left ? "left" : "right";
}

const char * toString(WalkPhase p)
{
  switch(p)
  {
    case WalkPhase::DoubleSupport:
      return "double_support";
    case WalkPhase::Exploring:
      return "exploring";
    case WalkPhase::Swing:
      return "swing";
  }
  return "unknown";
}

void RobotModel::validate() const
{
  lipm.validate();
  if(!(flywheelInertia > 0.) || !(flywheelRateLimit >= 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "model.flywheel_inertia must be positive");
  }
  if(!(soleLength > 0.) || !(soleWidth > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "robot sole dimensions must be positive");
  }
  if(!(friction > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "model.friction must be positive");
  }
  if(!(comAccelLimit > 0.) || !(footTiltLimit > 0.) || !(footTiltRateLimit > 0.) || !(footTiltAccelLimit > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "robot acceleration and tilt limits must be positive");
  }
}

Plane3 FootState::plane() const
{
  Plane3 p;
  p.point = Eigen::Vector3d(tiltAxis.point.x(), tiltAxis.point.y(), 0.);
  p.normal = Eigen::Vector3d(-std::sin(tilt) * liftDirection.x(), -std::sin(tilt) * liftDirection.y(), std::cos(tilt));
  return p;
}

Eigen::Vector3d FootState::angularVelocity() const
{
  return tiltRate * Eigen::Vector3d(liftDirection.y(), -liftDirection.x(), 0.);
}

Eigen::VectorXd ReducedBipedState::positions() const
{
  Eigen::VectorXd q(kNumDofs);
  q << com, flywheelAngle, foot(Side::Left).tilt, foot(Side::Right).tilt;
  return q;
}

Eigen::VectorXd ReducedBipedState::velocities() const
{
  Eigen::VectorXd v(kNumDofs);
  v << comVelocity, flywheelRate, foot(Side::Left).tiltRate, foot(Side::Right).tiltRate;
  return v;
}

} // namespace foothold
