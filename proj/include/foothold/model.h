#pragma once

#include <array>

#include <foothold/geometry.h>
#include <foothold/icp.h>

namespace foothold
{

/// Generalized coordinate layout of the reduced biped.
enum Dof : Eigen::Index
{
  kComX = 0,
  kComY = 1,
  kFlywheelX = 2,
  kFlywheelY = 3,
  kTiltLeft = 4,
  kTiltRight = 5,
  kNumDofs = 6,
};

enum class Side
{
  Left = 0,
  Right = 1,
};

inline Eigen::Index tiltDof(Side s)
{
  return s == Side::Left ? kTiltLeft : kTiltRight;
}

inline Side other(Side s)
{
  return s == Side::Left ? Side::Right : Side::Left;
}

const char * toString(Side s);

/// Point-mass CoM at fixed height, a 2-axis flywheel at the CoM, and massless feet that can tip about an edge.
struct RobotModel
{
  LipmParams lipm;
  double flywheelInertia = 12.;
  double flywheelRateLimit = 6.;
  double soleLength = 0.26;
  double soleWidth = 0.13;
  double friction = 0.9;
  double comAccelLimit = 30.;
  double footTiltLimit = 0.3;
  double footTiltRateLimit = 3.;
  double footTiltAccelLimit = 200.;

  FootholdPolygon sole() const { return FootholdPolygon::rectangle(soleLength, soleWidth); }
  void validate() const;
};

struct FootState
{
  /// Sole pose on the ground (the tilt is reported separately).
  Pose2 pose;
  bool inContact = true;
  /// Tilt about `tiltAxis` (sole frame); the foot plane rises on the far side of the axis.
  double tilt = 0.;
  double tiltRate = 0.;
  Line2 tiltAxis = Line2::through(Point2::Zero(), Point2::UnitX());
  /// Unit sole-frame direction from the axis toward the lifted part.
  Eigen::Vector2d liftDirection = Eigen::Vector2d::UnitY();
  FootholdPolygon trueContact;
  FootholdPolygon assumedContact;
  double load = 0.;
  /// CoP actually applied by the ground last tick (sole frame).
  Point2 cop = Point2::Zero();

  /// Foot plane in the sole frame (passes through the tilt axis).
  Plane3 plane() const;
  /// Angular velocity of the foot in the sole frame.
  Eigen::Vector3d angularVelocity() const;
};

enum class WalkPhase
{
  DoubleSupport,
  Exploring,
  Swing,
};

const char * toString(WalkPhase p);

struct ReducedBipedState
{
  double t = 0.;
  Point2 com = Point2::Zero();
  Eigen::Vector2d comVelocity = Eigen::Vector2d::Zero();
  Eigen::Vector2d flywheelAngle = Eigen::Vector2d::Zero();
  Eigen::Vector2d flywheelRate = Eigen::Vector2d::Zero();
  std::array<FootState, 2> feet;
  WalkPhase phase = WalkPhase::DoubleSupport;
  Side swingSide = Side::Left;
  /// Set when a flywheel limit clamped the commanded acceleration during the last tick.
  bool flywheelSaturated = false;

  FootState & foot(Side s) { return feet[static_cast<std::size_t>(s)]; }
  const FootState & foot(Side s) const { return feet[static_cast<std::size_t>(s)]; }

  Eigen::VectorXd positions() const;
  Eigen::VectorXd velocities() const;
};

} // namespace foothold
