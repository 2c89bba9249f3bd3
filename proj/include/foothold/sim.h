#pragma once

#include <array>
#include <random>

#include <foothold/model.h>

namespace foothold
{

struct NoiseConfig
{
  double copSigma = 0.;
  double gyroSigma = 0.;
  double comSigma = 0.;
  double comVelocitySigma = 0.;
  /// Touchdown placement error of the sole position (m).
  double placementSigma = 0.01;

  void validate() const;
  NoiseConfig scaled(double factor) const;
};

struct SimConfig
{
  double dt = 0.002;
  /// Commanded CoP may leave the true contact by this much before the foot starts to tip (m).
  double edgeCompliance = 0.01;
  /// Tilt rate per unit of excess torque (rad/(s N m)).
  double tipGain = 5.;
  double tipRateCap = 1.;
  /// Below this angle, the foot counts as flat (rad).
  double flatTilt = 1e-4;

  void validate() const;
};

/// What the ground is asked to do for one foot during a tick.
struct FootCommand
{
  bool loaded = false;
  /// Desired CoP in the sole frame.
  Point2 cop = Point2::Zero();
  double fz = 0.;
  double tiltAccel = 0.;
};

struct ActuationCommand
{
  std::array<FootCommand, 2> feet;
  Eigen::Vector2d flywheelAccel = Eigen::Vector2d::Zero();

  FootCommand & foot(Side s) { return feet[static_cast<std::size_t>(s)]; }
  const FootCommand & foot(Side s) const { return feet[static_cast<std::size_t>(s)]; }
};

/// Quantities realized by the physics during one tick.
struct TickRecord
{
  /// Net CoP in the world frame.
  Point2 cop = Point2::Zero();
  Point2 cmp = Point2::Zero();
  Eigen::Vector2d flywheelTorque = Eigen::Vector2d::Zero();
  /// Horizontal ground force averaged over the tick (N).
  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  std::array<Point2, 2> footCop{Point2::Zero(), Point2::Zero()};
  std::array<double, 2> footFz{0., 0.};
  std::array<bool, 2> tipping{false, false};
};

/** Advances the reduced biped by one tick.
 *
 * The net CMP is held constant over the tick and the CoM follows the LIPM
 * solution exactly. Each foot applies its commanded CoP clamped to the true
 * contact; a command beyond the contact edge tips the foot about that edge.
 */
ReducedBipedState stepDynamics(const ReducedBipedState & state, const ActuationCommand & command,
                               const RobotModel & model, const BalanceGains & gains, const SimConfig & config,
                               TickRecord * record = nullptr);

ReducedBipedState applyPush(const ReducedBipedState & state, const Eigen::Vector2d & impulse, const RobotModel & model);

struct FootSensors
{
  bool inContact = false;
  /// Sole frame, clamped to the sole.
  Point2 cop = Point2::Zero();
  Plane3 plane;
  Eigen::Vector3d angularVelocity = Eigen::Vector3d::Zero();
  double load = 0.;
};

struct SensorBundle
{
  std::array<FootSensors, 2> feet;
  Point2 com = Point2::Zero();
  Eigen::Vector2d comVelocity = Eigen::Vector2d::Zero();

  const FootSensors & foot(Side s) const { return feet[static_cast<std::size_t>(s)]; }
};

/// Noisy measurement of the state; draws a fixed number of samples per call.
SensorBundle sense(const ReducedBipedState & state, const NoiseConfig & noise, const RobotModel & model,
                   std::mt19937_64 & rng);

enum class TerrainKind
{
  Full,
  Line,
  Point,
  Polygon,
};

const char * toString(TerrainKind k);
TerrainKind terrainKindFromString(const std::string & s);

/// True contact of one foothold, expressed in the planned sole frame.
struct TerrainSpec
{
  TerrainKind kind = TerrainKind::Full;
  /// Line direction relative to the sole x axis (rad).
  double angle = 0.;
  /// Signed distance of the line from the sole center (m).
  double offset = 0.;
  Point2 point = Point2::Zero();
  double size = 0.02;
  std::vector<Point2> vertices;

  /// Contact region in the planned sole frame, not yet clipped to the sole.
  FootholdPolygon region(const FootholdPolygon & sole) const;
  /// Contact line for line terrain, in the planned sole frame.
  Line2 line() const;
};

/// True contact of a sole placed at `actual` on terrain planned for `planned`; empty when nothing is under the sole.
FootholdPolygon trueContactAt(const TerrainSpec & terrain, const Pose2 & planned, const Pose2 & actual,
                              const FootholdPolygon & sole);

/// Intersection of two convex polygons; throws EmptyFoothold when disjoint.
FootholdPolygon intersectConvex(const FootholdPolygon & a, const FootholdPolygon & b);

} // namespace foothold
