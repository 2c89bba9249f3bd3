#pragma once

#include <vector>

#include <foothold/geometry.h>

namespace foothold
{

/// Linear inverted pendulum at constant CoM height.
struct LipmParams
{
  double mass = 90.;
  double gravity = 9.81;
  double height = 0.9;

  double omega0() const;
  void validate() const;
};

struct BalanceGains
{
  double kp = 2.0;
  double momentumWeightNominal = 10.;
  double momentumWeightMax = 100.;
  /// Half-width of the weight ramp around the support boundary (m).
  double edgeMargin = 0.03;
  double lungeTorqueLimit = 150.;
  double flywheelAngleLimit = 0.5;

  void validate() const;
};

struct BalanceState
{
  Point2 com = Point2::Zero();
  Eigen::Vector2d comVelocity = Eigen::Vector2d::Zero();
  Point2 icp = Point2::Zero();
  Point2 cop = Point2::Zero();
  Point2 cmp = Point2::Zero();
  FootholdPolygon support;
};

Point2 computeIcp(const Point2 & com, const Eigen::Vector2d & comVelocity, const LipmParams & params);

Eigen::Vector2d icpDynamics(const Point2 & icp, const Point2 & cmp, const LipmParams & params);

struct IcpTarget
{
  Point2 icp = Point2::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

/// Desired CMP from ICP feedback with reference feedforward.
Point2 cmpControlLaw(const Point2 & icp, const IcpTarget & reference, const LipmParams & params,
                     const BalanceGains & gains);

/// Horizontal linear momentum rate that places the CMP at `desiredCmp` (N).
Eigen::Vector2d desiredLinearMomentumRate(const Point2 & com, const Point2 & desiredCmp, const LipmParams & params);

/// m g (x_cmp - x_cop), the ground-plane form of the CoM torque (N m).
Eigen::Vector2d angularMomentumRate(const Point2 & cmp, const Point2 & cop, const LipmParams & params);

/** Horizontal CoM torque vector (tau_x, tau_y) for a CMP-CoP offset.
 *
 * The ground-plane form r = m g (x_cmp - x_cop) is related to the torque by
 * tau = z_hat x r, i.e. tau = (-r_y, r_x).
 */
Eigen::Vector2d comTorqueFromOffset(const Eigen::Vector2d & groundForm);

/// Inverse of comTorqueFromOffset().
Eigen::Vector2d offsetFromComTorque(const Eigen::Vector2d & torque);

/// One constant-CMP piece of an ICP reference.
struct IcpSegment
{
  double duration = 0.;
  Point2 cmp = Point2::Zero();
  Point2 icpStart = Point2::Zero();
};

/// Piecewise constant-CMP ICP reference; every piece solves the ICP dynamics exactly.
class IcpReference
{
public:
  IcpReference() = default;
  IcpReference(std::vector<IcpSegment> segments, Point2 finalIcp, double omega0);

  /// Holds `icp` with zero velocity forever.
  static IcpReference constant(const Point2 & icp, double omega0);

  const std::vector<IcpSegment> & segments() const { return segments_; }
  const Point2 & finalIcp() const { return finalIcp_; }
  double omega0() const { return omega0_; }
  double duration() const;

  /// Reference at time `t` from the start; after the end the final ICP is held.
  IcpTarget evaluate(double t) const;
  /// Reference CMP at time `t`.
  Point2 cmpAt(double t) const;
  /// Analytic ICP at the end of segment `k`.
  Point2 segmentEnd(std::size_t k) const;

  /// Prepends a segment whose constant CMP drives `fromIcp` onto the current start in `duration`.
  IcpReference withLeadIn(const Point2 & fromIcp, double duration) const;

private:
  std::vector<IcpSegment> segments_;
  Point2 finalIcp_ = Point2::Zero();
  double omega0_ = 1.;
};

struct PlannedFoothold
{
  FootholdPolygon polygon;
  Point2 centroid = Point2::Zero();
};

/** Backward recursion over constant-CMP segments placed at the foothold centroids.
 *
 * Segment k lasts transfer_k + swing_k; the reference ends at `finalIcp`.
 */
IcpReference buildIcpReference(const std::vector<PlannedFoothold> & footsteps, const std::vector<double> & swingTimes,
                               const std::vector<double> & transferTimes, const Point2 & finalIcp,
                               const LipmParams & params);

/// Constant CMP that moves the ICP from `from` to `to` in `duration`.
Point2 connectingCmp(const Point2 & from, const Point2 & to, double duration, double omega0);

struct FinalIcpAdjustment
{
  double fullSoleArea = 0.26 * 0.13;
  double minScale = 0.2;
};

/// Pulls the end-of-step ICP toward the stance foot when the upcoming foothold is small.
Point2 adjustFinalIcp(const FootholdPolygon & stance, const FootholdPolygon & upcoming, const Point2 & nominalFinalIcp,
                      const Point2 & stanceCentroid, const FinalIcpAdjustment & config = {});

/// Momentum weight, ramping from nominal (ICP deep inside) to max (ICP at or past the edge).
double momentumWeightSchedule(const Point2 & icp, const FootholdPolygon & support, const BalanceGains & gains);

} // namespace foothold
