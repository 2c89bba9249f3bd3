#pragma once

#include <array>
#include <optional>

#include <foothold/momentum_qp.h>
#include <foothold/sim.h>

namespace foothold
{

struct ControllerConfig
{
  RobotModel model;
  BalanceGains gains;
  QpWeights weights;
  double flywheelKp = 20.;
  double flywheelKd = 9.;
  double footKp = 400.;
  double footKd = 40.;
  /// Desired CoPs of loaded feet stay this far inside the assumed contact when it has room (m).
  double copMargin = 0.01;
  /// CoP weight multiplier for feet whose desired CoP is overridden.
  double overrideCopGain = 30.;
};

struct ControlOutput
{
  Point2 icp = Point2::Zero();
  Point2 desiredCmp = Point2::Zero();
  double momentumWeight = 0.;
  FootholdPolygon support;
  std::vector<FootContacts> contacts;
  /// Desired CoP per foot given to the CoP objective (sole frame).
  std::array<std::optional<Point2>, 2> desiredCop;
  QpProblem problem;
  QpSolution solution;
  ActuationCommand command;
};

class BalanceController
{
public:
  explicit BalanceController(ControllerConfig config);

  const ControllerConfig & config() const { return config_; }

  /** One control tick on an estimated state.
   *
   * `copOverride` replaces the default desired CoP of a foot (e.g. while it
   * is explored). Throws when the QP cannot be solved.
   */
  ControlOutput update(const ReducedBipedState & estimate, const IcpTarget & reference,
                       const std::array<std::optional<Point2>, 2> & copOverride, double dt);

  void reset();

private:
  ControllerConfig config_;
  std::array<double, 2> fzPrev_;
  std::array<bool, 2> wasGrounded_;
  std::array<bool, 2> justLanded_;
  ActiveSet warm_;
};

ActuationCommand commandFromSolution(const std::vector<FootContacts> & contacts, const QpSolution & solution);

/// Polygon moved inward by `margin`, or by the largest halving of it that leaves a region.
FootholdPolygon shrinkPolygon(const FootholdPolygon & polygon, double margin);

/// World-frame hull of the assumed contacts of every foot on the ground.
FootholdPolygon supportPolygon(const ReducedBipedState & state);

} // namespace foothold
