#pragma once

#include <array>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include <foothold/model.h>

namespace foothold
{

/// One control tick: the state at `t` and what the ground realized over [t, t + dt).
struct LogRow
{
  double t = 0.;
  Point2 com = Point2::Zero();
  Eigen::Vector2d comVelocity = Eigen::Vector2d::Zero();
  Point2 icp = Point2::Zero();
  Point2 icpRef = Point2::Zero();
  Point2 cop = Point2::Zero();
  Point2 cmp = Point2::Zero();
  WalkPhase phase = WalkPhase::DoubleSupport;
  double weight = 0.;
  Eigen::Vector2d flywheelAngle = Eigen::Vector2d::Zero();
  Eigen::Vector2d flywheelRate = Eigen::Vector2d::Zero();
  Eigen::Vector2d flywheelTorque = Eigen::Vector2d::Zero();
  std::array<double, 2> footFz{0., 0.};
  std::array<double, 2> footTilt{0., 0.};
  /// Index into GroundReferenceLog::supports.
  std::size_t support = 0;
};

struct SupportSnapshot
{
  double t = 0.;
  FootholdPolygon polygon;
};

class GroundReferenceLog
{
public:
  explicit GroundReferenceLog(LipmParams params = {}) : params_(params) {}

  /// Appends a row; the ICP column is recomputed from the CoM state. Throws unless t increases.
  void append(LogRow row, const FootholdPolygon & support);

  const std::vector<LogRow> & rows() const { return rows_; }
  const std::vector<SupportSnapshot> & supports() const { return supports_; }
  const LipmParams & params() const { return params_; }

  /// One row per `period` seconds: t, icp_x, icp_y, icp_ref_x, icp_ref_y, cop_x, cop_y, cmp_x, cmp_y, phase, weight.
  void writeCsv(std::ostream & out, double period = 0.01) const;

  nlohmann::json supportsJson() const;

private:
  LipmParams params_;
  std::vector<LogRow> rows_;
  std::vector<SupportSnapshot> supports_;
};

nlohmann::json polygonJson(const FootholdPolygon & p);

} // namespace foothold
