#include <foothold/metrics.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <foothold/error.h>

namespace foothold
{

LineError lineEstimateError(const FootholdPolygon & estimate, const Line2 & truth)
{
  const auto v = estimate.distinctVertices();
  if(v.size() < 2)
  {
    throw Error(ErrorCode::InvalidArgument, "line error needs an estimate with an extent");
  }
  Eigen::Vector2d longest = Eigen::Vector2d::Zero();
  for(std::size_t i = 0; i < v.size(); ++i)
  {
    const Eigen::Vector2d e = v[(i + 1) % v.size()] - v[i];
    if(e.norm() > longest.norm())
    {
      longest = e;
    }
  }
  const double c = std::abs(longest.normalized().dot(truth.direction.normalized()));
  LineError out;
  out.angleDeg = std::acos(std::min(c, 1.)) * 180. / std::numbers::pi;
  out.offset = std::abs(truth.signedDistance(estimate.centroid()));
  return out;
}

double pointEstimateError(const FootholdPolygon & estimate, const Point2 & truth)
{
  if(estimate.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "point error needs a non-empty estimate");
  }
  return (estimate.centroid() - truth).norm();
}

MetricsSummary computeMetrics(const RunResult & result)
{
  MetricsSummary m;
  m.name = result.name;
  m.seed = result.seed;
  m.outcome = result.outcome;
  m.stepsCompleted = result.stepsCompleted;
  const auto & rows = result.log.rows();
  double sum = 0.;
  for(const auto & r : rows)
  {
    const double e = (r.icp - r.icpRef).norm();
    sum += e;
    m.maxIcpError = std::max(m.maxIcpError, e);
    m.maxCmpCopDistance = std::max(m.maxCmpCopDistance, (r.cmp - r.cop).norm());
  }
  m.meanIcpError = rows.empty() ? 0. : sum / static_cast<double>(rows.size());
  for(const auto & e : result.explorations)
  {
    ExplorationMetrics x;
    x.step = e.step;
    x.duration = e.trace.duration;
    x.crops = e.trace.crops.size();
    x.finished = e.finished;
    if(e.finished && e.trueLine && e.trace.finalFoothold.distinctVertices().size() >= 2)
    {
      x.lineError = lineEstimateError(e.trace.finalFoothold, *e.trueLine);
    }
    if(e.finished && e.truePoint && !e.trace.finalFoothold.empty())
    {
      x.pointError = pointEstimateError(e.trace.finalFoothold, *e.truePoint);
    }
    m.explorations.push_back(x);
  }
  return m;
}

nlohmann::json toJson(const MetricsSummary & m)
{
  nlohmann::json j;
  j["schema"] = kMetricsSchema;
  j["name"] = m.name;
  j["seed"] = m.seed;
  j["outcome"] = toString(m.outcome.kind);
  j["outcome_t"] = m.outcome.t;
  j["reason"] = m.outcome.reason;
  j["steps_completed"] = m.stepsCompleted;
  j["success"] = m.completed();
  j["icp_error_mean"] = m.meanIcpError;
  j["icp_error_max"] = m.maxIcpError;
  j["cmp_cop_max"] = m.maxCmpCopDistance;
  j["explorations"] = nlohmann::json::array();
  for(const auto & e : m.explorations)
  {
    nlohmann::json x;
    x["step"] = e.step;
    x["duration"] = e.duration;
    x["crops"] = e.crops;
    x["finished"] = e.finished;
    if(e.lineError)
    {
      x["angle_error_deg"] = e.lineError->angleDeg;
      x["offset_error"] = e.lineError->offset;
    }
    if(e.pointError)
    {
      x["point_error"] = *e.pointError;
    }
    j["explorations"].push_back(x);
  }
  return j;
}

} // namespace foothold
