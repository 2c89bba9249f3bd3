#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <foothold/runner.h>

namespace foothold
{

inline constexpr const char * kMetricsSchema = "foothold.metrics/1";

struct LineError
{
  double angleDeg = 0.;
  double offset = 0.;
};

/// Angle between the longest edge of `estimate` and `truth`, and distance of the estimate's centroid to `truth`.
LineError lineEstimateError(const FootholdPolygon & estimate, const Line2 & truth);

/// Distance between the estimate's centroid and the true point.
double pointEstimateError(const FootholdPolygon & estimate, const Point2 & truth);

struct ExplorationMetrics
{
  std::size_t step = 0;
  double duration = 0.;
  std::size_t crops = 0;
  bool finished = false;
  std::optional<LineError> lineError;
  std::optional<double> pointError;
};

struct MetricsSummary
{
  std::string name;
  std::uint64_t seed = 0;
  RunOutcome outcome;
  std::size_t stepsCompleted = 0;
  double meanIcpError = 0.;
  double maxIcpError = 0.;
  /// Peak lunging: largest distance between the CMP and the CoP.
  double maxCmpCopDistance = 0.;
  std::vector<ExplorationMetrics> explorations;

  bool completed() const { return outcome.kind == OutcomeKind::Completed; }
};

MetricsSummary computeMetrics(const RunResult & result);

nlohmann::json toJson(const MetricsSummary & m);

} // namespace foothold
