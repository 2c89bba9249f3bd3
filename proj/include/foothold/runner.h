#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <foothold/ground_log.h>
#include <foothold/scenario.h>

namespace foothold
{

enum class OutcomeKind
{
  Completed,
  Fell,
};

const char * toString(OutcomeKind k);

struct RunOutcome
{
  OutcomeKind kind = OutcomeKind::Completed;
  double t = 0.;
  std::string reason;
};

struct ExplorationRecord
{
  std::size_t step = 0;
  Side side = Side::Left;
  double start = 0.;
  TerrainSpec terrain;
  /// Ground truth in the landed sole frame.
  FootholdPolygon trueContact;
  /// True contact line in the landed sole frame (line terrain only).
  std::optional<Line2> trueLine;
  /// True point center in the landed sole frame (point terrain only).
  std::optional<Point2> truePoint;
  PriorGeometry prior = PriorGeometry::None;
  ExplorationTrace trace;
  std::vector<CopSample> history;
  bool finished = false;
};

struct PushRecord
{
  double t = 0.;
  Eigen::Vector2d impulse = Eigen::Vector2d::Zero();
};

struct RunOptions
{
  /// Keep the assembled QP of every n-th tick (0 keeps none).
  std::size_t qpDumpEvery = 0;
};

struct RunResult
{
  std::string name;
  std::uint64_t seed = 0;
  double dt = 0.;
  GroundReferenceLog log;
  RunOutcome outcome;
  std::size_t stepsCompleted = 0;
  std::vector<ExplorationRecord> explorations;
  std::vector<PushRecord> pushes;
  std::vector<nlohmann::json> qpDumps;

  /// Sidecar document: outcome, supports, footholds, pushes and exploration traces.
  nlohmann::json sidecar() const;
};

/// Runs the walking state machine on a validated scenario. Deterministic for a given config.
RunResult runScenario(const ScenarioConfig & config, const RunOptions & options = {});

nlohmann::json toJson(const ExplorationRecord & record);

} // namespace foothold
