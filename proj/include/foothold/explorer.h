#pragma once

#include <optional>
#include <string>
#include <vector>

#include <foothold/geometry.h>

namespace foothold
{

enum class ExplorePhase
{
  Idle,
  Probing,
  Settling,
  Done,
};

enum class PriorGeometry
{
  None,
  Line,
  Point,
};

enum class DetectionSource
{
  Velocity,
  Geometric,
};

const char * toString(ExplorePhase p);
const char * toString(PriorGeometry p);
const char * toString(DetectionSource s);
PriorGeometry priorFromString(const std::string & s);

struct ExplorerConfig
{
  double omegaThreshold = 0.1;
  double thetaThreshold = 2. * 3.14159265358979323846 / 180.;
  double waypointDwell = 0.3;
  double historyWeightDecay = 0.95;
  PriorGeometry prior = PriorGeometry::None;
  /// Distance of corner waypoints from the foothold boundary (m).
  double waypointInset = 0.01;
  /// Consecutive velocity detections needed before a crop.
  int velocityConfirmSamples = 2;
  /// Minimum time spent settling after a crop (s).
  double settleDwell = 0.15;
  /// CoP history is stored as averages over this period (s).
  double samplePeriod = 0.05;
  /// Feet carrying less than this do not contribute CoP samples (N).
  double minLoad = 50.;
  /// A measured CoP closer than this to the rotation axis does not pick the kept side (m).
  double keepMargin = 0.01;
  double stripWidth = 0.01;
  double timeout = 6.;

  void validate() const;
};

struct RotationDetection
{
  Line2 axis;
  double omega = 0.;
  double theta = 0.;
  DetectionSource source = DetectionSource::Velocity;
};

struct CopSample
{
  double t = 0.;
  Point2 cop = Point2::Zero();
  double weight = 1.;
};

struct ExplorationTrace
{
  struct Waypoint
  {
    double t;
    Point2 point;
  };
  struct Crop
  {
    double t;
    RotationDetection detection;
    Point2 keep;
    double areaAfter;
  };
  std::vector<Waypoint> waypoints;
  std::vector<Crop> crops;
  FootholdPolygon finalFoothold;
  double duration = 0.;
};

struct ExplorationState
{
  ExplorePhase phase = ExplorePhase::Idle;
  /// Current estimate in the sole frame; only ever shrinks.
  FootholdPolygon assumedFoothold;
  /// The sole outline the exploration started from.
  FootholdPolygon sole;
  std::vector<Point2> waypoints;
  std::size_t waypointIndex = 0;
  double waypointTime = 0.;
  std::vector<CopSample> copHistory;
  double elapsed = 0.;
  double settleTime = 0.;
  Point2 desiredCop = Point2::Zero();
  double lastTheta = 0.;
  int velocityStreak = 0;
  /// The tilt has decreased since the last crop.
  bool tiltFalling = false;
  Point2 windowSum = Point2::Zero();
  int windowCount = 0;
  double windowStart = 0.;
  ExplorationTrace trace;

  static ExplorationState start(const FootholdPolygon & assumed, const ExplorerConfig & cfg);
};

struct ExplorerSensors
{
  Point2 measuredCop = Point2::Zero();
  Plane3 footPlane;
  Eigen::Vector3d footAngularVelocity = Eigen::Vector3d::Zero();
  double load = 0.;
};

struct ExplorerOutput
{
  ExplorationState state;
  Point2 desiredCop = Point2::Zero();
  std::optional<FootholdPolygon> footholdUpdate;
};

/// Centroid, each corner moved inward by `inset`, centroid again (consecutive duplicates removed).
std::vector<Point2> planWaypoints(const FootholdPolygon & assumed, double inset = 0.01);

std::optional<RotationDetection> detectRotationVelocity(const Eigen::Vector3d & footAngularVelocity,
                                                        const ExplorerConfig & cfg);

std::optional<RotationDetection> detectRotationGeometric(const Plane3 & footPlane, const Plane3 & groundPlane,
                                                         const ExplorerConfig & cfg);

/** Crops the assumed foothold at the detected axis.
 *
 * The measured CoP picks the kept side when it is clear of the axis; a foot
 * that is tipping carries its load on the axis itself, so otherwise the side
 * away from `desiredCop` is kept. An empty result collapses to the measured CoP.
 */
ExplorationState applyRotationCrop(const ExplorationState & state, const RotationDetection & det,
                                   const Point2 & measuredCop, const ExplorerConfig & cfg = {});

FootholdPolygon estimateFromHistory(const ExplorationState & state, const ExplorerConfig & cfg);

ExplorerOutput explorerStep(const ExplorationState & state, const ExplorerSensors & sensors, const ExplorerConfig & cfg,
                            double dt);

} // namespace foothold
