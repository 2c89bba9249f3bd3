#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <foothold/controller.h>
#include <foothold/explorer.h>
#include <foothold/sim.h>

namespace foothold
{

struct FootstepSpec
{
  Side side = Side::Left;
  Pose2 pose;
  TerrainSpec terrain;
  std::optional<PriorGeometry> prior;
  std::optional<bool> explore;
};

/// A push at an absolute time, or at a fraction of the swing of one step.
struct PushSpec
{
  std::optional<double> t;
  std::size_t step = 0;
  double swingFraction = 0.5;
  Eigen::Vector2d impulse = Eigen::Vector2d::Zero();
};

struct ScenarioConfig
{
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double swingTime = 0.6;
  double transferTime = 0.5;
  /// Double support hold after the last step (s).
  double finalHold = 1.;
  SimConfig sim;
  ControllerConfig controller;
  bool explorationEnabled = false;
  ExplorerConfig explorer;
  /// The controller is given the true contact of every foothold at touchdown.
  bool terrainKnown = false;
  NoiseConfig noise;
  std::array<Pose2, 2> initialFeet{Pose2{{0., 0.1}, 0.}, Pose2{{0., -0.1}, 0.}};
  std::vector<FootstepSpec> footsteps;
  std::vector<PushSpec> pushes;
  /// ICP this far outside the capture region is a fall (m).
  double fallDistance = 0.1;
  /// ICP this far outside while the flywheel is saturated and the ICP still diverges is a fall (m).
  double fallSaturatedDistance = 0.02;

  ScenarioConfig();
  void validate() const;
};

/// Numeric override of a dotted TOML key, applied before parsing (e.g. "gains.flywheel_angle_limit").
using ScenarioOverride = std::pair<std::string, double>;

ScenarioConfig parseScenario(const std::string & toml, const std::vector<ScenarioOverride> & overrides = {});

/// Throws InvalidConfig with the offending field named, or with the parser's message.
ScenarioConfig loadScenario(const std::filesystem::path & path, const std::vector<ScenarioOverride> & overrides = {});

} // namespace foothold
