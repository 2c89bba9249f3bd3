#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include <foothold/error.h>
#include <foothold/scenario.h>

using namespace foothold;

namespace
{

std::string errorOf(const std::string & toml, const std::vector<ScenarioOverride> & overrides = {})
{
  try
  {
    parseScenario(toml, overrides);
  }
  catch(const Error & e)
  {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    return e.what();
  }
  return {};
}

const char * kTwoSteps = R"(
name = "two"
seed = 4
[[steps]]
side = "left"
x = 0.2
y = 0.1
terrain = { type = "line", angle_deg = 30.0, offset = 0.01 }
prior = "line"
[[steps]]
side = "right"
x = 0.2
y = -0.1
explore = false
)";

} // namespace

TEST(Scenario, Defaults)
{
  const ScenarioConfig c = parseScenario("");
  EXPECT_EQ(c.name, "scenario");
  EXPECT_DOUBLE_EQ(c.sim.dt, 0.002);
  EXPECT_DOUBLE_EQ(c.swingTime, 0.6);
  EXPECT_DOUBLE_EQ(c.noise.placementSigma, 0.01);
  EXPECT_FALSE(c.explorationEnabled);
  EXPECT_TRUE(c.footsteps.empty());
}

TEST(Scenario, StepsTerrainAndPriors)
{
  const ScenarioConfig c = parseScenario(kTwoSteps);
  EXPECT_EQ(c.name, "two");
  EXPECT_EQ(c.seed, 4u);
  ASSERT_EQ(c.footsteps.size(), 2u);
  const auto & s = c.footsteps[0];
  EXPECT_EQ(s.side, Side::Left);
  EXPECT_DOUBLE_EQ(s.pose.position.x(), 0.2);
  EXPECT_EQ(s.terrain.kind, TerrainKind::Line);
  EXPECT_NEAR(s.terrain.angle, std::numbers::pi / 6., 1e-15);
  EXPECT_DOUBLE_EQ(s.terrain.offset, 0.01);
  ASSERT_TRUE(s.prior.has_value());
  EXPECT_EQ(*s.prior, PriorGeometry::Line);
  EXPECT_FALSE(s.explore.has_value());
  ASSERT_TRUE(c.footsteps[1].explore.has_value());
  EXPECT_FALSE(*c.footsteps[1].explore);
}

TEST(Scenario, Pushes)
{
  const std::string toml = std::string(kTwoSteps) + R"(
[[pushes]]
step = 1
swing_fraction = 0.25
impulse = [10.0, -5.0]
[[pushes]]
t = 1.5
impulse = [0.0, 3.0]
)";
  const ScenarioConfig c = parseScenario(toml);
  ASSERT_EQ(c.pushes.size(), 2u);
  EXPECT_EQ(c.pushes[0].step, 1u);
  EXPECT_DOUBLE_EQ(c.pushes[0].swingFraction, 0.25);
  EXPECT_EQ(c.pushes[0].impulse, Eigen::Vector2d(10., -5.));
  ASSERT_TRUE(c.pushes[1].t.has_value());
  EXPECT_DOUBLE_EQ(*c.pushes[1].t, 1.5);
}

TEST(Scenario, ErrorsNameTheField)
{
  EXPECT_NE(errorOf("dt = 0.0").find("dt"), std::string::npos);
  EXPECT_NE(errorOf("swing_time = \"fast\"").find("swing_time: expected a number"), std::string::npos);
  EXPECT_NE(errorOf("colour = 1").find("colour: unknown key"), std::string::npos);
  EXPECT_NE(errorOf("[noise]\ncop_sigma = -1.0").find("noise"), std::string::npos);
  EXPECT_NE(errorOf("[[steps]]\nside = \"up\"").find("steps[0].side"), std::string::npos);
  EXPECT_NE(errorOf("[[steps]]\nx = 1.0").find("steps[0].side: required"), std::string::npos);
  EXPECT_NE(errorOf("[[steps]]\nside = \"left\"\n[[steps]]\nside = \"left\"").find("steps[1].side"),
            std::string::npos);
  EXPECT_NE(errorOf("[[steps]]\nside = \"left\"\nterrain = { type = \"hill\" }").find("steps[0].terrain.type"),
            std::string::npos);
  EXPECT_NE(errorOf("[[pushes]]\nstep = 3\nimpulse = [1.0, 0.0]").find("pushes[0].step"), std::string::npos);
  EXPECT_NE(errorOf("[[pushes]]\nt = 1.0\nimpulse = [1.0]").find("pushes[0].impulse"), std::string::npos);
  EXPECT_NE(errorOf("seed = -3").find("seed"), std::string::npos);
}

TEST(Scenario, SyntaxErrorReportsLine)
{
  const std::string e = errorOf("name = \"x\"\nseed = 1\nswing_time = = 2\n");
  EXPECT_NE(e.find("TOML parse error at line 3"), std::string::npos) << e;
}

TEST(Scenario, Overrides)
{
  const ScenarioConfig c = parseScenario(kTwoSteps, {{"gains.flywheel_angle_limit", 0.}, {"swing_time", 0.3}});
  EXPECT_EQ(c.controller.gains.flywheelAngleLimit, 0.);
  EXPECT_DOUBLE_EQ(c.swingTime, 0.3);
  const ScenarioConfig e = parseScenario("[exploration]\nenabled = true", {{"exploration.enabled", 0.}});
  EXPECT_FALSE(e.explorationEnabled);
  EXPECT_NE(errorOf(kTwoSteps, {{"name.x", 1.}}).find("name.x"), std::string::npos);
  EXPECT_NE(errorOf(kTwoSteps, {{"gains.bogus", 1.}}).find("gains.bogus: unknown key"), std::string::npos);
}

TEST(Scenario, MissingFile)
{
  try
  {
    loadScenario("/nonexistent/scenario.toml");
    FAIL();
  }
  catch(const Error & e)
  {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/scenario.toml"), std::string::npos);
  }
}

TEST(Scenario, ShippedScenariosLoad)
{
  int n = 0;
  for(const auto & entry : std::filesystem::directory_iterator(FOOTHOLD_SCENARIO_DIR))
  {
    if(entry.path().extension() == ".toml")
    {
      EXPECT_NO_THROW(loadScenario(entry.path())) << entry.path();
      ++n;
    }
  }
  EXPECT_GE(n, 5);
}
