#include <foothold/scenario.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <tomlplusplus/toml.hpp>

#include <foothold/error.h>

namespace foothold
{

namespace
{

constexpr double kDeg = std::numbers::pi / 180.;

[[noreturn]] void fail(const std::string & field, const std::string & what)
{
  throw Error(ErrorCode::InvalidConfig, field + ": " + what);
}

std::string join(const std::string & prefix, std::string_view key)
{
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void checkKeys(const toml::table & t, const std::string & prefix, std::initializer_list<std::string_view> allowed)
{
  const std::set<std::string_view> ok(allowed);
  for(const auto & [k, v] : t)
  {
    if(!ok.count(k.str()))
    {
      fail(join(prefix, k.str()), "unknown key");
    }
  }
}

double number(const toml::table & t, const std::string & prefix, std::string_view key, double def)
{
  const toml::node * n = t.get(key);
  if(!n)
  {
    return def;
  }
  if(auto v = n->value<double>())
  {
    if(!std::isfinite(*v))
    {
      fail(join(prefix, key), "must be finite");
    }
    return *v;
  }
  fail(join(prefix, key), "expected a number");
}

bool boolean(const toml::table & t, const std::string & prefix, std::string_view key, bool def)
{
  const toml::node * n = t.get(key);
  if(!n)
  {
    return def;
  }
  if(auto v = n->value<bool>())
  {
    return *v;
  }
  fail(join(prefix, key), "expected true or false");
}

std::string text(const toml::table & t, const std::string & prefix, std::string_view key, const std::string & def)
{
  const toml::node * n = t.get(key);
  if(!n)
  {
    return def;
  }
  if(auto v = n->value<std::string>())
  {
    return *v;
  }
  fail(join(prefix, key), "expected a string");
}

const toml::table * table(const toml::table & t, const std::string & prefix, std::string_view key)
{
  const toml::node * n = t.get(key);
  if(!n)
  {
    return nullptr;
  }
  if(!n->is_table())
  {
    fail(join(prefix, key), "expected a table");
  }
  return n->as_table();
}

std::vector<double> numbers(const toml::node & n, const std::string & field)
{
  const toml::array * a = n.as_array();
  if(!a)
  {
    fail(field, "expected an array of numbers");
  }
  std::vector<double> out;
  for(const auto & e : *a)
  {
    auto v = e.value<double>();
    if(!v || !std::isfinite(*v))
    {
      fail(field, "expected an array of numbers");
    }
    out.push_back(*v);
  }
  return out;
}

Pose2 pose(const toml::node & n, const std::string & field)
{
  const auto v = numbers(n, field);
  if(v.size() != 2 && v.size() != 3)
  {
    fail(field, "expected [x, y] or [x, y, yaw_deg]");
  }
  return Pose2{{v[0], v[1]}, v.size() == 3 ? v[2] * kDeg : 0.};
}

Side side(const std::string & s, const std::string & field)
{
  if(s == "left")
  {
    return Side::Left;
  }
  if(s == "right")
  {
    return Side::Right;
  }
  fail(field, "expected \"left\" or \"right\"");
}

TerrainSpec terrain(const toml::table & t, const std::string & prefix)
{
  checkKeys(t, prefix, {"type", "angle_deg", "offset", "x", "y", "size", "vertices"});
  TerrainSpec spec;
  try
  {
    spec.kind = terrainKindFromString(text(t, prefix, "type", "full"));
  }
  catch(const Error &)
  {
    fail(join(prefix, "type"), "expected full, line, point or polygon");
  }
  spec.angle = number(t, prefix, "angle_deg", 0.) * kDeg;
  spec.offset = number(t, prefix, "offset", 0.);
  spec.point = Point2(number(t, prefix, "x", 0.), number(t, prefix, "y", 0.));
  spec.size = number(t, prefix, "size", 0.02);
  if(!(spec.size > 0.))
  {
    fail(join(prefix, "size"), "must be positive");
  }
  if(const toml::node * v = t.get("vertices"))
  {
    const toml::array * a = v->as_array();
    if(!a)
    {
      fail(join(prefix, "vertices"), "expected an array of [x, y] pairs");
    }
    for(const auto & e : *a)
    {
      const auto xy = numbers(e, join(prefix, "vertices"));
      if(xy.size() != 2)
      {
        fail(join(prefix, "vertices"), "expected an array of [x, y] pairs");
      }
      spec.vertices.emplace_back(xy[0], xy[1]);
    }
  }
  if(spec.kind == TerrainKind::Polygon && spec.vertices.empty())
  {
    fail(join(prefix, "vertices"), "polygon terrain needs vertices");
  }
  return spec;
}

void applyOverride(toml::table & root, const ScenarioOverride & o)
{
  toml::table * t = &root;
  std::string_view path = o.first;
  while(true)
  {
    const auto dot = path.find('.');
    if(dot == std::string_view::npos)
    {
      break;
    }
    const std::string_view head = path.substr(0, dot);
    toml::node * n = t->get(head);
    if(!n)
    {
      t->insert(head, toml::table{});
      n = t->get(head);
    }
    if(!n->is_table())
    {
      fail(o.first, "override path does not name a table");
    }
    t = n->as_table();
    path = path.substr(dot + 1);
  }
  const toml::node * existing = t->get(path);
  if(existing && existing->is_boolean())
  {
    t->insert_or_assign(path, o.second != 0.);
  }
  else
  {
    t->insert_or_assign(path, o.second);
  }
}

ScenarioConfig fromTable(const toml::table & root)
{
  ScenarioConfig c;
  checkKeys(root, "",
            {"name", "seed", "dt", "swing_time", "transfer_time", "final_hold", "terrain_known", "edge_compliance",
             "tip_gain", "tip_rate_cap", "fall_distance", "fall_saturated_distance", "model", "gains", "weights",
             "controller", "exploration", "noise", "initial", "steps", "pushes"});
  c.name = text(root, "", "name", c.name);
  if(const toml::node * s = root.get("seed"))
  {
    auto v = s->value<std::int64_t>();
    if(!v || *v < 0)
    {
      fail("seed", "expected a non-negative integer");
    }
    c.seed = static_cast<std::uint64_t>(*v);
  }
  c.sim.dt = number(root, "", "dt", c.sim.dt);
  c.swingTime = number(root, "", "swing_time", c.swingTime);
  c.transferTime = number(root, "", "transfer_time", c.transferTime);
  c.finalHold = number(root, "", "final_hold", c.finalHold);
  c.terrainKnown = boolean(root, "", "terrain_known", c.terrainKnown);
  c.sim.edgeCompliance = number(root, "", "edge_compliance", c.sim.edgeCompliance);
  c.sim.tipGain = number(root, "", "tip_gain", c.sim.tipGain);
  c.sim.tipRateCap = number(root, "", "tip_rate_cap", c.sim.tipRateCap);
  c.fallDistance = number(root, "", "fall_distance", c.fallDistance);
  c.fallSaturatedDistance = number(root, "", "fall_saturated_distance", c.fallSaturatedDistance);

  auto & model = c.controller.model;
  if(const auto * t = table(root, "", "model"))
  {
    checkKeys(*t, "model",
              {"mass", "gravity", "com_height", "flywheel_inertia", "flywheel_rate_limit", "sole_length", "sole_width",
               "friction", "com_accel_limit", "foot_tilt_limit"});
    model.lipm.mass = number(*t, "model", "mass", model.lipm.mass);
    model.lipm.gravity = number(*t, "model", "gravity", model.lipm.gravity);
    model.lipm.height = number(*t, "model", "com_height", model.lipm.height);
    model.flywheelInertia = number(*t, "model", "flywheel_inertia", model.flywheelInertia);
    model.flywheelRateLimit = number(*t, "model", "flywheel_rate_limit", model.flywheelRateLimit);
    model.soleLength = number(*t, "model", "sole_length", model.soleLength);
    model.soleWidth = number(*t, "model", "sole_width", model.soleWidth);
    model.friction = number(*t, "model", "friction", model.friction);
    model.comAccelLimit = number(*t, "model", "com_accel_limit", model.comAccelLimit);
    model.footTiltLimit = number(*t, "model", "foot_tilt_limit", model.footTiltLimit);
  }
  auto & gains = c.controller.gains;
  if(const auto * t = table(root, "", "gains"))
  {
    checkKeys(*t, "gains",
              {"kp", "momentum_weight_nominal", "momentum_weight_max", "edge_margin", "lunge_torque_limit",
               "flywheel_angle_limit"});
    gains.kp = number(*t, "gains", "kp", gains.kp);
    gains.momentumWeightNominal = number(*t, "gains", "momentum_weight_nominal", gains.momentumWeightNominal);
    gains.momentumWeightMax = number(*t, "gains", "momentum_weight_max", gains.momentumWeightMax);
    gains.edgeMargin = number(*t, "gains", "edge_margin", gains.edgeMargin);
    gains.lungeTorqueLimit = number(*t, "gains", "lunge_torque_limit", gains.lungeTorqueLimit);
    gains.flywheelAngleLimit = number(*t, "gains", "flywheel_angle_limit", gains.flywheelAngleLimit);
  }
  auto & w = c.controller.weights;
  if(const auto * t = table(root, "", "weights"))
  {
    checkKeys(*t, "weights", {"momentum", "motion", "cop", "rho", "vdot"});
    w.momentum = number(*t, "weights", "momentum", w.momentum);
    w.motion = number(*t, "weights", "motion", w.motion);
    w.cop = number(*t, "weights", "cop", w.cop);
    w.rho = number(*t, "weights", "rho", w.rho);
    w.vdot = number(*t, "weights", "vdot", w.vdot);
  }
  if(const auto * t = table(root, "", "controller"))
  {
    checkKeys(*t, "controller", {"flywheel_kp", "flywheel_kd", "foot_kp", "foot_kd", "cop_margin", "override_cop_gain"});
    c.controller.flywheelKp = number(*t, "controller", "flywheel_kp", c.controller.flywheelKp);
    c.controller.flywheelKd = number(*t, "controller", "flywheel_kd", c.controller.flywheelKd);
    c.controller.footKp = number(*t, "controller", "foot_kp", c.controller.footKp);
    c.controller.footKd = number(*t, "controller", "foot_kd", c.controller.footKd);
    c.controller.copMargin = number(*t, "controller", "cop_margin", c.controller.copMargin);
    c.controller.overrideCopGain = number(*t, "controller", "override_cop_gain", c.controller.overrideCopGain);
  }
  auto & e = c.explorer;
  if(const auto * t = table(root, "", "exploration"))
  {
    const std::string p = "exploration";
    checkKeys(*t, p,
              {"enabled", "omega_threshold", "theta_threshold_deg", "waypoint_dwell", "history_weight_decay", "prior",
               "waypoint_inset", "velocity_confirm_samples", "settle_dwell", "sample_period", "min_load", "keep_margin",
               "strip_width", "timeout"});
    c.explorationEnabled = boolean(*t, p, "enabled", true);
    e.omegaThreshold = number(*t, p, "omega_threshold", e.omegaThreshold);
    e.thetaThreshold = number(*t, p, "theta_threshold_deg", e.thetaThreshold / kDeg) * kDeg;
    e.waypointDwell = number(*t, p, "waypoint_dwell", e.waypointDwell);
    e.historyWeightDecay = number(*t, p, "history_weight_decay", e.historyWeightDecay);
    try
    {
      e.prior = priorFromString(text(*t, p, "prior", toString(e.prior)));
    }
    catch(const Error &)
    {
      fail("exploration.prior", "expected none, line or point");
    }
    e.waypointInset = number(*t, p, "waypoint_inset", e.waypointInset);
    e.velocityConfirmSamples =
        static_cast<int>(number(*t, p, "velocity_confirm_samples", static_cast<double>(e.velocityConfirmSamples)));
    e.settleDwell = number(*t, p, "settle_dwell", e.settleDwell);
    e.samplePeriod = number(*t, p, "sample_period", e.samplePeriod);
    e.minLoad = number(*t, p, "min_load", e.minLoad);
    e.keepMargin = number(*t, p, "keep_margin", e.keepMargin);
    e.stripWidth = number(*t, p, "strip_width", e.stripWidth);
    e.timeout = number(*t, p, "timeout", e.timeout);
  }
  auto & n = c.noise;
  if(const auto * t = table(root, "", "noise"))
  {
    checkKeys(*t, "noise", {"cop_sigma", "gyro_sigma", "com_sigma", "comd_sigma", "placement_sigma"});
    n.copSigma = number(*t, "noise", "cop_sigma", n.copSigma);
    n.gyroSigma = number(*t, "noise", "gyro_sigma", n.gyroSigma);
    n.comSigma = number(*t, "noise", "com_sigma", n.comSigma);
    n.comVelocitySigma = number(*t, "noise", "comd_sigma", n.comVelocitySigma);
    n.placementSigma = number(*t, "noise", "placement_sigma", n.placementSigma);
  }
  if(const auto * t = table(root, "", "initial"))
  {
    checkKeys(*t, "initial", {"left", "right"});
    if(const toml::node * l = t->get("left"))
    {
      c.initialFeet[0] = pose(*l, "initial.left");
    }
    if(const toml::node * r = t->get("right"))
    {
      c.initialFeet[1] = pose(*r, "initial.right");
    }
  }
  if(const toml::node * steps = root.get("steps"))
  {
    const toml::array * a = steps->as_array();
    if(!a)
    {
      fail("steps", "expected an array of tables ([[steps]])");
    }
    for(std::size_t k = 0; k < a->size(); ++k)
    {
      const std::string p = "steps[" + std::to_string(k) + "]";
      const toml::table * t = a->get(k)->as_table();
      if(!t)
      {
        fail(p, "expected a table");
      }
      checkKeys(*t, p, {"side", "x", "y", "yaw_deg", "terrain", "prior", "explore"});
      FootstepSpec s;
      if(!t->get("side"))
      {
        fail(join(p, "side"), "required");
      }
      s.side = side(text(*t, p, "side", ""), join(p, "side"));
      s.pose = Pose2{{number(*t, p, "x", 0.), number(*t, p, "y", 0.)}, number(*t, p, "yaw_deg", 0.) * kDeg};
      if(const auto * tt = table(*t, p, "terrain"))
      {
        s.terrain = terrain(*tt, join(p, "terrain"));
      }
      if(t->get("prior"))
      {
        try
        {
          s.prior = priorFromString(text(*t, p, "prior", ""));
        }
        catch(const Error &)
        {
          fail(join(p, "prior"), "expected none, line or point");
        }
      }
      if(t->get("explore"))
      {
        s.explore = boolean(*t, p, "explore", true);
      }
      c.footsteps.push_back(s);
    }
  }
  if(const toml::node * pushes = root.get("pushes"))
  {
    const toml::array * a = pushes->as_array();
    if(!a)
    {
      fail("pushes", "expected an array of tables ([[pushes]])");
    }
    for(std::size_t k = 0; k < a->size(); ++k)
    {
      const std::string p = "pushes[" + std::to_string(k) + "]";
      const toml::table * t = a->get(k)->as_table();
      if(!t)
      {
        fail(p, "expected a table");
      }
      checkKeys(*t, p, {"t", "step", "swing_fraction", "impulse"});
      PushSpec s;
      if(t->get("t"))
      {
        s.t = number(*t, p, "t", 0.);
      }
      const double step = number(*t, p, "step", 0.);
      if(step < 0. || step != std::floor(step))
      {
        fail(join(p, "step"), "expected a non-negative integer");
      }
      s.step = static_cast<std::size_t>(step);
      s.swingFraction = number(*t, p, "swing_fraction", s.swingFraction);
      const toml::node * imp = t->get("impulse");
      if(!imp)
      {
        fail(join(p, "impulse"), "required");
      }
      const auto v = numbers(*imp, join(p, "impulse"));
      if(v.size() != 2)
      {
        fail(join(p, "impulse"), "expected [x, y] in N s");
      }
      s.impulse = Eigen::Vector2d(v[0], v[1]);
      c.pushes.push_back(s);
    }
  }
  c.validate();
  return c;
}

} // namespace

ScenarioConfig::ScenarioConfig()
{
  controller.weights.cop = 1e3;
}

void ScenarioConfig::validate() const
{
  sim.validate();
  if(!(swingTime > 0.))
  {
    fail("swing_time", "must be positive");
  }
  if(!(transferTime > 0.))
  {
    fail("transfer_time", "must be positive");
  }
  if(!(finalHold >= 0.))
  {
    fail("final_hold", "must be non-negative");
  }
  if(!(fallDistance > 0.) || !(fallSaturatedDistance >= 0.))
  {
    fail("fall_distance", "fall thresholds must be positive");
  }
  if(!(controller.overrideCopGain > 0.))
  {
    fail("controller.override_cop_gain", "must be positive");
  }
  try
  {
    controller.model.validate();
  }
  catch(const Error & e)
  {
    fail("model", e.what());
  }
  try
  {
    controller.gains.validate();
  }
  catch(const Error & e)
  {
    fail("gains", e.what());
  }
  try
  {
    controller.weights.validate();
  }
  catch(const Error & e)
  {
    fail("weights", e.what());
  }
  try
  {
    explorer.validate();
  }
  catch(const Error & e)
  {
    fail("exploration", e.what());
  }
  try
  {
    noise.validate();
  }
  catch(const Error & e)
  {
    fail("noise", e.what());
  }
  for(std::size_t k = 0; k < pushes.size(); ++k)
  {
    const auto & p = pushes[k];
    if(!p.t && p.step >= footsteps.size())
    {
      fail("pushes[" + std::to_string(k) + "].step", "refers to a step that does not exist");
    }
    if(!(p.swingFraction >= 0.) || p.swingFraction > 1.)
    {
      fail("pushes[" + std::to_string(k) + "].swing_fraction", "must be in [0, 1]");
    }
    if(p.t && !(*p.t >= 0.))
    {
      fail("pushes[" + std::to_string(k) + "].t", "must be non-negative");
    }
  }
  for(std::size_t k = 1; k < footsteps.size(); ++k)
  {
    if(footsteps[k].side == footsteps[k - 1].side)
    {
      fail("steps[" + std::to_string(k) + "].side", "steps must alternate feet");
    }
  }
}

ScenarioConfig parseScenario(const std::string & text, const std::vector<ScenarioOverride> & overrides)
{
  toml::table root;
  try
  {
    root = toml::parse(text);
  }
  catch(const toml::parse_error & e)
  {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::InvalidConfig, msg.str());
  }
  for(const auto & o : overrides)
  {
    applyOverride(root, o);
  }
  return fromTable(root);
}

ScenarioConfig loadScenario(const std::filesystem::path & path, const std::vector<ScenarioOverride> & overrides)
{
  std::ifstream in(path);
  if(!in)
  {
    throw Error(ErrorCode::InvalidConfig, "cannot read scenario file '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseScenario(ss.str(), overrides);
}

} // namespace foothold
