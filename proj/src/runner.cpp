#include <foothold/runner.h>

#include <cmath>
#include <limits>
#include <random>

#include <foothold/error.h>

namespace foothold
{

const char * toString(OutcomeKind k)
{
  return k == OutcomeKind::Completed ? "completed" : "fell";
}

namespace
{

enum class Stage
{
  Transfer,
  Swing,
  Explore,
  FinalTransfer,
};

class Runner
{
public:
  Runner(const ScenarioConfig & cfg, const RunOptions & options)
  : cfg_(cfg), options_(options), model_(cfg.controller.model), controller_(cfg.controller)
  {
    cfg_.validate();
    std::seed_seq senseSeed{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 1u};
    std::seed_seq placeSeed{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 2u};
    senseRng_.seed(senseSeed);
    placeRng_.seed(placeSeed);
    omega0_ = model_.lipm.omega0();
    sole_ = model_.sole();
    result_.name = cfg.name;
    result_.seed = cfg.seed;
    result_.dt = cfg.sim.dt;
    result_.log = GroundReferenceLog(model_.lipm);
    pushTimes_.resize(cfg.pushes.size());
    pushDone_.assign(cfg.pushes.size(), false);
    for(std::size_t k = 0; k < cfg.pushes.size(); ++k)
    {
      pushTimes_[k] = cfg.pushes[k].t;
    }
  }

  RunResult run()
  {
    const double mg = model_.lipm.mass * model_.lipm.gravity;
    for(std::size_t i = 0; i < 2; ++i)
    {
      FootState & f = state_.feet[i];
      f.pose = cfg_.initialFeet[i];
      f.inContact = true;
      f.trueContact = sole_;
      f.assumedContact = sole_;
      f.load = 0.5 * mg;
    }
    state_.com = 0.5 * (cfg_.initialFeet[0].position + cfg_.initialFeet[1].position);
    ref_ = IcpReference::constant(state_.com, omega0_);
    refStart_ = 0.;
    if(cfg_.footsteps.empty())
    {
      startFinal();
    }
    else
    {
      startTransfer(0);
    }

    double maxTime = cfg_.transferTime + cfg_.finalHold + 1.;
    for(std::size_t k = 0; k < cfg_.footsteps.size(); ++k)
    {
      maxTime += cfg_.transferTime + cfg_.swingTime + cfg_.explorer.timeout + 1.;
    }
    const double dt = cfg_.sim.dt;
    std::size_t tick = 0;
    while(true)
    {
      while(stage_ != Stage::Explore && state_.t >= stageEnd_ - 1e-9 && !finished_)
      {
        advanceStage();
      }
      if(finished_)
      {
        break;
      }
      applyPushes();
      const SensorBundle sensors = sense(state_, cfg_.noise, model_, senseRng_);
      std::array<std::optional<Point2>, 2> copOverride;
      bool explorationDone = false;
      if(stage_ == Stage::Explore)
      {
        explorationDone = exploreTick(sensors, copOverride);
      }
      ReducedBipedState estimate = state_;
      estimate.com = sensors.com;
      estimate.comVelocity = sensors.comVelocity;
      const IcpTarget target = ref_.evaluate(state_.t - refStart_);

      ControlOutput control;
      try
      {
        control = controller_.update(estimate, target, copOverride, dt);
      }
      catch(const Error & e)
      {
        fall(std::string("controller failure: ") + e.what());
        break;
      }
      if(options_.qpDumpEvery > 0 && tick % options_.qpDumpEvery == 0)
      {
        auto j = toJson(control.problem, control.solution);
        j["t"] = state_.t;
        result_.qpDumps.push_back(std::move(j));
      }

      TickRecord rec;
      ReducedBipedState next = stepDynamics(state_, control.command, model_, cfg_.controller.gains, cfg_.sim, &rec);
      LogRow row;
      row.t = state_.t;
      row.com = state_.com;
      row.comVelocity = state_.comVelocity;
      row.icpRef = target.icp;
      row.cop = rec.cop;
      row.cmp = rec.cmp;
      row.phase = state_.phase;
      row.weight = control.momentumWeight;
      row.flywheelAngle = state_.flywheelAngle;
      row.flywheelRate = state_.flywheelRate;
      row.flywheelTorque = rec.flywheelTorque;
      row.footFz = rec.footFz;
      row.footTilt = {state_.feet[0].tilt, state_.feet[1].tilt};
      result_.log.append(std::move(row), control.support);
      state_ = next;
      ++tick;

      if(explorationDone)
      {
        nextStep(step_ + 1);
      }
      if(checkFall())
      {
        break;
      }
      if(state_.t > maxTime)
      {
        fall("scenario exceeded its time budget");
        break;
      }
    }
    return std::move(result_);
  }

private:
  Point2 refIcpNow() const { return ref_.evaluate(state_.t - refStart_).icp; }

  Point2 assumedCentroidWorld(Side s) const
  {
    const FootState & f = state_.foot(s);
    return f.pose.toWorld(f.assumedContact.centroid());
  }

  void startTransfer(std::size_t i)
  {
    step_ = i;
    const FootstepSpec & st = cfg_.footsteps[i];
    const Side stanceSide = other(st.side);
    const FootState & stance = state_.foot(stanceSide);
    const Point2 cS = assumedCentroidWorld(stanceSide);
    FootholdPolygon upcoming = sole_;
    if(cfg_.terrainKnown)
    {
      const FootholdPolygon truth = trueContactAt(st.terrain, st.pose, st.pose, sole_);
      if(!truth.empty())
      {
        upcoming = truth;
      }
    }
    const Point2 cL = st.pose.toWorld(upcoming.centroid());
    eos_ = adjustFinalIcp(stance.assumedContact, upcoming, 0.5 * (cS + cL), cS);
    const double ts = cfg_.swingTime;
    const double tt = cfg_.transferTime;
    const Point2 swingStart = cS + (eos_ - cS) * std::exp(-omega0_ * ts);
    const Point2 from = refIcpNow();
    std::vector<IcpSegment> segments{{tt, connectingCmp(from, swingStart, tt, omega0_), from}, {ts, cS, swingStart}};
    ref_ = IcpReference(std::move(segments), eos_, omega0_);
    refStart_ = state_.t;
    stage_ = Stage::Transfer;
    stageEnd_ = state_.t + tt;
    state_.phase = WalkPhase::DoubleSupport;
  }

  void startSwing()
  {
    const FootstepSpec & st = cfg_.footsteps[step_];
    FootState & f = state_.foot(st.side);
    f.inContact = false;
    f.load = 0.;
    f.tilt = 0.;
    f.tiltRate = 0.;
    state_.phase = WalkPhase::Swing;
    state_.swingSide = st.side;
    stage_ = Stage::Swing;
    stageEnd_ = state_.t + cfg_.swingTime;
    landing_ = sole_.transformed(st.pose, "world");
    for(std::size_t k = 0; k < cfg_.pushes.size(); ++k)
    {
      if(!cfg_.pushes[k].t && cfg_.pushes[k].step == step_)
      {
        pushTimes_[k] = state_.t + cfg_.pushes[k].swingFraction * cfg_.swingTime;
      }
    }
  }

  void touchdown()
  {
    const FootstepSpec & st = cfg_.footsteps[step_];
    std::normal_distribution<double> n(0., 1.);
    const double ex = n(placeRng_), ey = n(placeRng_);
    Pose2 actual = st.pose;
    actual.position += cfg_.noise.placementSigma * Point2(ex, ey);
    FootState & f = state_.foot(st.side);
    f.pose = actual;
    f.trueContact = trueContactAt(st.terrain, st.pose, actual, sole_);
    f.inContact = true;
    f.tilt = 0.;
    f.tiltRate = 0.;
    f.load = 0.;
    landing_ = FootholdPolygon();
    if(f.trueContact.empty())
    {
      fall("landing foot found no contact");
      return;
    }
    f.cop = f.trueContact.centroid();
    f.assumedContact = cfg_.terrainKnown ? f.trueContact : sole_;
    result_.stepsCompleted = step_ + 1;

    const bool explore = cfg_.explorationEnabled && !cfg_.terrainKnown && st.explore.value_or(true);
    if(!explore)
    {
      nextStep(step_ + 1);
      return;
    }
    explorerConfig_ = cfg_.explorer;
    if(st.prior)
    {
      explorerConfig_.prior = *st.prior;
    }
    explorer_ = ExplorationState{};
    explorer_.assumedFoothold = sole_;
    ExplorationRecord rec;
    rec.step = step_;
    rec.side = st.side;
    rec.start = state_.t;
    rec.terrain = st.terrain;
    rec.trueContact = f.trueContact;
    rec.prior = explorerConfig_.prior;
    if(st.terrain.kind == TerrainKind::Line)
    {
      const Line2 l = st.terrain.line();
      const Point2 a = actual.toLocal(st.pose.toWorld(l.point));
      const Point2 b = actual.toLocal(st.pose.toWorld(l.point + l.direction));
      rec.trueLine = Line2::through(a, b - a);
    }
    if(st.terrain.kind == TerrainKind::Point)
    {
      rec.truePoint = actual.toLocal(st.pose.toWorld(st.terrain.point));
    }
    result_.explorations.push_back(std::move(rec));
    ref_ = IcpReference::constant(refIcpNow(), omega0_);
    refStart_ = state_.t;
    stage_ = Stage::Explore;
    stageEnd_ = std::numeric_limits<double>::infinity();
    state_.phase = WalkPhase::Exploring;
  }

  bool exploreTick(const SensorBundle & sensors, std::array<std::optional<Point2>, 2> & copOverride)
  {
    const Side side = cfg_.footsteps[step_].side;
    const FootSensors & fs = sensors.foot(side);
    const ExplorerSensors es{fs.cop, fs.plane, fs.angularVelocity, fs.load};
    ExplorerOutput out = explorerStep(explorer_, es, explorerConfig_, cfg_.sim.dt);
    explorer_ = std::move(out.state);
    FootState & f = state_.foot(side);
    f.assumedContact = out.footholdUpdate ? *out.footholdUpdate : explorer_.assumedFoothold;
    copOverride[static_cast<std::size_t>(side)] = out.desiredCop;
    if(!out.footholdUpdate)
    {
      return false;
    }
    ExplorationRecord & rec = result_.explorations.back();
    rec.trace = explorer_.trace;
    rec.history = explorer_.copHistory;
    rec.finished = true;
    return true;
  }

  void nextStep(std::size_t i)
  {
    if(i < cfg_.footsteps.size())
    {
      startTransfer(i);
    }
    else
    {
      startFinal();
    }
  }

  void startFinal()
  {
    const Point2 target = 0.5 * (assumedCentroidWorld(Side::Left) + assumedCentroidWorld(Side::Right));
    const Point2 from = refIcpNow();
    const double tt = cfg_.transferTime;
    ref_ = IcpReference({{tt, connectingCmp(from, target, tt, omega0_), from}}, target, omega0_);
    refStart_ = state_.t;
    stage_ = Stage::FinalTransfer;
    stageEnd_ = state_.t + tt + cfg_.finalHold;
    state_.phase = WalkPhase::DoubleSupport;
  }

  void advanceStage()
  {
    switch(stage_)
    {
      case Stage::Transfer:
        startSwing();
        break;
      case Stage::Swing:
        touchdown();
        break;
      case Stage::FinalTransfer:
        result_.outcome = {OutcomeKind::Completed, state_.t, ""};
        finished_ = true;
        break;
      case Stage::Explore:
        break;
    }
  }

  void applyPushes()
  {
    for(std::size_t k = 0; k < cfg_.pushes.size(); ++k)
    {
      if(!pushDone_[k] && pushTimes_[k] && state_.t >= *pushTimes_[k] - 1e-9)
      {
        state_ = applyPush(state_, cfg_.pushes[k].impulse, model_);
        result_.pushes.push_back({state_.t, cfg_.pushes[k].impulse});
        pushDone_[k] = true;
      }
    }
  }

  void fall(const std::string & reason)
  {
    result_.outcome = {OutcomeKind::Fell, state_.t, reason};
    finished_ = true;
  }

  bool checkFall()
  {
    if(finished_)
    {
      return true;
    }
    std::vector<Point2> pts;
    for(const auto & f : state_.feet)
    {
      if(f.inContact && !f.trueContact.empty())
      {
        for(const auto & v : f.trueContact.vertices())
        {
          pts.push_back(f.pose.toWorld(v));
        }
      }
      if(f.inContact && f.tilt >= model_.footTiltLimit)
      {
        fall("foot tipped over");
        return true;
      }
    }
    for(const auto & v : landing_.vertices())
    {
      pts.push_back(v);
    }
    if(pts.empty())
    {
      fall("no support");
      return true;
    }
    const FootholdPolygon region = convexHull(pts);
    const Point2 icp = computeIcp(state_.com, state_.comVelocity, model_.lipm);
    const double d = region.signedDistance(icp);
    if(d > cfg_.fallDistance)
    {
      fall("ICP left the capture region");
      return true;
    }
    if(d > cfg_.fallSaturatedDistance && state_.flywheelSaturated && d > previousDistance_)
    {
      fall("ICP diverging with the flywheel saturated");
      return true;
    }
    previousDistance_ = d;
    return false;
  }

  ScenarioConfig cfg_;
  RunOptions options_;
  RobotModel model_;
  BalanceController controller_;
  std::mt19937_64 senseRng_;
  std::mt19937_64 placeRng_;
  double omega0_ = 1.;
  FootholdPolygon sole_;
  ReducedBipedState state_;
  RunResult result_;
  Stage stage_ = Stage::Transfer;
  std::size_t step_ = 0;
  double stageEnd_ = 0.;
  IcpReference ref_;
  double refStart_ = 0.;
  Point2 eos_ = Point2::Zero();
  FootholdPolygon landing_;
  ExplorationState explorer_;
  ExplorerConfig explorerConfig_;
  std::vector<std::optional<double>> pushTimes_;
  std::vector<bool> pushDone_;
  double previousDistance_ = std::numeric_limits<double>::infinity();
  bool finished_ = false;
};

nlohmann::json lineJson(const Line2 & l)
{
  return {{"point", {l.point.x(), l.point.y()}}, {"direction", {l.direction.x(), l.direction.y()}}};
}

} // namespace

RunResult runScenario(const ScenarioConfig & config, const RunOptions & options)
{
  return Runner(config, options).run();
}

nlohmann::json toJson(const ExplorationRecord & r)
{
  nlohmann::json j;
  j["step"] = r.step;
  j["side"] = toString(r.side);
  j["start"] = r.start;
  j["duration"] = r.trace.duration;
  j["finished"] = r.finished;
  j["prior"] = toString(r.prior);
  j["terrain"] = toString(r.terrain.kind);
  j["true_contact"] = polygonJson(r.trueContact);
  if(r.trueLine)
  {
    j["true_line"] = lineJson(*r.trueLine);
  }
  if(r.truePoint)
  {
    j["true_point"] = {r.truePoint->x(), r.truePoint->y()};
  }
  j["waypoints"] = nlohmann::json::array();
  for(const auto & w : r.trace.waypoints)
  {
    j["waypoints"].push_back({{"t", w.t}, {"point", {w.point.x(), w.point.y()}}});
  }
  j["crops"] = nlohmann::json::array();
  for(const auto & c : r.trace.crops)
  {
    j["crops"].push_back({{"t", c.t},
                          {"source", toString(c.detection.source)},
                          {"axis", lineJson(c.detection.axis)},
                          {"omega", c.detection.omega},
                          {"theta", c.detection.theta},
                          {"keep", {c.keep.x(), c.keep.y()}},
                          {"area_after", c.areaAfter}});
  }
  j["cop_history"] = nlohmann::json::array();
  for(const auto & h : r.history)
  {
    j["cop_history"].push_back({h.t, h.cop.x(), h.cop.y()});
  }
  j["final_foothold"] = polygonJson(r.trace.finalFoothold);
  return j;
}

nlohmann::json RunResult::sidecar() const
{
  nlohmann::json j;
  j["schema"] = "foothold.run/1";
  j["name"] = name;
  j["seed"] = seed;
  j["dt"] = dt;
  j["outcome"] = {{"kind", toString(outcome.kind)}, {"t", outcome.t}, {"reason", outcome.reason}};
  j["steps_completed"] = stepsCompleted;
  j["supports"] = log.supportsJson();
  j["pushes"] = nlohmann::json::array();
  for(const auto & p : pushes)
  {
    j["pushes"].push_back({{"t", p.t}, {"impulse", {p.impulse.x(), p.impulse.y()}}});
  }
  j["exploration"] = nlohmann::json::array();
  for(const auto & e : explorations)
  {
    j["exploration"].push_back(toJson(e));
  }
  return j;
}

} // namespace foothold
