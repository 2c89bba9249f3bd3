#include <foothold/controller.h>

#include <algorithm>
#include <cmath>

#include <foothold/error.h>

namespace foothold
{

namespace
{

constexpr int kCopPasses = 4;
constexpr double kCopLoadTolerance = 0.02;
constexpr double kBrakingMargin = 0.9;

// Keeps the flywheel slow enough to stop at its angle limit with the available torque.
void applyFlywheelBraking(QpProblem & problem, const ReducedBipedState & state, const JointLimits & limits, double dt)
{
  for(Eigen::Index i : {kFlywheelX, kFlywheelY})
  {
    const Eigen::Index k = i - kFlywheelX;
    const double q = state.flywheelAngle[k];
    const double v = state.flywheelRate[k];
    const double a = limits.aMax[i];
    const double b = kBrakingMargin * a;
    // Largest next-tick rate from which braking at b stops before the limit.
    const auto stoppable = [&](double gap) {
      const double g = std::max(gap, 0.);
      return -b * dt + std::sqrt(b * b * dt * dt + 2. * b * g);
    };
    const double vUp = stoppable(limits.qMax[i] - q - 0.5 * v * dt);
    const double vDown = stoppable(q - limits.qMin[i] + 0.5 * v * dt);
    double hi = std::min(problem.vdotMax[i], (vUp - v) / dt);
    double lo = std::max(problem.vdotMin[i], (-vDown - v) / dt);
    hi = std::clamp(hi, -a, a);
    lo = std::clamp(lo, -a, a);
    if(lo > hi)
    {
      lo = hi = 0.5 * (lo + hi);
    }
    problem.vdotMin[i] = lo;
    problem.vdotMax[i] = hi;
  }
}

} // namespace

BalanceController::BalanceController(ControllerConfig config) : config_(std::move(config))
{
  config_.model.validate();
  config_.gains.validate();
  config_.weights.validate();
  reset();
}

void BalanceController::reset()
{
  const double half = 0.5 * config_.model.lipm.mass * config_.model.lipm.gravity;
  fzPrev_ = {half, half};
  wasGrounded_ = {true, true};
  justLanded_ = {false, false};
  warm_.clear();
}

FootholdPolygon shrinkPolygon(const FootholdPolygon & polygon, double margin)
{
  const auto v = polygon.distinctVertices();
  if(v.size() < 3 || polygon.isDegenerate())
  {
    return polygon;
  }
  const Point2 c = polygon.centroid();
  for(double m = margin; m > 1e-4; m *= 0.5)
  {
    try
    {
      FootholdPolygon out = polygon;
      for(std::size_t i = 0; i < v.size(); ++i)
      {
        const Eigen::Vector2d e = v[(i + 1) % v.size()] - v[i];
        const Line2 edge = Line2::through(v[i], e);
        out = cropPolygon(out, Line2::through(v[i] + m * edge.normal(), e), c);
      }
      if(!out.isDegenerate())
      {
        return out;
      }
    }
    catch(const Error &)
    {
    }
  }
  return polygon;
}

FootholdPolygon supportPolygon(const ReducedBipedState & state)
{
  std::vector<Point2> pts;
  for(const auto & f : state.feet)
  {
    if(!f.inContact || f.assumedContact.empty())
    {
      continue;
    }
    for(const auto & v : f.assumedContact.vertices())
    {
      pts.push_back(f.pose.toWorld(v));
    }
  }
  if(pts.empty())
  {
    return FootholdPolygon();
  }
  return convexHull(pts);
}

ActuationCommand commandFromSolution(const std::vector<FootContacts> & contacts, const QpSolution & solution)
{
  ActuationCommand cmd;
  for(const auto & c : contacts)
  {
    const auto wrench = footWrench(c, solution.rho);
    FootCommand & f = cmd.foot(c.side);
    f.fz = wrench[5];
    f.loaded = wrench[5] > 1e-9;
    if(f.loaded)
    {
      f.cop = copFromWrench(wrench);
    }
  }
  for(Side s : {Side::Left, Side::Right})
  {
    cmd.foot(s).tiltAccel = solution.vdot[tiltDof(s)];
  }
  cmd.flywheelAccel = solution.vdot.segment<2>(kFlywheelX);
  return cmd;
}

ControlOutput BalanceController::update(const ReducedBipedState & estimate, const IcpTarget & reference,
                                        const std::array<std::optional<Point2>, 2> & copOverride, double dt)
{
  const auto & model = config_.model;
  ControlOutput out;
  out.icp = computeIcp(estimate.com, estimate.comVelocity, model.lipm);
  out.desiredCmp = cmpControlLaw(out.icp, reference, model.lipm, config_.gains);
  out.support = supportPolygon(estimate);
  out.momentumWeight = momentumWeightSchedule(out.icp, out.support, config_.gains);

  std::vector<std::pair<Side, Pose2>> poses;
  std::vector<FootholdPolygon> polygons;
  for(Side s : {Side::Left, Side::Right})
  {
    const FootState & f = estimate.foot(s);
    if(f.inContact && !f.assumedContact.empty())
    {
      poses.emplace_back(s, f.pose);
      polygons.push_back(f.assumedContact);
    }
  }
  if(poses.empty())
  {
    throw Error(ErrorCode::Infeasible, "no foot on the ground");
  }
  out.contacts = makeFootContacts(poses, polygons, model.friction);
  const Eigen::Index nrho = totalRho(out.contacts);

  for(Side s : {Side::Left, Side::Right})
  {
    const std::size_t i = static_cast<std::size_t>(s);
    const bool grounded = estimate.foot(s).inContact && !estimate.foot(s).assumedContact.empty();
    justLanded_[i] = grounded && !wasGrounded_[i];
    wasGrounded_[i] = grounded;
  }

  std::vector<FootContacts> copFeet;
  std::vector<Point2> copTargets;
  std::vector<double> fzPrev;
  std::vector<bool> overridden;
  for(std::size_t k = 0; k < out.contacts.size(); ++k)
  {
    const Side s = out.contacts[k].side;
    const std::size_t i = static_cast<std::size_t>(s);
    Point2 target;
    if(copOverride[i])
    {
      target = *copOverride[i];
    }
    else
    {
      const FootholdPolygon inner = shrinkPolygon(polygons[k], config_.copMargin);
      target = inner.closestPoint(poses[k].second.toLocal(out.desiredCmp));
    }
    out.desiredCop[i] = target;
    // A foot that just touched down has no load history yet; assume an even share.
    const double mg = model.lipm.mass * model.lipm.gravity;
    const double fz = fzPrev_[i] > kFzFloor || !justLanded_[i] ? fzPrev_[i] : mg / static_cast<double>(out.contacts.size());
    if(fz > kFzFloor)
    {
      copFeet.push_back(out.contacts[k]);
      copTargets.push_back(target);
      fzPrev.push_back(fz);
      overridden.push_back(copOverride[i].has_value());
    }
  }

  QpInputs in;
  in.momentumRate = desiredLinearMomentumRate(estimate.com, out.desiredCmp, model.lipm);
  in.weights = config_.weights;
  in.weights.momentum = out.momentumWeight;
  in.limits = modelLimits(model, config_.gains);
  in.dt = dt;
  if(!copFeet.empty())
  {
    in.cop = assembleCopObjective(copFeet, copTargets, fzPrev, nrho);
  }

  MotionTask flywheel;
  flywheel.name = "flywheel_return";
  flywheel.J = Eigen::MatrixXd::Zero(2, kNumDofs);
  flywheel.J(0, kFlywheelX) = 1.;
  flywheel.J(1, kFlywheelY) = 1.;
  flywheel.p = -config_.flywheelKp * estimate.flywheelAngle - config_.flywheelKd * estimate.flywheelRate;
  in.tasks.push_back(flywheel);
  MotionTask feet;
  feet.name = "flat_feet";
  feet.J = Eigen::MatrixXd::Zero(2, kNumDofs);
  feet.p.resize(2);
  for(Side s : {Side::Left, Side::Right})
  {
    const int r = static_cast<int>(s);
    const FootState & f = estimate.foot(s);
    feet.J(r, tiltDof(s)) = 1.;
    feet.p[r] = -config_.footKp * f.tilt - config_.footKd * f.tiltRate;
  }
  in.tasks.push_back(feet);

  for(int pass = 0;; ++pass)
  {
    out.problem = assembleQp(estimate, model, out.contacts, in);
    applyFlywheelBraking(out.problem, estimate, in.limits, dt);
    for(std::size_t k = 0; k < overridden.size(); ++k)
    {
      if(overridden[k])
      {
        out.problem.CP.segment<2>(2 * static_cast<Eigen::Index>(k)) *= config_.overrideCopGain;
      }
    }
    const ActiveSet * warm = warm_.size() == static_cast<std::size_t>(out.problem.nv() + nrho) ? &warm_ : nullptr;
    out.solution = solveQp(out.problem, warm);
    warm_ = out.solution.active;
    out.command = commandFromSolution(out.contacts, out.solution);
    if(copFeet.empty() || pass + 1 >= kCopPasses)
    {
      break;
    }
    // The CoP rows are scaled by a load guess; re-solve when the realized load moved away from it.
    bool moved = false;
    for(std::size_t k = 0; k < copFeet.size(); ++k)
    {
      const double fz = out.command.foot(copFeet[k].side).fz;
      if(fz > kFzFloor && std::abs(fz - fzPrev[k]) > kCopLoadTolerance * fzPrev[k])
      {
        fzPrev[k] = fz;
        moved = true;
      }
    }
    if(!moved)
    {
      break;
    }
    in.cop = assembleCopObjective(copFeet, copTargets, fzPrev, nrho);
  }
  for(Side s : {Side::Left, Side::Right})
  {
    fzPrev_[static_cast<std::size_t>(s)] = out.command.foot(s).fz;
  }
  return out;
}

} // namespace foothold
