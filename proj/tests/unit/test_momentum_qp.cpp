#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <foothold/error.h>
#include <foothold/momentum_qp.h>

using namespace foothold;

namespace
{

struct Fixture
{
  RobotModel model;
  BalanceGains gains;
  ReducedBipedState state;
  std::vector<FootContacts> feet;

  Fixture(const std::vector<FootholdPolygon> & polys, const std::vector<Pose2> & poses)
  {
    std::vector<std::pair<Side, Pose2>> sides;
    for(std::size_t k = 0; k < poses.size(); ++k)
    {
      sides.emplace_back(k == 0 ? Side::Left : Side::Right, poses[k]);
    }
    feet = makeFootContacts(sides, polys, model.friction);
  }

  QpInputs inputs() const
  {
    QpInputs in;
    in.limits = modelLimits(model, gains);
    in.dt = 0.002;
    return in;
  }
};

/// CoP from explicitly summed point forces, independent of the wrench map.
Point2 copBySummation(const FootContacts & foot, const Eigen::VectorXd & rho)
{
  double fz = 0., tx = 0., ty = 0.;
  for(const auto & c : foot.points)
  {
    for(std::size_t j = 0; j < 4; ++j)
    {
      const Eigen::Vector3d f = rho[c.rhoOffset + static_cast<Eigen::Index>(j)] * c.basis[j];
      fz += f.z();
      tx += c.position.y() * f.z();
      ty -= c.position.x() * f.z();
    }
  }
  return {-ty / fz, tx / fz};
}

double termResidual(const QpProblem & qp, const QpSolution & s, int term)
{
  switch(term)
  {
    case 0:
      return (qp.Ch.asDiagonal() * (qp.A * s.vdot - qp.b)).norm();
    case 1:
      return (qp.J * s.vdot - qp.p).norm();
    case 2:
      return (qp.P * s.rho - qp.r).norm();
    case 3:
      return s.rho.norm();
    default:
      return s.vdot.norm();
  }
}

} // namespace

TEST(ContactBasis, SymmetricPyramid)
{
  const auto b = contactBasis(Eigen::Vector3d::UnitZ(), 1.);
  const double s = 1. / std::sqrt(2.);
  const std::vector<Eigen::Vector3d> expected{{s, 0., s}, {-s, 0., s}, {0., s, s}, {0., -s, s}};
  for(const auto & e : expected)
  {
    double best = 1e9;
    for(const auto & v : b)
    {
      best = std::min(best, (v - e).norm());
    }
    EXPECT_LT(best, 1e-12);
  }
  for(const auto & v : contactBasis(Eigen::Vector3d::UnitZ(), 1e-9))
  {
    EXPECT_LT((v - Eigen::Vector3d::UnitZ()).norm(), 1e-8);
  }
  EXPECT_THROW(contactBasis(Eigen::Vector3d::UnitZ(), 0.), Error);
}

TEST(ContactBasis, RandomNormalsAngleAndCone)
{
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0., 1.);
  std::uniform_real_distribution<double> u(0., 1.);
  for(int trial = 0; trial < 200; ++trial)
  {
    const Eigen::Vector3d n = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const auto b = contactBasis(n, 0.7);
    for(const auto & v : b)
    {
      EXPECT_NEAR(v.norm(), 1., 1e-12);
      EXPECT_NEAR(v.dot(n), std::cos(std::atan(0.7)), 1e-12);
    }
    EXPECT_NEAR(b[0].cross(b[1]).dot(n), 0., 1e-12);
    EXPECT_NEAR((b[0] - n * b[0].dot(n)).dot(b[2] - n * b[2].dot(n)), 0., 1e-12);
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    for(const auto & v : b)
    {
      f += u(rng) * v;
    }
    const double normal = f.dot(n);
    const Eigen::Vector3d t = f - normal * n;
    EXPECT_LE(t.norm(), 0.7 * normal * std::sqrt(2.) + 1e-12);
  }
}

TEST(CopObjective, PointContactPinned)
{
  Fixture fx({FootholdPolygon(std::vector<Point2>{Point2::Zero()})}, {Pose2{}});
  const auto cop = assembleCopObjective(fx.feet, {Point2::Zero()}, {500.}, totalRho(fx.feet));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0., 100.);
  for(int i = 0; i < 20; ++i)
  {
    Eigen::VectorXd rho(4);
    rho << u(rng), u(rng), u(rng), u(rng);
    EXPECT_LT((cop.P * rho).norm(), 1e-12);
  }
}

TEST(CopObjective, EqualCornersGiveCenter)
{
  const auto sole = FootholdPolygon::rectangle(0.26, 0.13);
  Fixture fx({sole}, {Pose2{}});
  // Vertical-only basis on every corner.
  for(auto & c : fx.feet[0].points)
  {
    c.basis.fill(Eigen::Vector3d::UnitZ());
  }
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(16, 10.);
  const auto cop = assembleCopObjective(fx.feet, {Point2::Zero()}, {160.}, 16);
  EXPECT_LT((cop.P * rho).norm(), 1e-12);
  const Eigen::Matrix<double, 2, 6> S = CopObjective::selection();
  Eigen::Matrix<double, 2, 6> expected = Eigen::Matrix<double, 2, 6>::Zero();
  expected(0, 1) = -1.;
  expected(1, 0) = 1.;
  EXPECT_EQ(S, expected);
}

TEST(CopObjective, WrenchRatioOracle)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0., 50.);
  std::uniform_real_distribution<double> s(0.05, 0.3);
  for(int trial = 0; trial < 200; ++trial)
  {
    const auto sole = FootholdPolygon::rectangle(s(rng), s(rng));
    Fixture fx({sole}, {Pose2{Point2(0.1, 0.2), 0.3}});
    Eigen::VectorXd rho(16);
    for(int i = 0; i < 16; ++i)
    {
      rho[i] = u(rng);
    }
    const Point2 truth = copBySummation(fx.feet[0], rho);
    const double fz = footWrench(fx.feet[0], rho)[5];
    const auto cop = assembleCopObjective(fx.feet, {Point2::Zero()}, {fz}, 16);
    EXPECT_LT((cop.P * rho - truth).norm(), 1e-9);
    EXPECT_LT((copFromWrench(footWrench(fx.feet[0], rho)) - truth).norm(), 1e-12);
  }
}

TEST(CopObjective, UnloadedFootRejected)
{
  Fixture fx({FootholdPolygon::rectangle(0.26, 0.13)}, {Pose2{}});
  try
  {
    assembleCopObjective(fx.feet, {Point2::Zero()}, {kFzFloor}, 16);
    FAIL();
  }
  catch(const Error & e)
  {
    EXPECT_EQ(e.code(), ErrorCode::UnloadedFoot);
  }
  EXPECT_THROW(assembleCopObjective(fx.feet, {}, {100.}, 16), Error);
}

TEST(AccelerationBounds, Examples)
{
  JointLimits l;
  l.qMin = Eigen::VectorXd::Constant(1, -1.);
  l.qMax = Eigen::VectorXd::Constant(1, 1.);
  l.vMax = Eigen::VectorXd::Constant(1, 2.);
  l.aMax = Eigen::VectorXd::Constant(1, 10.);
  const double dt = 0.002;
  auto [lo, hi] = accelerationBounds(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), l, dt);
  EXPECT_DOUBLE_EQ(lo[0], -10.);
  EXPECT_DOUBLE_EQ(hi[0], 10.);
  std::tie(lo, hi) = accelerationBounds(Eigen::VectorXd::Constant(1, 1.), Eigen::VectorXd::Zero(1), l, dt);
  EXPECT_DOUBLE_EQ(hi[0], 0.);
  EXPECT_LE(lo[0], hi[0]);
}

TEST(AccelerationBounds, RolloutNeverOvershoots)
{
  JointLimits l;
  l.qMin = Eigen::VectorXd::Constant(1, -0.5);
  l.qMax = Eigen::VectorXd::Constant(1, 0.5);
  l.vMax = Eigen::VectorXd::Constant(1, 6.);
  l.aMax = Eigen::VectorXd::Constant(1, 1e4);
  const double dt = 0.002;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uq(0.4, 0.5);
  std::uniform_real_distribution<double> uv(0., 6.);
  for(int trial = 0; trial < 1000; ++trial)
  {
    double q = uq(rng);
    double v = uv(rng);
    if(q + v * dt > 0.5)
    {
      continue;
    }
    for(int k = 0; k < 50; ++k)
    {
      const auto [lo, hi] = accelerationBounds(Eigen::VectorXd::Constant(1, q), Eigen::VectorXd::Constant(1, v), l, dt);
      ASSERT_LE(lo[0], hi[0]);
      const double a = hi[0];
      q += v * dt + 0.5 * a * dt * dt;
      v += a * dt;
      EXPECT_LE(q, 0.5 + 1e-12);
      EXPECT_LE(v, 6. + 1e-9);
    }
  }
}

TEST(AssembleQp, StaticEquilibrium)
{
  const auto sole = FootholdPolygon::rectangle(0.26, 0.13);
  Fixture fx({sole}, {Pose2{}});
  const QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, fx.inputs());
  const auto sol = solveQp(qp);
  const double mg = fx.model.lipm.mass * fx.model.lipm.gravity;
  const auto w = footWrench(fx.feet[0], sol.rho);
  EXPECT_NEAR(w[5], mg, 1e-6);
  EXPECT_LT(sol.vdot.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(sol.dynamicsResidual, 1e-6);
  EXPECT_TRUE((sol.rho.array() >= 0.).all());
  // Five cost terms are all represented.
  EXPECT_EQ(qp.A.rows(), 5);
  EXPECT_EQ(qp.Ch.tail<3>().sum(), 0.);
  EXPECT_GT(qp.Crho.minCoeff(), 0.);
  EXPECT_GT(qp.Cvdot.minCoeff(), 0.);
}

TEST(AssembleQp, LungingEmergesOnPointFoothold)
{
  Fixture fx({FootholdPolygon(std::vector<Point2>{Point2::Zero()})}, {Pose2{}});
  const auto in0 = fx.inputs();
  const LipmParams & p = fx.model.lipm;
  const Point2 cmpDesired(0.05, -0.03);
  QpInputs in = in0;
  in.momentumRate = desiredLinearMomentumRate(fx.state.com, cmpDesired, p);
  const QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, in);
  const auto sol = solveQp(qp);
  EXPECT_GT(sol.vdot.segment<2>(kFlywheelX).norm(), 1.);
  const Eigen::VectorXd wrench = qp.Qcom * sol.rho;
  const Point2 cmp = fx.state.com - p.height * wrench.head<2>() / wrench[2];
  const Point2 cop = fx.feet[0].pose.toWorld(copFromWrench(footWrench(fx.feet[0], sol.rho)));
  const Eigen::Vector2d torque = fx.model.flywheelInertia * sol.vdot.segment<2>(kFlywheelX);
  EXPECT_LT((torque - comTorqueFromOffset(angularMomentumRate(cmp, cop, p))).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((cmp - cmpDesired).norm(), 1e-3);
  EXPECT_LT(cop.norm(), 1e-12);
}

TEST(AssembleQp, MotionWeightTradesAgainstMomentum)
{
  const auto sole = FootholdPolygon::rectangle(0.26, 0.13);
  Fixture fx({sole}, {Pose2{}});
  QpInputs in = fx.inputs();
  in.momentumRate = Eigen::Vector2d(200., 0.);
  MotionTask task{"com_hold", Eigen::MatrixXd::Zero(1, kNumDofs), Eigen::VectorXd::Zero(1), 1.};
  task.J(0, kComX) = 1.;
  double prevTask = 1e9, prevMomentum = -1.;
  for(double w : {1e-2, 1., 1e2, 1e4, 1e6, 1e8, 1e10})
  {
    task.weight = w;
    in.tasks = {task};
    const QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, in);
    const auto sol = solveQp(qp);
    const double taskRes = std::abs(sol.vdot[kComX]);
    const double momRes = std::abs(fx.model.lipm.mass * sol.vdot[kComX] - 200.);
    EXPECT_LE(taskRes, prevTask + 1e-9);
    EXPECT_GE(momRes, prevMomentum - 1e-9);
    prevTask = taskRes;
    prevMomentum = momRes;
  }
  EXPECT_LT(prevTask, 1e-3);
}

TEST(AssembleQp, WeightMonotonicityOnSeededProblems)
{
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1., 1.);
  for(int trial = 0; trial < 20; ++trial)
  {
    const Pose2 left{Point2(0., 0.12), 0.2 * u(rng)};
    const Pose2 right{Point2(0.1 * u(rng), -0.12), 0.2 * u(rng)};
    Fixture fx({FootholdPolygon::rectangle(0.26, 0.13), FootholdPolygon::rectangle(0.2, 0.05)}, {left, right});
    fx.state.com = Point2(0.05 * u(rng), 0.05 * u(rng));
    fx.state.flywheelAngle = Eigen::Vector2d(0.1 * u(rng), 0.1 * u(rng));
    QpInputs base = fx.inputs();
    base.momentumRate = Eigen::Vector2d(300. * u(rng), 300. * u(rng));
    MotionTask fly{"flywheel", Eigen::MatrixXd::Zero(2, kNumDofs), Eigen::Vector2d(5. * u(rng), 5. * u(rng)), 1.};
    fly.J(0, kFlywheelX) = 1.;
    fly.J(1, kFlywheelY) = 1.;
    base.tasks = {fly};
    const Eigen::Index k = totalRho(fx.feet);
    base.cop = assembleCopObjective(fx.feet, {Point2(0.05 * u(rng), 0.), Point2(0., 0.)}, {400., 400.}, k);
    for(int term = 0; term < 5; ++term)
    {
      double prev = 1e18;
      for(double scale : {0.1, 1., 10., 100.})
      {
        QpInputs in = base;
        double * w[] = {&in.weights.momentum, &in.weights.motion, &in.weights.cop, &in.weights.rho, &in.weights.vdot};
        *w[term] *= scale;
        const QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, in);
        const auto sol = solveQp(qp);
        EXPECT_LE(sol.dynamicsResidual, 1e-6);
        EXPECT_TRUE((sol.rho.array() >= qp.rhoMin.array()).all());
        const double res = term == 0 ? (qp.A * sol.vdot - qp.b).head<2>().norm() : termResidual(qp, sol, term);
        EXPECT_LE(res, prev * (1. + 1e-7) + 1e-9) << "term " << term << " scale " << scale;
        prev = res;

        // Linearized CoP versus the solution's own wrench ratio.
        for(std::size_t f = 0; f < fx.feet.size(); ++f)
        {
          const auto wr = footWrench(fx.feet[f], sol.rho);
          if(wr[5] <= kFzFloor)
          {
            continue;
          }
          const Point2 lin = qp.P.middleRows(2 * static_cast<Eigen::Index>(f), 2) * sol.rho;
          const Point2 act = copFromWrench(wr);
          EXPECT_LE((lin - act).norm(), std::abs(1. - 400. / wr[5]) * lin.norm() + 1e-9);
        }
      }
    }
  }
}

TEST(AssembleQp, DimensionMismatchRejected)
{
  Fixture fx({FootholdPolygon::rectangle(0.26, 0.13)}, {Pose2{}});
  QpInputs in = fx.inputs();
  in.tasks = {MotionTask{"bad", Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1), 1.}};
  EXPECT_THROW(assembleQp(fx.state, fx.model, fx.feet, in), Error);
}

TEST(AssembleQp, GravityBelowRhoMinInfeasible)
{
  Fixture fx({FootholdPolygon::rectangle(0.26, 0.13)}, {Pose2{}});
  QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, fx.inputs());
  qp.rhoMin.setConstant(200.);
  try
  {
    solveQp(qp);
    FAIL();
  }
  catch(const Error & e)
  {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(AssembleQp, JsonDump)
{
  Fixture fx({FootholdPolygon::rectangle(0.26, 0.13)}, {Pose2{}});
  const QpProblem qp = assembleQp(fx.state, fx.model, fx.feet, fx.inputs());
  const auto sol = solveQp(qp);
  const auto j = toJson(qp, sol);
  EXPECT_EQ(j.at("schema"), "foothold.qp/1");
  EXPECT_EQ(j.at("A").size(), 5u);
  EXPECT_EQ(j.at("Q_com").at(0).size(), 16u);
  EXPECT_EQ(j.at("solution").at("rho").size(), 16u);
}
