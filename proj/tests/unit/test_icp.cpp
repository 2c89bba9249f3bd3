#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include <foothold/error.h>
#include <foothold/icp.h>

using namespace foothold;

namespace
{

using Deriv = std::function<Eigen::Vector2d(const Eigen::Vector2d &)>;

Eigen::Vector2d rk4(const Deriv & f, Eigen::Vector2d x, double duration, int steps)
{
  const double h = duration / steps;
  for(int i = 0; i < steps; ++i)
  {
    const Eigen::Vector2d k1 = f(x);
    const Eigen::Vector2d k2 = f(x + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(x + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(x + h * k3);
    x += h / 6. * (k1 + 2. * k2 + 2. * k3 + k4);
  }
  return x;
}

const LipmParams kParams{};

} // namespace

TEST(LipmParams, Omega)
{
  EXPECT_NEAR(kParams.omega0(), std::sqrt(9.81 / 0.9), 1e-12);
  EXPECT_NEAR(kParams.omega0(), 3.3015, 1e-4);
  LipmParams bad;
  bad.height = 0.;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(ComputeIcp, Examples)
{
  EXPECT_TRUE(computeIcp(Point2::Zero(), Eigen::Vector2d::Zero(), kParams).isZero());
  const Point2 icp = computeIcp({0.1, 0.}, {0.3, 0.}, kParams);
  EXPECT_NEAR(icp.x(), 0.1 + 0.3 / std::sqrt(9.81 / 0.9), 1e-15);
  EXPECT_NEAR(icp.y(), 0., 1e-15);
  const Point2 c(0.2, -0.1);
  EXPECT_LT(computeIcp(c, -kParams.omega0() * c, kParams).norm(), 1e-15);
}

TEST(IcpDynamics, ClosedFormExponential)
{
  const Point2 cmp = Point2::Zero();
  const Point2 x0(0.1, 0.);
  EXPECT_TRUE(icpDynamics(cmp, cmp, kParams).isZero());
  const auto f = [&](const Eigen::Vector2d & x) { return icpDynamics(x, cmp, kParams); };
  const Eigen::Vector2d numeric = rk4(f, x0, 0.2, 2000);
  const Eigen::Vector2d exact = cmp + (x0 - cmp) * std::exp(3.3015 * 0.2);
  // omega0 is 3.30151..., the closed form uses the exact value.
  const Eigen::Vector2d exactTrue = cmp + (x0 - cmp) * std::exp(kParams.omega0() * 0.2);
  EXPECT_LT((numeric - exactTrue).norm(), 1e-9);
  EXPECT_LT((exact - exactTrue).norm(), 1e-4);
  EXPECT_LT((icpDynamics(2. * x0, cmp, kParams) - 2. * icpDynamics(x0, cmp, kParams)).norm(), 1e-15);
}

TEST(IcpDynamics, FiniteDifferenceOfLipmTrajectory)
{
  // c(t) = cmp + a e^{w t} + b e^{-w t} solves c'' = w^2 (c - cmp).
  const double w = kParams.omega0();
  const Point2 cmp(0.02, -0.01);
  const Eigen::Vector2d a(0.01, 0.003), b(-0.02, 0.05);
  const auto com = [&](double t) -> Point2 { return cmp + a * std::exp(w * t) + b * std::exp(-w * t); };
  const auto comd = [&](double t) -> Eigen::Vector2d { return w * (a * std::exp(w * t) - b * std::exp(-w * t)); };
  const auto icp = [&](double t) { return computeIcp(com(t), comd(t), kParams); };
  const double h = 1e-5;
  for(double t = 0.; t < 1.; t += 0.1)
  {
    const Eigen::Vector2d fd = (icp(t + h) - icp(t - h)) / (2. * h);
    EXPECT_LT((fd - icpDynamics(icp(t), cmp, kParams)).norm(), 1e-6);
  }
}

TEST(CmpControlLaw, Examples)
{
  BalanceGains gains;
  const Point2 icp(0.05, 0.02);
  EXPECT_LT((cmpControlLaw(icp, {icp, Eigen::Vector2d::Zero()}, kParams, gains) - icp).norm(), 1e-15);

  gains.kp = 0.;
  const Point2 c(-0.03, 0.01);
  const IcpTarget ff{Point2(0.3, 0.3), kParams.omega0() * (icp - c)};
  EXPECT_LT((cmpControlLaw(icp, ff, kParams, gains) - c).norm(), 1e-15);

  gains.kp = 2.;
  const Point2 ref = Point2::Zero();
  const Point2 err(0.05, 0.);
  const Point2 cmp = cmpControlLaw(err, {ref, Eigen::Vector2d::Zero()}, kParams, gains);
  EXPECT_NEAR(cmp.x() - err.x(), 0.10, 1e-15);
}

TEST(CmpControlLaw, ClosedLoopErrorDecay)
{
  BalanceGains gains;
  const IcpTarget ref{Point2(0.01, 0.02), Eigen::Vector2d::Zero()};
  const Point2 x0 = ref.icp + Eigen::Vector2d(0.05, -0.02);
  const auto f = [&](const Eigen::Vector2d & x) { return icpDynamics(x, cmpControlLaw(x, ref, kParams, gains), kParams); };
  for(double t : {0.1, 0.3, 0.7})
  {
    const Eigen::Vector2d numeric = rk4(f, x0, t, 4000);
    const Eigen::Vector2d exact = ref.icp + (x0 - ref.icp) * std::exp(-gains.kp * kParams.omega0() * t);
    EXPECT_LT((numeric - exact).norm(), 1e-10);
  }
}

TEST(MomentumRate, LipmConsistencyAndSign)
{
  EXPECT_TRUE(desiredLinearMomentumRate({0.1, 0.}, {0.1, 0.}, kParams).isZero());
  const Eigen::Vector2d f = desiredLinearMomentumRate({0.1, 0.}, {0., 0.}, kParams);
  EXPECT_NEAR(f.norm(), 90. * 9.81 / 0.9 * 0.1, 1e-9);
  const double w = kParams.omega0();
  EXPECT_NEAR(f.x() / kParams.mass, w * w * 0.1, 1e-12);
  EXPECT_LT(desiredLinearMomentumRate({0., 0.}, {0.05, 0.}, kParams).x(), 0.);
}

TEST(MomentumRate, ComposesWithControlLaw)
{
  BalanceGains gains;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for(int i = 0; i < 50; ++i)
  {
    const Point2 com(u(rng), u(rng));
    const Point2 icp(u(rng), u(rng));
    const Point2 cmp = cmpControlLaw(icp, {icp, Eigen::Vector2d::Zero()}, kParams, gains);
    const Eigen::Vector2d rate = desiredLinearMomentumRate(com, cmp, kParams);
    const double w = kParams.omega0();
    EXPECT_LT((rate - kParams.mass * w * w * (com - icp)).norm(), 1e-9);
  }
}

TEST(AngularMomentumRate, Examples)
{
  EXPECT_TRUE(angularMomentumRate({0.1, 0.2}, {0.1, 0.2}, kParams).isZero());
  // Line foothold along x at y = 0; CMP 8 cm to its side, nearest CoP on the line.
  const Point2 cop(0.03, 0.);
  const Point2 cmp(0.03, 0.08);
  const Eigen::Vector2d r = angularMomentumRate(cmp, cop, kParams);
  EXPECT_NEAR(r.norm(), 90. * 9.81 * 0.08, 1e-9);
  // tau = z x r: perpendicular to the offset, about -x for an offset toward +y.
  const Eigen::Vector2d tau = comTorqueFromOffset(r);
  EXPECT_NEAR(tau.dot(cmp - cop), 0., 1e-12);
  EXPECT_NEAR(tau.x(), -90. * 9.81 * 0.08, 1e-9);
  EXPECT_LT((offsetFromComTorque(tau) - r).norm(), 1e-12);
  EXPECT_LT((angularMomentumRate(cmp + (cmp - cop), cop, kParams) - 2. * r).norm(), 1e-9);
}

TEST(IcpReference, SingleSegmentBackwardRecursion)
{
  const double w = 3.3015;
  LipmParams p;
  p.gravity = w * w * p.height;
  const PlannedFoothold step{FootholdPolygon::rectangle(0.26, 0.13), Point2::Zero()};
  const auto ref = buildIcpReference({step}, {0.5}, {0.}, Point2(0.1, 0.), p);
  ASSERT_EQ(ref.segments().size(), 1u);
  EXPECT_NEAR(ref.segments()[0].icpStart.x(), 0.1 * std::exp(-1.65075), 1e-12);
  const auto f = [&](const Eigen::Vector2d & x) { return icpDynamics(x, Point2::Zero(), p); };
  const Eigen::Vector2d end = rk4(f, ref.segments()[0].icpStart, 0.5, 4000);
  EXPECT_LT((end - Point2(0.1, 0.)).norm(), 1e-9);
}

TEST(IcpReference, FixedPointAndErrors)
{
  const Point2 c(0.1, 0.2);
  const auto ref = buildIcpReference({{FootholdPolygon::rectangle(0.2, 0.1), c}}, {0.4}, {0.1}, c, kParams);
  for(double t = 0.; t < 1.; t += 0.05)
  {
    EXPECT_LT((ref.evaluate(t).icp - c).norm(), 1e-15);
  }
  try
  {
    buildIcpReference({}, {}, {}, c, kParams);
    FAIL();
  }
  catch(const Error & e)
  {
    EXPECT_EQ(e.code(), ErrorCode::NoFootsteps);
  }
  EXPECT_THROW(buildIcpReference({{FootholdPolygon(), c}}, {0.4, 0.1}, {0.1}, c, kParams), Error);
}

TEST(IcpReference, MirrorSymmetry)
{
  const PlannedFoothold a{FootholdPolygon(), Point2(0.3, 0.12)};
  const PlannedFoothold b{FootholdPolygon(), Point2(0.6, -0.12)};
  const PlannedFoothold am{FootholdPolygon(), Point2(0.3, -0.12)};
  const PlannedFoothold bm{FootholdPolygon(), Point2(0.6, 0.12)};
  const auto ref = buildIcpReference({a, b}, {0.6, 0.6}, {0.2, 0.2}, Point2(0.6, 0.), kParams);
  const auto mir = buildIcpReference({am, bm}, {0.6, 0.6}, {0.2, 0.2}, Point2(0.6, 0.), kParams);
  for(double t = 0.; t < 2.; t += 0.07)
  {
    const auto x = ref.evaluate(t);
    const auto y = mir.evaluate(t);
    EXPECT_NEAR(x.icp.x(), y.icp.x(), 1e-14);
    EXPECT_NEAR(x.icp.y(), -y.icp.y(), 1e-14);
    EXPECT_NEAR(x.velocity.y(), -y.velocity.y(), 1e-12);
  }
}

TEST(IcpReference, ContinuityOnRandomPlans)
{
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  std::uniform_real_distribution<double> dur(0.1, 1.0);
  std::uniform_int_distribution<int> count(1, 8);
  for(int trial = 0; trial < 100; ++trial)
  {
    const int n = count(rng);
    std::vector<PlannedFoothold> plan;
    std::vector<double> swing, transfer;
    for(int k = 0; k < n; ++k)
    {
      plan.push_back({FootholdPolygon(), Point2(pos(rng), pos(rng))});
      swing.push_back(dur(rng));
      transfer.push_back(0.5 * dur(rng));
    }
    const Point2 fin(pos(rng), pos(rng));
    const auto ref = buildIcpReference(plan, swing, transfer, fin, kParams);
    for(std::size_t k = 0; k + 1 < ref.segments().size(); ++k)
    {
      EXPECT_LT((ref.segmentEnd(k) - ref.segments()[k + 1].icpStart).norm(), 1e-9);
    }
    EXPECT_LT((ref.segmentEnd(ref.segments().size() - 1) - fin).norm(), 1e-9);
    // Evaluated velocity is the ICP dynamics about the segment CMP.
    const double t = 0.3 * ref.duration();
    const auto x = ref.evaluate(t);
    EXPECT_LT((x.velocity - icpDynamics(x.icp, ref.cmpAt(t), kParams)).norm(), 1e-12);
  }
}

TEST(IcpReference, LeadInConnects)
{
  const auto ref = buildIcpReference({{FootholdPolygon(), Point2(0.1, 0.1)}}, {0.6}, {0.}, Point2(0.2, 0.), kParams);
  const Point2 from(-0.05, 0.02);
  const auto lead = ref.withLeadIn(from, 0.3);
  ASSERT_EQ(lead.segments().size(), 2u);
  EXPECT_LT((lead.segmentEnd(0) - ref.segments()[0].icpStart).norm(), 1e-12);
  EXPECT_LT((lead.evaluate(0.).icp - from).norm(), 1e-15);
}

TEST(AdjustFinalIcp, Examples)
{
  const auto sole = FootholdPolygon::rectangle(0.26, 0.13);
  const Point2 stance(0., 0.12);
  const Point2 nominal(0.15, 0.);
  EXPECT_LT((adjustFinalIcp(sole, sole, nominal, stance) - nominal).norm(), 1e-15);
  const FootholdPolygon point(std::vector<Point2>(4, Point2(0.01, 0.)));
  const Point2 adjusted = adjustFinalIcp(sole, point, nominal, stance);
  EXPECT_LT((adjusted - (stance + 0.2 * (nominal - stance))).norm(), 1e-15);
  const auto small = FootholdPolygon::rectangle(0.1, 0.05);
  EXPECT_LT((adjustFinalIcp(small, sole, nominal, stance) - nominal).norm(), 1e-15);
}

TEST(MomentumWeightSchedule, Examples)
{
  BalanceGains g;
  g.momentumWeightNominal = 1.;
  g.momentumWeightMax = 50.;
  g.edgeMargin = 0.03;
  const auto big = FootholdPolygon::rectangle(0.4, 0.4);
  EXPECT_DOUBLE_EQ(momentumWeightSchedule(Point2::Zero(), big, g), 1.);
  EXPECT_DOUBLE_EQ(momentumWeightSchedule({0.5, 0.}, big, g), 50.);
  EXPECT_NEAR(momentumWeightSchedule({0.2, 0.}, big, g), 1. + 0.5 * 49., 1e-12);
}

TEST(MomentumWeightSchedule, LipschitzContinuous)
{
  BalanceGains g;
  const auto sole = FootholdPolygon::rectangle(0.26, 0.13);
  const double L = (g.momentumWeightMax - g.momentumWeightNominal) / (2. * g.edgeMargin);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for(int i = 0; i < 2000; ++i)
  {
    const Point2 a(u(rng), u(rng));
    const Point2 b = a + 0.01 * Point2(u(rng), u(rng));
    EXPECT_LE(std::abs(momentumWeightSchedule(a, sole, g) - momentumWeightSchedule(b, sole, g)),
              L * (a - b).norm() + 1e-9);
  }
}

TEST(Lunging, CopInsideCannotPullIcpBack)
{
  const auto support = FootholdPolygon::rectangle(0.26, 0.13);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ang(0., 2. * 3.141592653589793);
  const double h = 1e-6;
  for(int trial = 0; trial < 40; ++trial)
  {
    const double a = ang(rng);
    const Point2 icp = support.closestPoint(Point2(std::cos(a), std::sin(a))) + 0.03 * Point2(std::cos(a), std::sin(a));
    ASSERT_GT(support.signedDistance(icp), 0.);
    for(int i = 0; i <= 20; ++i)
    {
      for(int j = 0; j <= 10; ++j)
      {
        const Point2 cop(-0.13 + 0.013 * i, -0.065 + 0.013 * j);
        const Eigen::Vector2d v = icpDynamics(icp, cop, kParams);
        // Moving along the ICP-to-CoP axis, away from the CoP.
        EXPECT_LT(v.dot(cop - icp), 0.);
        EXPECT_GT(support.signedDistance(icp + h * v), support.signedDistance(icp));
      }
    }
    // A CMP beyond the ICP does bring it back.
    const Point2 cmp = icp + 0.02 * (icp - support.closestPoint(icp)).normalized();
    EXPECT_LT(support.signedDistance(icp + h * icpDynamics(icp, cmp, kParams)), support.signedDistance(icp));
    EXPECT_GT(support.signedDistance(cmp), 0.);
  }
}
