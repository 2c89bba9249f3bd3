#include <foothold/momentum_qp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <foothold/error.h>

namespace foothold
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix3d yawRotation(double yaw)
{
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

nlohmann::json matrixJson(const Eigen::MatrixXd & m)
{
  nlohmann::json rows = nlohmann::json::array();
  for(Eigen::Index i = 0; i < m.rows(); ++i)
  {
    nlohmann::json row = nlohmann::json::array();
    for(Eigen::Index j = 0; j < m.cols(); ++j)
    {
      const double v = m(i, j);
      row.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf"));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vectorJson(const Eigen::VectorXd & v)
{
  nlohmann::json out = nlohmann::json::array();
  for(Eigen::Index i = 0; i < v.size(); ++i)
  {
    out.push_back(std::isfinite(v[i]) ? nlohmann::json(v[i]) : nlohmann::json(v[i] > 0 ? "inf" : "-inf"));
  }
  return out;
}

void addLeastSquares(Eigen::MatrixXd & H, Eigen::VectorXd & f, const Eigen::MatrixXd & M, const Eigen::VectorXd & target,
                     const Eigen::VectorXd & weight)
{
  if(M.rows() == 0)
  {
    return;
  }
  const Eigen::MatrixXd CM = weight.asDiagonal() * M;
  H.noalias() += M.transpose() * CM;
  f.noalias() -= CM.transpose() * target;
}

} // namespace

std::array<Eigen::Vector3d, 4> contactBasis(const Eigen::Vector3d & normal, double mu)
{
  if(!(mu > 0.) || !std::isfinite(mu))
  {
    throw Error(ErrorCode::InvalidArgument, "friction coefficient must be positive");
  }
  const Eigen::Vector3d n = normal.normalized();
  Eigen::Vector3d e1, e2;
  planeBasis(Plane3{Eigen::Vector3d::Zero(), n}, e1, e2);
  const double scale = 1. / std::sqrt(1. + mu * mu);
  return {(n + mu * e1) * scale, (n - mu * e1) * scale, (n + mu * e2) * scale, (n - mu * e2) * scale};
}

Eigen::MatrixXd FootContacts::wrenchMap() const
{
  Eigen::MatrixXd Q(6, rhoSize());
  Eigen::Index col = 0;
  for(const auto & c : points)
  {
    const Eigen::Vector3d p(c.position.x(), c.position.y(), 0.);
    for(const auto & b : c.basis)
    {
      Q.col(col).head<3>() = p.cross(b);
      Q.col(col).tail<3>() = b;
      ++col;
    }
  }
  return Q;
}

std::vector<FootContacts> makeFootContacts(const std::vector<std::pair<Side, Pose2>> & poses,
                                           const std::vector<FootholdPolygon> & polygons, double mu)
{
  if(poses.size() != polygons.size())
  {
    throw Error(ErrorCode::DimensionMismatch, "one contact polygon per foot");
  }
  const auto basis = contactBasis(Eigen::Vector3d::UnitZ(), mu);
  std::vector<FootContacts> feet;
  Eigen::Index offset = 0;
  for(std::size_t k = 0; k < poses.size(); ++k)
  {
    FootContacts foot;
    foot.side = poses[k].first;
    foot.pose = poses[k].second;
    for(const auto & v : polygons[k].distinctVertices())
    {
      foot.points.push_back(ContactPoint{v, foot.pose, basis, offset});
      offset += 4;
    }
    if(foot.points.empty())
    {
      throw Error(ErrorCode::EmptyFoothold, "loaded foot without contact points");
    }
    feet.push_back(std::move(foot));
  }
  return feet;
}

Eigen::Index totalRho(const std::vector<FootContacts> & feet)
{
  Eigen::Index n = 0;
  for(const auto & f : feet)
  {
    n += f.rhoSize();
  }
  return n;
}

Eigen::Matrix<double, 2, 6> CopObjective::selection()
{
  Eigen::Matrix<double, 2, 6> S = Eigen::Matrix<double, 2, 6>::Zero();
  S(0, 1) = -1.;
  S(1, 0) = 1.;
  return S;
}

CopObjective assembleCopObjective(const std::vector<FootContacts> & feet, const std::vector<Point2> & desiredCops,
                                  const std::vector<double> & fzPrev, Eigen::Index rhoDimension)
{
  if(desiredCops.size() != feet.size() || fzPrev.size() != feet.size())
  {
    throw Error(ErrorCode::DimensionMismatch, "one desired CoP and one previous F_z per foot");
  }
  CopObjective out;
  const auto m = static_cast<Eigen::Index>(feet.size());
  out.P = Eigen::MatrixXd::Zero(2 * m, rhoDimension);
  out.r.resize(2 * m);
  const Eigen::Matrix<double, 2, 6> S = CopObjective::selection();
  for(Eigen::Index k = 0; k < m; ++k)
  {
    const FootContacts & foot = feet[static_cast<std::size_t>(k)];
    const double fz = fzPrev[static_cast<std::size_t>(k)];
    if(foot.points.empty())
    {
      throw Error(ErrorCode::InvalidArgument, "CoP objective on a foot without contact points");
    }
    if(!(fz > kFzFloor))
    {
      throw Error(ErrorCode::UnloadedFoot, std::string(toString(foot.side)) + " foot carries " + std::to_string(fz) + " N");
    }
    if(foot.rhoBegin() + foot.rhoSize() > rhoDimension)
    {
      throw Error(ErrorCode::DimensionMismatch, "contact indices exceed the rho dimension");
    }
    CopObjective::Foot entry;
    entry.side = foot.side;
    entry.wrenchMap = foot.wrenchMap();
    entry.fzPrev = fz;
    entry.desired = desiredCops[static_cast<std::size_t>(k)];
    entry.rhoBegin = foot.rhoBegin();
    entry.rhoSize = foot.rhoSize();
    out.P.block(2 * k, entry.rhoBegin, 2, entry.rhoSize) = (S * entry.wrenchMap) / fz;
    out.r.segment<2>(2 * k) = entry.desired;
    out.feet.push_back(std::move(entry));
  }
  return out;
}

void QpWeights::validate() const
{
  if(!(momentum > 0.) || !(motion > 0.) || !(cop > 0.) || !(rho > 0.) || !(vdot > 0.))
  {
    throw Error(ErrorCode::InvalidConfig, "qp weights must be positive");
  }
}

JointLimits modelLimits(const RobotModel & model, const BalanceGains & gains)
{
  JointLimits l;
  l.qMin = Eigen::VectorXd::Constant(kNumDofs, -kInf);
  l.qMax = Eigen::VectorXd::Constant(kNumDofs, kInf);
  l.vMax = Eigen::VectorXd::Constant(kNumDofs, kInf);
  l.aMax = Eigen::VectorXd::Constant(kNumDofs, model.comAccelLimit);
  for(Eigen::Index i : {kFlywheelX, kFlywheelY})
  {
    l.qMin[i] = -gains.flywheelAngleLimit;
    l.qMax[i] = gains.flywheelAngleLimit;
    l.vMax[i] = model.flywheelRateLimit;
    l.aMax[i] = gains.lungeTorqueLimit / model.flywheelInertia;
  }
  for(Eigen::Index i : {kTiltLeft, kTiltRight})
  {
    l.qMin[i] = 0.;
    l.qMax[i] = model.footTiltLimit;
    l.vMax[i] = model.footTiltRateLimit;
    l.aMax[i] = model.footTiltAccelLimit;
  }
  return l;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> accelerationBounds(const Eigen::VectorXd & q, const Eigen::VectorXd & v,
                                                               const JointLimits & limits, double dt)
{
  const Eigen::Index n = q.size();
  if(v.size() != n || limits.qMin.size() != n || limits.qMax.size() != n || limits.vMax.size() != n
     || limits.aMax.size() != n)
  {
    throw Error(ErrorCode::DimensionMismatch, "acceleration bounds: inconsistent sizes");
  }
  if(!(dt > 0.))
  {
    throw Error(ErrorCode::InvalidArgument, "acceleration bounds need dt > 0");
  }
  Eigen::VectorXd lo(n), hi(n);
  for(Eigen::Index i = 0; i < n; ++i)
  {
    const double a = limits.aMax[i];
    double up = std::min({a, (limits.vMax[i] - v[i]) / dt, 2. * (limits.qMax[i] - q[i] - v[i] * dt) / (dt * dt)});
    double down = std::max({-a, (-limits.vMax[i] - v[i]) / dt, 2. * (limits.qMin[i] - q[i] - v[i] * dt) / (dt * dt)});
    up = std::clamp(up, -a, a);
    down = std::clamp(down, -a, a);
    if(down > up)
    {
      const double mid = 0.5 * (up + down);
      up = down = mid;
    }
    lo[i] = down;
    hi[i] = up;
  }
  return {lo, hi};
}

void QpProblem::validate() const
{
  const Eigen::Index n = nv();
  const Eigen::Index k = nrho();
  const Eigen::Index rows = A.rows();
  bool ok = Adv.size() == rows && b.size() == rows && Ch.size() == rows && Qcom.rows() == rows && Wg.size() == rows;
  ok = ok && J.cols() == n && p.size() == J.rows() && CJ.size() == J.rows();
  ok = ok && P.cols() == k && r.size() == P.rows() && CP.size() == P.rows();
  ok = ok && rhoMin.size() == k && Crho.size() == k;
  ok = ok && vdotMin.size() == n && vdotMax.size() == n && Cvdot.size() == n;
  for(const auto & w : Wext)
  {
    ok = ok && w.size() == rows;
  }
  if(!ok)
  {
    throw Error(ErrorCode::DimensionMismatch, "QP problem dimensions are inconsistent");
  }
  const bool weightsOk = (Ch.array() >= 0.).all() && (CJ.array() > 0.).all() && (CP.array() > 0.).all()
                         && (Crho.array() > 0.).all() && (Cvdot.array() > 0.).all();
  if(!weightsOk)
  {
    throw Error(ErrorCode::InvalidArgument, "QP weights must be positive");
  }
  if((rhoMin.array() < 0.).any())
  {
    throw Error(ErrorCode::InvalidArgument, "rho_min must be non-negative");
  }
}

Eigen::VectorXd QpProblem::wrenchTarget() const
{
  Eigen::VectorXd rhs = Wg - Adv;
  for(const auto & w : Wext)
  {
    rhs += w;
  }
  return rhs;
}

DenseQp QpProblem::toDense() const
{
  validate();
  const Eigen::Index n = nv();
  const Eigen::Index k = nrho();
  DenseQp qp;
  qp.H = Eigen::MatrixXd::Zero(n + k, n + k);
  qp.f = Eigen::VectorXd::Zero(n + k);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.rows(), n + k);
  M.leftCols(n) = A;
  addLeastSquares(qp.H, qp.f, M, b, Ch);

  M = Eigen::MatrixXd::Zero(J.rows(), n + k);
  M.leftCols(n) = J;
  addLeastSquares(qp.H, qp.f, M, p, CJ);

  M = Eigen::MatrixXd::Zero(P.rows(), n + k);
  M.rightCols(k) = P;
  addLeastSquares(qp.H, qp.f, M, r, CP);

  qp.H.diagonal().head(n) += Cvdot;
  qp.H.diagonal().tail(k) += Crho;

  qp.E.resize(A.rows(), n + k);
  qp.E << A, -Qcom;
  qp.e = wrenchTarget();
  qp.lower.resize(n + k);
  qp.upper.resize(n + k);
  qp.lower << vdotMin, rhoMin;
  qp.upper << vdotMax, Eigen::VectorXd::Constant(k, kInf);
  return qp;
}

QpSolution solveQp(const QpProblem & problem, const ActiveSet * warmStart)
{
  const DenseQp qp = problem.toDense();
  const QpResult res = solveDenseQp(qp, {}, warmStart);
  QpSolution sol;
  sol.vdot = res.x.head(problem.nv());
  sol.rho = res.x.tail(problem.nrho());
  sol.kktResidual = res.kktResidual();
  sol.iterations = res.iterations;
  sol.active = res.active;
  const Eigen::VectorXd residual = problem.A * sol.vdot - problem.Qcom * sol.rho - problem.wrenchTarget();
  sol.dynamicsResidual = residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.;
  return sol;
}

Eigen::MatrixXd momentumMatrix(const RobotModel & model)
{
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, kNumDofs);
  A(0, kComX) = model.lipm.mass;
  A(1, kComY) = model.lipm.mass;
  A(3, kFlywheelX) = model.flywheelInertia;
  A(4, kFlywheelY) = model.flywheelInertia;
  return A;
}

Eigen::MatrixXd centroidalWrenchMap(const std::vector<FootContacts> & feet, const Point2 & com, double height)
{
  Eigen::MatrixXd Q(5, totalRho(feet));
  const Eigen::Vector3d c(com.x(), com.y(), height);
  for(const auto & foot : feet)
  {
    const Eigen::Matrix3d R = yawRotation(foot.pose.yaw);
    for(const auto & point : foot.points)
    {
      const Point2 pw = foot.pose.toWorld(point.position);
      const Eigen::Vector3d lever = Eigen::Vector3d(pw.x(), pw.y(), 0.) - c;
      for(std::size_t j = 0; j < point.basis.size(); ++j)
      {
        const Eigen::Vector3d bw = R * point.basis[j];
        const Eigen::Index col = point.rhoOffset + static_cast<Eigen::Index>(j);
        Q.col(col).head<3>() = bw;
        Q.col(col).tail<2>() = lever.cross(bw).head<2>();
      }
    }
  }
  return Q;
}

QpProblem assembleQp(const ReducedBipedState & state, const RobotModel & model,
                     const std::vector<FootContacts> & feet, const QpInputs & inputs)
{
  inputs.weights.validate();
  const Eigen::Index n = kNumDofs;
  const Eigen::Index k = totalRho(feet);
  QpProblem qp;
  qp.A = momentumMatrix(model);
  qp.Adv = Eigen::VectorXd::Zero(5);
  qp.b = Eigen::VectorXd::Zero(5);
  qp.b.head<2>() = inputs.momentumRate;
  qp.Ch = Eigen::VectorXd::Zero(5);
  qp.Ch.head<2>().setConstant(inputs.weights.momentum);

  Eigen::Index taskRows = 0;
  for(const auto & task : inputs.tasks)
  {
    if(task.J.cols() != n || task.p.size() != task.J.rows() || !(task.weight > 0.))
    {
      throw Error(ErrorCode::DimensionMismatch, "motion task '" + task.name + "' is inconsistent");
    }
    taskRows += task.J.rows();
  }
  qp.J.resize(taskRows, n);
  qp.p.resize(taskRows);
  qp.CJ.resize(taskRows);
  Eigen::Index row = 0;
  for(const auto & task : inputs.tasks)
  {
    qp.J.middleRows(row, task.J.rows()) = task.J;
    qp.p.segment(row, task.J.rows()) = task.p;
    qp.CJ.segment(row, task.J.rows()).setConstant(task.weight * inputs.weights.motion);
    row += task.J.rows();
  }

  if(inputs.cop.P.rows() > 0 && inputs.cop.P.cols() != k)
  {
    throw Error(ErrorCode::DimensionMismatch, "CoP objective does not match the contact set");
  }
  qp.P = inputs.cop.P.rows() > 0 ? inputs.cop.P : Eigen::MatrixXd(0, k);
  qp.r = inputs.cop.r.size() > 0 ? inputs.cop.r : Eigen::VectorXd(0);
  qp.CP = Eigen::VectorXd::Constant(qp.P.rows(), inputs.weights.cop);

  qp.Qcom = centroidalWrenchMap(feet, state.com, model.lipm.height);
  qp.Wg = Eigen::VectorXd::Zero(5);
  qp.Wg[2] = -model.lipm.mass * model.lipm.gravity;
  qp.rhoMin = Eigen::VectorXd::Zero(k);
  std::tie(qp.vdotMin, qp.vdotMax) = accelerationBounds(state.positions(), state.velocities(), inputs.limits, inputs.dt);
  qp.Crho = Eigen::VectorXd::Constant(k, inputs.weights.rho);
  qp.Cvdot = Eigen::VectorXd::Constant(n, inputs.weights.vdot);
  qp.validate();
  return qp;
}

Eigen::Matrix<double, 6, 1> footWrench(const FootContacts & foot, const Eigen::VectorXd & rho)
{
  return foot.wrenchMap() * rho.segment(foot.rhoBegin(), foot.rhoSize());
}

Point2 copFromWrench(const Eigen::Matrix<double, 6, 1> & wrench)
{
  if(!(wrench[5] > 0.))
  {
    throw Error(ErrorCode::UnloadedFoot, "CoP of a wrench without normal force");
  }
  return {-wrench[1] / wrench[5], wrench[0] / wrench[5]};
}

nlohmann::json toJson(const QpProblem & problem, const QpSolution & solution)
{
  nlohmann::json j;
  j["schema"] = "foothold.qp/1";
  j["nv"] = problem.nv();
  j["nrho"] = problem.nrho();
  j["A"] = matrixJson(problem.A);
  j["Adot_v"] = vectorJson(problem.Adv);
  j["b"] = vectorJson(problem.b);
  j["C_h"] = vectorJson(problem.Ch);
  j["J"] = matrixJson(problem.J);
  j["p"] = vectorJson(problem.p);
  j["C_J"] = vectorJson(problem.CJ);
  j["P"] = matrixJson(problem.P);
  j["r"] = vectorJson(problem.r);
  j["C_P"] = vectorJson(problem.CP);
  j["Q_com"] = matrixJson(problem.Qcom);
  j["W_g"] = vectorJson(problem.Wg);
  j["W_ext"] = nlohmann::json::array();
  for(const auto & w : problem.Wext)
  {
    j["W_ext"].push_back(vectorJson(w));
  }
  j["rho_min"] = vectorJson(problem.rhoMin);
  j["vdot_min"] = vectorJson(problem.vdotMin);
  j["vdot_max"] = vectorJson(problem.vdotMax);
  j["C_rho"] = vectorJson(problem.Crho);
  j["C_vdot"] = vectorJson(problem.Cvdot);
  j["solution"] = {{"vdot", vectorJson(solution.vdot)},
                   {"rho", vectorJson(solution.rho)},
                   {"kkt_residual", solution.kktResidual},
                   {"dynamics_residual", solution.dynamicsResidual},
                   {"iterations", solution.iterations}};
  return j;
}

} // namespace foothold
