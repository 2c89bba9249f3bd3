#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <foothold/model.h>
#include <foothold/qp_solver.h>

namespace foothold
{

/// Vertical forces below this are treated as an unloaded foot (N).
constexpr double kFzFloor = 10.;

/// Four friction-pyramid edges at atan(mu) from `normal`, 90 degrees apart in azimuth.
std::array<Eigen::Vector3d, 4> contactBasis(const Eigen::Vector3d & normal, double mu);

struct ContactPoint
{
  /// Contact location in the sole frame.
  Point2 position = Point2::Zero();
  Pose2 solePose;
  /// Pyramid edges in the sole frame.
  std::array<Eigen::Vector3d, 4> basis;
  /// First index of this point's four force magnitudes in the global rho vector.
  Eigen::Index rhoOffset = 0;
};

struct FootContacts
{
  Side side = Side::Left;
  Pose2 pose;
  std::vector<ContactPoint> points;

  Eigen::Index rhoBegin() const { return points.empty() ? 0 : points.front().rhoOffset; }
  Eigen::Index rhoSize() const { return 4 * static_cast<Eigen::Index>(points.size()); }
  /// Maps this foot's rho to the sole-frame wrench [torque; force] about the sole origin.
  Eigen::MatrixXd wrenchMap() const;
};

/// One contact point per distinct polygon vertex, rho indices assigned in order.
std::vector<FootContacts> makeFootContacts(const std::vector<std::pair<Side, Pose2>> & poses,
                                           const std::vector<FootholdPolygon> & polygons, double mu);

Eigen::Index totalRho(const std::vector<FootContacts> & feet);

struct CopObjective
{
  struct Foot
  {
    Side side = Side::Left;
    Eigen::MatrixXd wrenchMap;
    double fzPrev = 0.;
    Point2 desired = Point2::Zero();
    Eigen::Index rhoBegin = 0;
    Eigen::Index rhoSize = 0;
  };

  /// Selects the horizontal torques: CoP = (-tau_y, tau_x) / F_z.
  static Eigen::Matrix<double, 2, 6> selection();

  std::vector<Foot> feet;
  /// Block rows of P over the global rho vector.
  Eigen::MatrixXd P;
  Eigen::VectorXd r;
};

CopObjective assembleCopObjective(const std::vector<FootContacts> & feet, const std::vector<Point2> & desiredCops,
                                  const std::vector<double> & fzPrev, Eigen::Index rhoDimension);

struct MotionTask
{
  std::string name;
  Eigen::MatrixXd J;
  Eigen::VectorXd p;
  double weight = 1.;
};

struct QpWeights
{
  double momentum = 10.;
  double motion = 1.;
  double cop = 5.;
  double rho = 1e-5;
  double vdot = 1e-4;

  void validate() const;
};

struct JointLimits
{
  Eigen::VectorXd qMin;
  Eigen::VectorXd qMax;
  Eigen::VectorXd vMax;
  Eigen::VectorXd aMax;
};

/// Limits of the reduced model given the flywheel lunge configuration.
JointLimits modelLimits(const RobotModel & model, const BalanceGains & gains);

/// Per-coordinate acceleration bounds that keep one tick of motion inside position and velocity limits.
std::pair<Eigen::VectorXd, Eigen::VectorXd> accelerationBounds(const Eigen::VectorXd & q, const Eigen::VectorXd & v,
                                                               const JointLimits & limits, double dt);

/** Weighted QP over x = [vdot; rho].
 *
 * Equality: A vdot + Adot_v = W_g + Q_com rho + sum(W_ext) on the rows
 * [F_x, F_y, F_z, tau_x, tau_y] of the centroidal wrench.
 */
struct QpProblem
{
  Eigen::MatrixXd A;
  Eigen::VectorXd Adv;
  Eigen::VectorXd b;
  Eigen::VectorXd Ch;
  Eigen::MatrixXd J;
  Eigen::VectorXd p;
  Eigen::VectorXd CJ;
  Eigen::MatrixXd P;
  Eigen::VectorXd r;
  Eigen::VectorXd CP;
  Eigen::MatrixXd Qcom;
  Eigen::VectorXd Wg;
  std::vector<Eigen::VectorXd> Wext;
  Eigen::VectorXd rhoMin;
  Eigen::VectorXd vdotMin;
  Eigen::VectorXd vdotMax;
  Eigen::VectorXd Crho;
  Eigen::VectorXd Cvdot;

  Eigen::Index nv() const { return A.cols(); }
  Eigen::Index nrho() const { return Qcom.cols(); }

  void validate() const;
  DenseQp toDense() const;
  /// Right-hand side W_g + sum(W_ext) - Adot_v.
  Eigen::VectorXd wrenchTarget() const;
};

struct QpSolution
{
  Eigen::VectorXd vdot;
  Eigen::VectorXd rho;
  double kktResidual = 0.;
  double dynamicsResidual = 0.;
  int iterations = 0;
  ActiveSet active;
};

QpSolution solveQp(const QpProblem & problem, const ActiveSet * warmStart = nullptr);

/// Centroidal momentum matrix of the reduced model (5 x kNumDofs).
Eigen::MatrixXd momentumMatrix(const RobotModel & model);

/// Centroidal wrench map of the contact forces about the CoM (5 x nrho).
Eigen::MatrixXd centroidalWrenchMap(const std::vector<FootContacts> & feet, const Point2 & com, double height);

struct QpInputs
{
  Eigen::Vector2d momentumRate = Eigen::Vector2d::Zero();
  std::vector<MotionTask> tasks;
  CopObjective cop;
  QpWeights weights;
  JointLimits limits;
  double dt = 0.002;
};

QpProblem assembleQp(const ReducedBipedState & state, const RobotModel & model,
                     const std::vector<FootContacts> & feet, const QpInputs & inputs);

/// Net sole-frame wrench of one foot for a solution.
Eigen::Matrix<double, 6, 1> footWrench(const FootContacts & foot, const Eigen::VectorXd & rho);

/// CoP from a sole-frame wrench [tau; f]; requires f_z > 0.
Point2 copFromWrench(const Eigen::Matrix<double, 6, 1> & wrench);

nlohmann::json toJson(const QpProblem & problem, const QpSolution & solution);

} // namespace foothold
