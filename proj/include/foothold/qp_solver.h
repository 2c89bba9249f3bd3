#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace foothold
{

/** Strictly convex QP with equalities and variable bounds:
 *
 *   min 0.5 x'Hx + f'x   s.t.  E x = e,  lower <= x <= upper
 *
 * Bounds may be +-infinity.
 */
struct DenseQp
{
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return H.rows(); }
  double objective(const Eigen::VectorXd & x) const { return 0.5 * x.dot(H * x) + f.dot(x); }
};

/// Per-variable bound activity: at lower, free, or at upper.
enum class BoundState : std::int8_t
{
  Lower = -1,
  Free = 0,
  Upper = 1,
};

using ActiveSet = std::vector<BoundState>;

struct QpSolverOptions
{
  double feasibilityTolerance = 1e-9;
  int maxIterations = 0; ///< 0 selects 10 (n + m)
};

struct QpResult
{
  Eigen::VectorXd x;
  /// Multipliers of E x = e (stationarity: Hx + f = E' lambda + bound terms).
  Eigen::VectorXd equalityMultipliers;
  /// Non-negative multiplier per variable, zero for free variables.
  Eigen::VectorXd boundMultipliers;
  ActiveSet active;
  int iterations = 0;
  double stationarityResidual = 0.;
  double equalityResidual = 0.;
  double boundViolation = 0.;
  double complementarity = 0.;

  double kktResidual() const;
};

/** Dual active-set solver over bound constraints.
 *
 * Starts from the equality-constrained minimizer (or from `warmStart`,
 * pruned to a dual-feasible subset) and activates violated bounds one at a
 * time; each working set is solved with a dense KKT factorization over the
 * free variables. Throws Error(Infeasible) or Error(MaxIterations).
 */
QpResult solveDenseQp(const DenseQp & qp, const QpSolverOptions & options = {}, const ActiveSet * warmStart = nullptr);

} // namespace foothold
