#include <foothold/qp_solver.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <foothold/error.h>

namespace foothold
{

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSchurRcond = 1e-13;

double sign(BoundState s)
{
  return s == BoundState::Lower ? 1. : -1.;
}

/// Factorization of the KKT system restricted to the free variables of a working set.
class WorkingSet
{
public:
  WorkingSet(const DenseQp & qp, const MatrixXd & E, const VectorXd & e) : qp_(qp), E_(E), e_(e) {}

  ActiveSet active;

  /// Returns false when the free columns of E lose row rank.
  bool factor()
  {
    free_.clear();
    fixed_.clear();
    for(int i = 0; i < static_cast<int>(active.size()); ++i)
    {
      (active[i] == BoundState::Free ? free_ : fixed_).push_back(i);
    }
    const auto nF = static_cast<Eigen::Index>(free_.size());
    const Eigen::Index m = E_.rows();
    if(nF < m)
    {
      return false;
    }
    hff_.compute(qp_.H(free_, free_));
    if(hff_.info() != Eigen::Success)
    {
      throw Error(ErrorCode::InvalidArgument, "QP Hessian is not positive definite on the free subspace");
    }
    eF_ = E_(Eigen::all, free_);
    hinvEt_ = hff_.solve(eF_.transpose());
    if(m > 0)
    {
      schur_.compute(eF_ * hinvEt_);
      if(schur_.info() != Eigen::Success || schur_.rcond() < kSchurRcond)
      {
        return false;
      }
    }
    return true;
  }

  double boundValue(int i) const { return active[i] == BoundState::Lower ? qp_.lower[i] : qp_.upper[i]; }

  /// Exact minimizer of the working-set subproblem with its multipliers.
  void solve(VectorXd & x, VectorXd & lambda, VectorXd & u) const
  {
    const Eigen::Index n = qp_.size();
    x.resize(n);
    u = VectorXd::Zero(n);
    for(int i : fixed_)
    {
      x[i] = boundValue(i);
    }
    const VectorXd xA = x(fixed_);
    VectorXd g = qp_.f(free_);
    VectorXd eRhs = e_;
    if(!fixed_.empty())
    {
      g += qp_.H(free_, fixed_) * xA;
      eRhs -= E_(Eigen::all, fixed_) * xA;
    }
    const VectorXd hinvG = hff_.solve(g);
    if(E_.rows() > 0)
    {
      lambda = schur_.solve(eRhs + eF_ * hinvG);
      x(free_) = hinvEt_ * lambda - hinvG;
    }
    else
    {
      lambda.resize(0);
      x(free_) = -hinvG;
    }
    const VectorXd grad = qp_.H * x + qp_.f - E_.transpose() * lambda;
    for(int i : fixed_)
    {
      u[i] = sign(active[i]) * grad[i];
    }
  }

  /** Primal and dual step directions for adding the bound on `j` with sign `s`.
   *
   * Returns false (and z = 0) when the bound normal is linearly dependent on
   * the working set, in which case only the multipliers move.
   */
  bool direction(int j, double s, VectorXd & z, VectorXd & rE, VectorXd & rB) const
  {
    const Eigen::Index n = qp_.size();
    const Eigen::Index m = E_.rows();
    z = VectorXd::Zero(n);
    rB = VectorXd::Zero(n);
    const auto pos = std::find(free_.begin(), free_.end(), j) - free_.begin();
    VectorXd np = VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
    np[pos] = s;

    bool dependent = false;
    if(m > 0)
    {
      // n_p in the row space of E_F means fixing j would make E_F rank deficient.
      const Eigen::ColPivHouseholderQR<MatrixXd> qr(eF_.transpose());
      const VectorXd y = qr.solve(-np);
      const double residual = (eF_.transpose() * y + np).norm();
      dependent = residual <= 1e-10 * std::max(1., eF_.norm() * y.norm());
      if(dependent)
      {
        rE = y;
      }
    }
    if(!dependent)
    {
      const VectorXd hinvNp = hff_.solve(np);
      if(m > 0)
      {
        rE = -schur_.solve(eF_ * hinvNp);
        z(free_) = hinvNp + hinvEt_ * rE;
      }
      else
      {
        rE.resize(0);
        z(free_) = hinvNp;
      }
    }
    const VectorXd hz = qp_.H * z;
    for(int i : fixed_)
    {
      const double etr = m > 0 ? E_.col(i).dot(rE) : 0.;
      rB[i] = sign(active[i]) * (hz[i] - etr);
    }
    return !dependent;
  }

private:
  const DenseQp & qp_;
  const MatrixXd & E_;
  const VectorXd & e_;
  std::vector<int> free_;
  std::vector<int> fixed_;
  Eigen::LLT<MatrixXd> hff_;
  MatrixXd eF_;
  MatrixXd hinvEt_;
  Eigen::LDLT<MatrixXd> schur_;
};

void checkDimensions(const DenseQp & qp)
{
  const Eigen::Index n = qp.H.rows();
  const bool ok = qp.H.cols() == n && qp.f.size() == n && qp.lower.size() == n && qp.upper.size() == n
                  && qp.E.rows() == qp.e.size() && (qp.E.rows() == 0 || qp.E.cols() == n);
  if(!ok)
  {
    throw Error(ErrorCode::DimensionMismatch, "inconsistent QP dimensions");
  }
  for(Eigen::Index i = 0; i < n; ++i)
  {
    if(std::isnan(qp.lower[i]) || std::isnan(qp.upper[i]) || qp.lower[i] > qp.upper[i])
    {
      throw Error(ErrorCode::Infeasible, "empty bound interval on variable " + std::to_string(i));
    }
  }
}

} // namespace

double QpResult::kktResidual() const
{
  return std::max({stationarityResidual, equalityResidual, boundViolation, complementarity});
}

QpResult solveDenseQp(const DenseQp & qp, const QpSolverOptions & options, const ActiveSet * warmStart)
{
  checkDimensions(qp);
  const Eigen::Index n = qp.size();
  const double tol = options.feasibilityTolerance;

  // Keep an independent subset of the equality rows; the dropped ones are checked at the end.
  MatrixXd E(0, n);
  VectorXd e(0);
  std::vector<int> keptRows;
  if(qp.E.rows() > 0)
  {
    const Eigen::ColPivHouseholderQR<MatrixXd> qr(qp.E.transpose());
    const Eigen::Index rank = qr.rank();
    for(Eigen::Index k = 0; k < rank; ++k)
    {
      keptRows.push_back(qr.colsPermutation().indices()[k]);
    }
    std::sort(keptRows.begin(), keptRows.end());
    E = qp.E(keptRows, Eigen::all);
    e = qp.e(keptRows);
  }

  WorkingSet ws(qp, E, e);
  ws.active.assign(n, BoundState::Free);
  bool warm = false;
  if(warmStart && static_cast<Eigen::Index>(warmStart->size()) == n)
  {
    ws.active = *warmStart;
    for(Eigen::Index i = 0; i < n; ++i)
    {
      const BoundState s = ws.active[i];
      if((s == BoundState::Lower && !std::isfinite(qp.lower[i])) || (s == BoundState::Upper && !std::isfinite(qp.upper[i])))
      {
        ws.active[i] = BoundState::Free;
      }
    }
    warm = ws.factor();
  }
  if(!warm)
  {
    ws.active.assign(n, BoundState::Free);
    if(!ws.factor())
    {
      throw Error(ErrorCode::Infeasible, "equality constraints are rank deficient");
    }
  }

  VectorXd x, lambda, u;
  ws.solve(x, lambda, u);
  // A warm start is only usable from a dual-feasible working set.
  while(warm)
  {
    Eigen::Index worst = -1;
    double most = -tol;
    for(Eigen::Index i = 0; i < n; ++i)
    {
      if(ws.active[i] != BoundState::Free && u[i] < most)
      {
        most = u[i];
        worst = i;
      }
    }
    if(worst < 0)
    {
      break;
    }
    ws.active[worst] = BoundState::Free;
    ws.factor();
    ws.solve(x, lambda, u);
  }

  const int maxIterations = options.maxIterations > 0 ? options.maxIterations : static_cast<int>(10 * (n + qp.E.rows()) + 10);
  int iterations = 0;
  VectorXd z, rE, rB;
  while(true)
  {
    int p = -1;
    BoundState side = BoundState::Free;
    double worst = tol;
    for(Eigen::Index i = 0; i < n; ++i)
    {
      if(ws.active[i] != BoundState::Free)
      {
        continue;
      }
      if(qp.lower[i] - x[i] > worst)
      {
        worst = qp.lower[i] - x[i];
        p = static_cast<int>(i);
        side = BoundState::Lower;
      }
      if(x[i] - qp.upper[i] > worst)
      {
        worst = x[i] - qp.upper[i];
        p = static_cast<int>(i);
        side = BoundState::Upper;
      }
    }
    if(p < 0)
    {
      break;
    }
    const double s = sign(side);
    const double bound = side == BoundState::Lower ? qp.lower[p] : qp.upper[p];
    double up = 0.;
    while(true)
    {
      if(++iterations > maxIterations)
      {
        throw Error(ErrorCode::MaxIterations, "active-set iteration limit reached");
      }
      const bool primalStep = ws.direction(p, s, z, rE, rB);
      double tDual = std::numeric_limits<double>::infinity();
      int drop = -1;
      for(Eigen::Index i = 0; i < n; ++i)
      {
        if(ws.active[i] != BoundState::Free && rB[i] < 0.)
        {
          const double t = -u[i] / rB[i];
          if(t < tDual)
          {
            tDual = t;
            drop = static_cast<int>(i);
          }
        }
      }
      double tPrimal = std::numeric_limits<double>::infinity();
      if(primalStep)
      {
        const double slope = s * z[p];
        if(slope > 0.)
        {
          tPrimal = -s * (x[p] - bound) / slope;
        }
      }
      if(!std::isfinite(tPrimal) && drop < 0)
      {
        throw Error(ErrorCode::Infeasible, "bounds and equality constraints are inconsistent");
      }
      const double t = std::min(tPrimal, tDual);
      if(primalStep)
      {
        x += t * z;
      }
      if(E.rows() > 0)
      {
        lambda += t * rE;
      }
      u += t * rB;
      up += t;
      if(tPrimal <= tDual)
      {
        ws.active[p] = side;
        ws.factor();
        ws.solve(x, lambda, u);
        break;
      }
      ws.active[drop] = BoundState::Free;
      u[drop] = 0.;
      ws.factor();
    }
  }

  QpResult out;
  out.x = x;
  out.active = ws.active;
  out.iterations = iterations;
  out.boundMultipliers = u.cwiseMax(0.);
  out.equalityMultipliers = VectorXd::Zero(qp.E.rows());
  for(std::size_t k = 0; k < keptRows.size(); ++k)
  {
    out.equalityMultipliers[keptRows[k]] = lambda[static_cast<Eigen::Index>(k)];
  }

  VectorXd stationarity = qp.H * x + qp.f;
  if(qp.E.rows() > 0)
  {
    stationarity -= qp.E.transpose() * out.equalityMultipliers;
    out.equalityResidual = (qp.E * x - qp.e).cwiseAbs().maxCoeff();
  }
  double violation = 0.;
  double complementarity = 0.;
  for(Eigen::Index i = 0; i < n; ++i)
  {
    if(ws.active[i] != BoundState::Free)
    {
      stationarity[i] -= sign(ws.active[i]) * u[i];
      complementarity += std::abs(u[i] * (x[i] - ws.boundValue(static_cast<int>(i))));
    }
    violation = std::max({violation, qp.lower[i] - x[i], x[i] - qp.upper[i]});
  }
  out.stationarityResidual = n > 0 ? stationarity.cwiseAbs().maxCoeff() : 0.;
  out.boundViolation = violation;
  out.complementarity = complementarity;
  if(out.equalityResidual > 1e-6 * std::max(1., qp.e.size() > 0 ? qp.e.cwiseAbs().maxCoeff() : 0.))
  {
    throw Error(ErrorCode::Infeasible, "equality constraints are inconsistent");
  }
  return out;
}

} // namespace foothold
