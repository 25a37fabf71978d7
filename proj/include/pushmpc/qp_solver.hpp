#pragma once

#include "pushmpc/types.hpp"

namespace pushmpc {

/// Convex quadratic program
///   min 0.5 z'Pz + q'z   s.t.   Gz <= h,   lo <= z <= hi.
/// p is treated as symmetric (the solver symmetrizes defensively) and must be
/// positive semidefinite. g may have zero rows; bounds may be +-infinity.
struct QpProblem {
  MatX p;
  VecX q;
  MatX g;
  VecX h;
  VecX lo;
  VecX hi;

  int num_vars() const { return static_cast<int>(q.size()); }
  int num_ineq() const { return static_cast<int>(g.rows()); }
};

enum class QpStatus { optimal, max_iters, infeasible };

/// Solver result. duals stacks [lambda_g (m); lambda_lo (n); lambda_hi (n)],
/// all nonnegative. status optimal guarantees kkt_residuals(...) <= tol.
/// On max_iters or infeasible the best iterate reached is returned.
struct QpSolution {
  VecX z;
  VecX duals;
  QpStatus status = QpStatus::max_iters;
  int iterations = 0;
  double objective = 0.0;
};

struct QpSettings {
  double tol = 1e-6;
  int max_iters = 4000;
};

/// KKT residual magnitudes of (z, duals) for a problem, all in inf-norm:
/// stationarity |Pz + q + G'l_g - l_lo + l_hi|, primal constraint violation,
/// and complementary slackness |lambda * slack|. Rows with infinite bounds
/// contribute their dual magnitude to the complementarity term.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double max() const;
};

KktResiduals kkt_residuals(const QpProblem& prob, const VecX& z,
                           const VecX& duals);

/// Solves the QP with an operator-splitting iteration (scaled ADMM) plus an
/// active-set polish step that sharpens the iterate to machine precision once
/// the active set has settled. Deterministic for identical inputs. A warm
/// start near the solution short-circuits through the polish, so resubmitting
/// a solved problem with its own solution costs zero iterations.
QpSolution solve_qp(const QpProblem& prob, const QpSettings& settings = {},
                    const VecX* warm_start = nullptr);

}  // namespace pushmpc
