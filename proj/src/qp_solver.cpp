#include "pushmpc/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace pushmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigma = 1e-6;      // x-regularization of the splitting
constexpr double kAlpha = 1.6;       // over-relaxation
constexpr double kRhoInit = 0.1;
constexpr int kCheckEvery = 25;
constexpr double kEpsInfeas = 1e-5;
constexpr double kPolishReg = 1e-9;

double clamp_scale(double v) { return std::clamp(v, 1e-4, 1e4); }

// Problem data stacked as  l <= [G; I] x <= u  with diagonal Ruiz
// equilibration. Scaled variables relate to the originals through
// x = d .* x_s,  y = (e .* y_s) / c.
struct Stacked {
  MatX a;        // original stacked constraint matrix
  VecX l, u;     // original stacked bounds
  MatX ps, as;   // scaled cost and constraints
  VecX qs, ls, us;
  VecX d, e;
  double c = 1.0;
};

Stacked build_stacked(const QpProblem& prob, const MatX& p_sym) {
  const int n = prob.num_vars();
  const int m = prob.num_ineq();
  Stacked s;
  s.a.resize(m + n, n);
  if (m > 0) s.a.topRows(m) = prob.g;
  s.a.bottomRows(n) = MatX::Identity(n, n);
  s.l.resize(m + n);
  s.l.head(m).setConstant(-kInf);
  s.l.tail(n) = prob.lo;
  s.u.resize(m + n);
  if (m > 0) s.u.head(m) = prob.h;
  s.u.tail(n) = prob.hi;

  // Ruiz equilibration on the KKT block structure.
  s.d = VecX::Ones(n);
  s.e = VecX::Ones(m + n);
  MatX pw = p_sym;
  MatX aw = s.a;
  for (int pass = 0; pass < 10; ++pass) {
    for (int j = 0; j < n; ++j) {
      const double norm = std::max(pw.col(j).cwiseAbs().maxCoeff(),
                                   aw.col(j).cwiseAbs().maxCoeff());
      const double delta = norm > 0.0 ? 1.0 / std::sqrt(clamp_scale(norm)) : 1.0;
      pw.col(j) *= delta;
      pw.row(j) *= delta;
      aw.col(j) *= delta;
      s.d[j] *= delta;
    }
    for (int i = 0; i < m + n; ++i) {
      const double norm = aw.row(i).cwiseAbs().maxCoeff();
      const double eps = norm > 0.0 ? 1.0 / std::sqrt(clamp_scale(norm)) : 1.0;
      aw.row(i) *= eps;
      s.e[i] *= eps;
    }
  }
  const VecX qw = s.d.cwiseProduct(prob.q);
  double col_mean = 0.0;
  for (int j = 0; j < n; ++j) col_mean += pw.col(j).cwiseAbs().maxCoeff();
  col_mean /= n;
  const double denom = std::max(col_mean, qw.cwiseAbs().maxCoeff());
  s.c = denom > 1e-12 ? 1.0 / clamp_scale(denom) : 1.0;

  s.ps = s.c * pw;
  s.qs = s.c * qw;
  s.as = aw;
  s.ls = s.e.cwiseProduct(s.l);
  s.us = s.e.cwiseProduct(s.u);
  // 0 * inf from a zero row scaling cannot occur: e entries are positive.
  return s;
}

VecX clamp_to(const VecX& v, const VecX& lo, const VecX& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

// Splits a stacked signed dual vector into the public layout
// [lambda_g; lambda_lo; lambda_hi], all nonnegative.
VecX split_duals(const VecX& y, int m, int n) {
  VecX duals = VecX::Zero(m + 2 * n);
  for (int i = 0; i < m; ++i) duals[i] = std::max(y[i], 0.0);
  for (int i = 0; i < n; ++i) {
    duals[m + i] = std::max(-y[m + i], 0.0);
    duals[m + n + i] = std::max(y[m + i], 0.0);
  }
  return duals;
}

struct Candidate {
  VecX z, y;  // unscaled primal and stacked signed duals
};

// Equality-constrained polish on the scaled problem for a guessed active set.
// Returns false if the guess is empty-handed (singular or no rows and no
// meaningful solve). The result stays in scaled coordinates.
bool polish_active_set(const Stacked& s, const std::vector<int>& lo_rows,
                       const std::vector<int>& up_rows, VecX* xs, VecX* ys) {
  const int n = static_cast<int>(s.ps.rows());
  const int total = static_cast<int>(s.as.rows());
  const int k = static_cast<int>(lo_rows.size() + up_rows.size());
  MatX a_act(k, n);
  VecX b_act(k);
  int r = 0;
  for (int i : lo_rows) { a_act.row(r) = s.as.row(i); b_act[r++] = s.ls[i]; }
  for (int i : up_rows) { a_act.row(r) = s.as.row(i); b_act[r++] = s.us[i]; }

  const MatX preg = s.ps + kPolishReg * MatX::Identity(n, n);
  Eigen::LLT<MatX> pllt(preg);
  if (pllt.info() != Eigen::Success) return false;

  VecX x, nu;
  if (k == 0) {
    x = pllt.solve(-s.qs);
    nu.resize(0);
  } else {
    const MatX pinv_at = pllt.solve(a_act.transpose());
    const MatX schur =
        a_act * pinv_at + kPolishReg * MatX::Identity(k, k);
    Eigen::LDLT<MatX> sldlt(schur);
    if (sldlt.info() != Eigen::Success) return false;
    auto solve_kkt = [&](const VecX& r1, const VecX& r2, VecX* dx, VecX* dnu) {
      // [P+dI, A'; A, -dI] [dx; dnu] = [r1; r2]
      const VecX w = pllt.solve(r1);
      *dnu = sldlt.solve(a_act * w - r2);
      *dx = w - pinv_at * (*dnu);
    };
    solve_kkt(-s.qs, b_act, &x, &nu);
    for (int refine = 0; refine < 2; ++refine) {
      const VecX r1 = -(s.ps * x + s.qs + a_act.transpose() * nu);
      const VecX r2 = b_act - a_act * x;
      VecX dx, dnu;
      solve_kkt(r1, r2, &dx, &dnu);
      x += dx;
      nu += dnu;
    }
  }
  *xs = x;
  *ys = VecX::Zero(total);
  r = 0;
  for (int i : lo_rows) (*ys)[i] = nu[r++];
  for (int i : up_rows) (*ys)[i] = nu[r++];
  return true;
}

Candidate unscale(const Stacked& s, const VecX& xs, const VecX& ys) {
  Candidate c;
  c.z = s.d.cwiseProduct(xs);
  c.y = s.e.cwiseProduct(ys) / s.c;
  return c;
}

}  // namespace

double KktResiduals::max() const {
  return std::max({stationarity, primal, complementarity});
}

KktResiduals kkt_residuals(const QpProblem& prob, const VecX& z,
                           const VecX& duals) {
  const int n = prob.num_vars();
  const int m = prob.num_ineq();
  assert(z.size() == n);
  assert(duals.size() == m + 2 * n);
  const MatX p_sym = 0.5 * (prob.p + prob.p.transpose());
  const VecX lam_g = duals.head(m);
  const VecX lam_lo = duals.segment(m, n);
  const VecX lam_hi = duals.tail(n);

  KktResiduals r;
  VecX stat = p_sym * z + prob.q - lam_lo + lam_hi;
  if (m > 0) stat += prob.g.transpose() * lam_g;
  r.stationarity = stat.cwiseAbs().maxCoeff();

  double primal = 0.0, compl_res = 0.0;
  for (int i = 0; i < m; ++i) {
    const double slack = prob.g.row(i).dot(z) - prob.h[i];
    primal = std::max(primal, slack);
    compl_res = std::max(compl_res, std::abs(lam_g[i] * slack));
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(prob.lo[i])) {
      const double slack = prob.lo[i] - z[i];
      primal = std::max(primal, slack);
      compl_res = std::max(compl_res, std::abs(lam_lo[i] * slack));
    } else {
      compl_res = std::max(compl_res, lam_lo[i]);
    }
    if (std::isfinite(prob.hi[i])) {
      const double slack = z[i] - prob.hi[i];
      primal = std::max(primal, slack);
      compl_res = std::max(compl_res, std::abs(lam_hi[i] * slack));
    } else {
      compl_res = std::max(compl_res, lam_hi[i]);
    }
  }
  r.primal = primal;
  r.complementarity = compl_res;
  return r;
}

QpSolution solve_qp(const QpProblem& prob, const QpSettings& settings,
                    const VecX* warm_start) {
  const int n = prob.num_vars();
  const int m = prob.num_ineq();
  assert(n > 0);
  assert(prob.p.rows() == n && prob.p.cols() == n);
  assert(prob.lo.size() == n && prob.hi.size() == n);
  assert(prob.g.rows() == prob.h.size());
  assert(m == 0 || prob.g.cols() == n);

  const MatX p_sym = 0.5 * (prob.p + prob.p.transpose());
  const Stacked s = build_stacked(prob, p_sym);
  const int rows = m + n;

  QpSolution sol;
  sol.status = QpStatus::max_iters;

  auto finish = [&](const Candidate& c, QpStatus status, int iters) {
    sol.z = c.z;
    sol.duals = split_duals(c.y, m, n);
    sol.status = status;
    sol.iterations = iters;
    sol.objective = 0.5 * c.z.dot(p_sym * c.z) + prob.q.dot(c.z);
    return sol;
  };

  auto verified_optimal = [&](const Candidate& c) {
    return kkt_residuals(prob, c.z, split_duals(c.y, m, n)).max() <=
           settings.tol;
  };

  // A warm start close to the optimum resolves through the polish alone.
  if (warm_start != nullptr && warm_start->size() == n &&
      warm_start->allFinite()) {
    const VecX xs0 = (*warm_start).cwiseQuotient(s.d);
    const VecX row_vals = s.as * xs0;
    std::vector<int> lo_rows, up_rows;
    for (int i = 0; i < rows; ++i) {
      if (std::isfinite(s.ls[i]) &&
          row_vals[i] - s.ls[i] <= 1e-7 * (1.0 + std::abs(s.ls[i])))
        lo_rows.push_back(i);
      else if (std::isfinite(s.us[i]) &&
               s.us[i] - row_vals[i] <= 1e-7 * (1.0 + std::abs(s.us[i])))
        up_rows.push_back(i);
    }
    VecX xs, ys;
    if (polish_active_set(s, lo_rows, up_rows, &xs, &ys)) {
      const Candidate c = unscale(s, xs, ys);
      if (verified_optimal(c)) return finish(c, QpStatus::optimal, 0);
    }
  }

  // Scaled ADMM iteration.
  double rho = kRhoInit;
  MatX kkt = s.ps + kSigma * MatX::Identity(n, n) +
             rho * s.as.transpose() * s.as;
  Eigen::LLT<MatX> llt(kkt);
  VecX x = VecX::Zero(n);
  if (warm_start != nullptr && warm_start->size() == n &&
      warm_start->allFinite())
    x = warm_start->cwiseQuotient(s.d);
  VecX zv = clamp_to(s.as * x, s.ls, s.us);
  VecX y = VecX::Zero(rows);
  VecX x_prev = x, y_prev = y;

  Candidate best;
  best.z = s.d.cwiseProduct(x);
  best.y = VecX::Zero(rows);
  double best_kkt = kInf;

  for (int t = 1; t <= settings.max_iters; ++t) {
    x_prev = x;
    y_prev = y;
    const VecX rhs = kSigma * x - s.qs + s.as.transpose() * (rho * zv - y);
    const VecX xt = llt.solve(rhs);
    const VecX zt = s.as * xt;
    x = kAlpha * xt + (1.0 - kAlpha) * x;
    const VecX zr = kAlpha * zt + (1.0 - kAlpha) * zv;
    zv = clamp_to(zr + y / rho, s.ls, s.us);
    y += rho * (zr - zv);

    if (t % kCheckEvery != 0 && t != settings.max_iters) continue;

    const Candidate cand = unscale(s, x, y);
    const KktResiduals res =
        kkt_residuals(prob, cand.z, split_duals(cand.y, m, n));
    if (res.max() < best_kkt) {
      best_kkt = res.max();
      best = cand;
    }
    if (res.max() <= settings.tol) return finish(cand, QpStatus::optimal, t);

    // Once residuals are moderate the active set is usually right; try to
    // finish exactly through the polish.
    if (res.max() <= 1e-3) {
      std::vector<int> lo_rows, up_rows;
      for (int i = 0; i < rows; ++i) {
        if (y[i] < -1e-10)
          lo_rows.push_back(i);
        else if (y[i] > 1e-10)
          up_rows.push_back(i);
        else if (std::isfinite(s.ls[i]) && zv[i] - s.ls[i] <= 1e-9)
          lo_rows.push_back(i);
        else if (std::isfinite(s.us[i]) && s.us[i] - zv[i] <= 1e-9)
          up_rows.push_back(i);
      }
      VecX xs, ys;
      if (polish_active_set(s, lo_rows, up_rows, &xs, &ys)) {
        const Candidate c = unscale(s, xs, ys);
        if (verified_optimal(c)) return finish(c, QpStatus::optimal, t);
      }
    }

    // Infeasibility certificates from the one-iteration increments.
    const VecX dy = y - y_prev;
    const double dy_norm = dy.cwiseAbs().maxCoeff();
    if (dy_norm > 1e-14) {
      bool cert = (s.as.transpose() * dy).cwiseAbs().maxCoeff() <=
                  kEpsInfeas * dy_norm;
      double support = 0.0;
      for (int i = 0; i < rows && cert; ++i) {
        if (dy[i] > 0.0) {
          if (std::isfinite(s.us[i])) support += s.us[i] * dy[i];
          else if (dy[i] > kEpsInfeas * dy_norm) cert = false;
        } else if (dy[i] < 0.0) {
          if (std::isfinite(s.ls[i])) support += s.ls[i] * dy[i];
          else if (-dy[i] > kEpsInfeas * dy_norm) cert = false;
        }
      }
      if (cert && support <= -kEpsInfeas * dy_norm)
        return finish(best, QpStatus::infeasible, t);
    }
    const VecX dx = x - x_prev;
    const double dx_norm = dx.cwiseAbs().maxCoeff();
    if (dx_norm > 1e-14) {
      bool cert = (s.ps * dx).cwiseAbs().maxCoeff() <= kEpsInfeas * dx_norm &&
                  s.qs.dot(dx) <= -kEpsInfeas * dx_norm;
      const VecX adx = s.as * dx;
      for (int i = 0; i < rows && cert; ++i) {
        if (std::isfinite(s.us[i]) && adx[i] > kEpsInfeas * dx_norm) cert = false;
        if (std::isfinite(s.ls[i]) && adx[i] < -kEpsInfeas * dx_norm) cert = false;
      }
      if (cert) return finish(best, QpStatus::infeasible, t);
    }

    // Residual balancing.
    if (t != settings.max_iters) {
      const VecX ax = s.as * x;
      const double pr_scale =
          std::max({ax.cwiseAbs().maxCoeff(), zv.cwiseAbs().maxCoeff(), 1e-10});
      const double du_scale = std::max(
          {(s.ps * x).cwiseAbs().maxCoeff(), s.qs.cwiseAbs().maxCoeff(),
           (s.as.transpose() * y).cwiseAbs().maxCoeff(), 1e-10});
      const double rp = (ax - zv).cwiseAbs().maxCoeff() / pr_scale;
      const double rd = (s.ps * x + s.qs + s.as.transpose() * y)
                            .cwiseAbs()
                            .maxCoeff() /
                        du_scale;
      const double target = rho * std::sqrt(std::max(rp, 1e-14) /
                                            std::max(rd, 1e-14));
      const double rho_new = std::clamp(target, 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
        rho = rho_new;
        kkt = s.ps + kSigma * MatX::Identity(n, n) +
              rho * s.as.transpose() * s.as;
        llt.compute(kkt);
      }
    }
  }

  return finish(best, QpStatus::max_iters, settings.max_iters);
}

}  // namespace pushmpc
