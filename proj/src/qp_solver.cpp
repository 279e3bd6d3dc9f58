#include "eei/qp_solver.hpp"

#include "eei/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace eei {

namespace {

using Vec = Eigen::VectorXd;

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vec col_inf_norms(const SparseMatrix& M) {
  Vec out = Vec::Zero(M.cols());
  for (int j = 0; j < M.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) out[j] = std::max(out[j], std::abs(it.value()));
  }
  return out;
}

Vec row_inf_norms(const SparseMatrix& M) {
  Vec out = Vec::Zero(M.rows());
  for (int j = 0; j < M.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
  }
  return out;
}

double scale_factor(double norm) {
  if (norm < 1e-4) return 1.0;
  return 1.0 / std::sqrt(std::min(norm, 1e4));
}

void project(Vec& z, const Vec& l, const Vec& u, const std::vector<BallGroup>& balls) {
  z = z.cwiseMax(l).cwiseMin(u);
  for (const auto& g : balls) {
    double n2 = 0.0;
    for (int r : g.rows) n2 += z[r] * z[r];
    const double n = std::sqrt(n2);
    if (n > g.radius) {
      const double s = g.radius / n;
      for (int r : g.rows) z[r] *= s;
    }
  }
}

SparseMatrix build_kkt(const SparseMatrix& P, const SparseMatrix& A, double sigma, const Vec& rho_inv) {
  const int n = static_cast<int>(P.rows());
  const int m = static_cast<int>(A.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(P.nonZeros() + 2 * A.nonZeros() + n + m);
  for (int j = 0; j < P.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(P, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, sigma);
  for (int j = 0; j < A.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  }
  for (int i = 0; i < m; ++i) t.emplace_back(n + i, n + i, -rho_inv[i]);
  SparseMatrix K(n + m, n + m);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

struct Factor {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  void compute(const SparseMatrix& K) {
    ldlt.compute(K);
    if (ldlt.info() != Eigen::Success) throw Singularity("KKT factorization failed");
  }
};

// Polishing: guess the active set from the ADMM iterate and solve the
// equality-constrained QP on it, with iterative refinement against a small
// regularization.
bool polish(const QpProblem& p, const Vec& z, const Vec& y, Vec& x_out, Vec& y_out) {
  const int n = p.n(), m = p.m();
  std::vector<char> in_ball(m, 0);
  for (const auto& g : p.balls) {
    double zn = 0.0, yn = 0.0;
    for (int r : g.rows) {
      in_ball[r] = 1;
      zn += z[r] * z[r];
      yn += y[r] * y[r];
    }
    if (std::sqrt(yn) > 0.0 && std::sqrt(zn) > g.radius * (1.0 - 1e-6)) return false;  // curved active set
  }
  std::vector<int> rows;
  std::vector<double> target;
  for (int i = 0; i < m; ++i) {
    if (in_ball[i]) continue;
    if (p.l[i] == p.u[i]) {
      rows.push_back(i);
      target.push_back(p.l[i]);
    } else if (std::isfinite(p.l[i]) && z[i] - p.l[i] < -y[i]) {
      rows.push_back(i);
      target.push_back(p.l[i]);
    } else if (std::isfinite(p.u[i]) && p.u[i] - z[i] < y[i]) {
      rows.push_back(i);
      target.push_back(p.u[i]);
    }
  }
  const int k = static_cast<int>(rows.size());
  std::vector<Eigen::Triplet<double>> t;
  SparseMatrix Aact(k, n);
  {
    std::vector<int> pos(m, -1);
    for (int i = 0; i < k; ++i) pos[rows[i]] = i;
    std::vector<Eigen::Triplet<double>> ta;
    for (int j = 0; j < p.A.outerSize(); ++j) {
      for (SparseMatrix::InnerIterator it(p.A, j); it; ++it) {
        if (pos[it.row()] >= 0) ta.emplace_back(pos[it.row()], it.col(), it.value());
      }
    }
    Aact.setFromTriplets(ta.begin(), ta.end());
  }
  const double delta = 1e-9;
  const SparseMatrix K0 = build_kkt(p.P, Aact, 0.0, Vec::Zero(k));
  const SparseMatrix Kd = build_kkt(p.P, Aact, delta, Vec::Constant(k, delta));
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kd);
  if (ldlt.info() != Eigen::Success) return false;
  Vec rhs(n + k);
  rhs.head(n) = -p.q;
  for (int i = 0; i < k; ++i) rhs[n + i] = target[i];
  Vec sol = ldlt.solve(rhs);
  for (int it = 0; it < 10; ++it) {
    const Vec r = rhs - K0 * sol;
    if (inf_norm(r) < 1e-14 * std::max(1.0, inf_norm(rhs))) break;
    sol += ldlt.solve(r);
  }
  if (!sol.allFinite()) return false;
  x_out = sol.head(n);
  y_out = Vec::Zero(m);
  for (int i = 0; i < k; ++i) y_out[rows[i]] = sol[n + i];
  return true;
}

}  // namespace

void QpProblem::validate() const {
  const int nn = n(), mm = m();
  if (P.rows() != nn || P.cols() != nn) throw ConfigError("QP: P must be n x n");
  if (A.rows() != mm || A.cols() != nn || u.size() != mm) throw ConfigError("QP: A, l, u sizes disagree");
  for (int i = 0; i < mm; ++i) {
    if (l[i] > u[i]) throw ConfigError("QP: l > u on row " + std::to_string(i));
  }
  for (const auto& g : balls) {
    if (!(g.radius >= 0.0)) throw ConfigError("QP: negative ball radius");
    for (int r : g.rows) {
      if (r < 0 || r >= mm) throw ConfigError("QP: ball row out of range");
      if (std::isfinite(l[r]) || std::isfinite(u[r])) throw ConfigError("QP: ball rows must be otherwise unbounded");
    }
  }
}

QpReport kkt_residuals(const QpProblem& p, const Vec& x, const Vec& y) {
  QpReport r;
  r.objective = p.objective(x);
  const Vec Ax = p.A * x;
  r.dual_residual = inf_norm(p.P * x + p.q + p.A.transpose() * y);
  double prim = 0.0, comp = 0.0;
  std::vector<char> in_ball(p.m(), 0);
  for (const auto& g : p.balls) {
    double n2 = 0.0, y2 = 0.0;
    for (int i : g.rows) {
      in_ball[i] = 1;
      n2 += Ax[i] * Ax[i];
      y2 += y[i] * y[i];
    }
    prim = std::max(prim, std::sqrt(n2) - g.radius);
    comp = std::max(comp, std::sqrt(y2) * std::abs(g.radius - std::sqrt(n2)));
  }
  for (int i = 0; i < p.m(); ++i) {
    if (in_ball[i]) continue;
    prim = std::max({prim, p.l[i] - Ax[i], Ax[i] - p.u[i]});
    // A multiplier pushing against a missing bound is dual infeasible.
    if (y[i] > 0.0 && !std::isfinite(p.u[i])) r.dual_residual = std::max(r.dual_residual, y[i]);
    if (y[i] < 0.0 && !std::isfinite(p.l[i])) r.dual_residual = std::max(r.dual_residual, -y[i]);
    if (y[i] > 0.0 && std::isfinite(p.u[i])) comp = std::max(comp, y[i] * std::abs(p.u[i] - Ax[i]));
    if (y[i] < 0.0 && std::isfinite(p.l[i])) comp = std::max(comp, -y[i] * std::abs(Ax[i] - p.l[i]));
  }
  r.primal_residual = std::max(prim, 0.0);
  r.complementarity = comp;
  return r;
}

QpSolution solve_qp(const QpProblem& prob, const QpSettings& s) {
  prob.validate();
  const int n = prob.n(), m = prob.m();

  // Modified Ruiz equilibration of the KKT matrix; rows of one ball group
  // share a factor so the ball stays a ball.
  Vec D = Vec::Ones(n), E = Vec::Ones(m);
  SparseMatrix P = prob.P, A = prob.A;
  for (int it = 0; it < s.scaling_iters; ++it) {
    const Vec pc = col_inf_norms(P), ac = col_inf_norms(A), ar = row_inf_norms(A);
    Vec dD(n), dE(m);
    for (int j = 0; j < n; ++j) dD[j] = scale_factor(std::max(pc[j], ac[j]));
    for (int i = 0; i < m; ++i) dE[i] = scale_factor(ar[i]);
    for (const auto& g : prob.balls) {
      double lg = 0.0;
      for (int r : g.rows) lg += std::log(dE[r]);
      const double common = std::exp(lg / static_cast<double>(g.rows.size()));
      for (int r : g.rows) dE[r] = common;
    }
    P = dD.asDiagonal() * P * dD.asDiagonal();
    A = dE.asDiagonal() * A * dD.asDiagonal();
    D = D.cwiseProduct(dD);
    E = E.cwiseProduct(dE);
  }
  double c = 1.0;
  {
    const Vec pc = col_inf_norms(P);
    const double mean_p = n ? pc.mean() : 0.0;
    const double qn = inf_norm(D.cwiseProduct(prob.q));
    const double ref = std::max(mean_p, qn);
    if (s.scaling_iters > 0 && ref > 1e-4) c = 1.0 / std::min(ref, 1e4);
  }
  P *= c;
  const Vec q = c * D.cwiseProduct(prob.q);
  Vec l = prob.l, u = prob.u;
  for (int i = 0; i < m; ++i) {
    if (std::isfinite(l[i])) l[i] *= E[i];
    if (std::isfinite(u[i])) u[i] *= E[i];
  }
  std::vector<BallGroup> balls = prob.balls;
  std::vector<char> in_ball(m, 0);
  for (auto& g : balls) {
    g.radius *= E[g.rows.front()];
    for (int r : g.rows) in_ball[r] = 1;
  }
  const SparseMatrix At = A.transpose();

  auto rho_vector = [&](double rho) {
    Vec r(m);
    for (int i = 0; i < m; ++i) {
      if (in_ball[i]) r[i] = rho;
      else if (l[i] == u[i]) r[i] = 1e3 * rho;
      else if (!std::isfinite(l[i]) && !std::isfinite(u[i])) r[i] = 1e-6;
      else r[i] = rho;
    }
    return r;
  };

  double rho = s.rho;
  Vec rho_v = rho_vector(rho);
  Factor f;
  f.compute(build_kkt(P, A, s.sigma, rho_v.cwiseInverse()));
  QpReport report;
  report.factorizations = 1;

  Vec x = Vec::Zero(n), z = Vec::Zero(m), y = Vec::Zero(m);
  project(z, l, u, balls);
  Vec rhs(n + m), xt(n), zt(m), z_prev(m);
  const Vec Dinv = D.cwiseInverse(), Einv = E.cwiseInverse();

  double prim = kInf, dual = kInf;
  int iter = 0;
  for (iter = 1; iter <= s.max_iter; ++iter) {
    rhs.head(n) = s.sigma * x - q;
    rhs.tail(m) = z - y.cwiseQuotient(rho_v);
    const Vec sol = f.ldlt.solve(rhs);
    xt = sol.head(n);
    zt = z + (sol.tail(m) - y).cwiseQuotient(rho_v);
    x = s.alpha * xt + (1.0 - s.alpha) * x;
    z_prev = z;
    const Vec z_relax = s.alpha * zt + (1.0 - s.alpha) * z_prev;
    z = z_relax + y.cwiseQuotient(rho_v);
    project(z, l, u, balls);
    y += rho_v.cwiseProduct(z_relax - z);

    const bool check = (iter % s.check_every == 0) || iter == s.max_iter;
    const bool adapt = s.adaptive_rho && (iter % s.adaptive_rho_interval == 0);
    if (!check && !adapt) continue;

    const Vec Ax = A * x;
    const Vec Px = P * x;
    const Vec Aty = At * y;
    prim = inf_norm(Einv.cwiseProduct(Ax - z));
    dual = inf_norm(Dinv.cwiseProduct(Px + q + Aty)) / c;
    const double prim_scale = std::max(inf_norm(Einv.cwiseProduct(Ax)), inf_norm(Einv.cwiseProduct(z)));
    const double dual_scale =
        std::max({inf_norm(Dinv.cwiseProduct(Px)), inf_norm(Dinv.cwiseProduct(Aty)), inf_norm(Dinv.cwiseProduct(q))}) / c;
    if (prim <= s.eps_abs + s.eps_rel * prim_scale && dual <= s.eps_abs + s.eps_rel * dual_scale) {
      report.status = QpStatus::Solved;
      break;
    }
    if (adapt) {
      const double ps = inf_norm(Ax - z) / std::max(1e-30, std::max(inf_norm(Ax), inf_norm(z)));
      const double ds = inf_norm(Px + q + Aty) / std::max(1e-30, std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q)}));
      double rho_new = rho * std::sqrt(ps / std::max(ds, 1e-30));
      rho_new = std::clamp(rho_new, 1e-6, 1e6);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        rho_v = rho_vector(rho);
        f.compute(build_kkt(P, A, s.sigma, rho_v.cwiseInverse()));
        ++report.factorizations;
      }
    }
  }
  report.iterations = std::min(iter, s.max_iter);

  QpSolution out;
  out.x = D.cwiseProduct(x);
  out.y = E.cwiseProduct(y) / c;
  out.z = Einv.cwiseProduct(z);
  QpReport kkt = kkt_residuals(prob, out.x, out.y);

  if (s.polish && m > 0) {
    Vec xp, yp;
    if (polish(prob, out.z, out.y, xp, yp)) {
      const QpReport kp = kkt_residuals(prob, xp, yp);
      const double tol = s.eps_abs;
      if (kp.primal_residual <= std::max(kkt.primal_residual, tol) && kp.dual_residual <= std::max(kkt.dual_residual, tol) &&
          kp.complementarity <= std::max(kkt.complementarity, tol)) {
        out.x = xp;
        out.y = yp;
        out.z = prob.A * xp;
        kkt = kp;
        report.polished = true;
        const double prim_scale = std::max(inf_norm(prob.A * xp), inf_norm(out.z));
        const double dual_scale =
            std::max({inf_norm(prob.P * xp), inf_norm(prob.A.transpose() * yp), inf_norm(prob.q)});
        if (kp.primal_residual <= s.eps_abs + s.eps_rel * prim_scale &&
            kp.dual_residual <= s.eps_abs + s.eps_rel * dual_scale) {
          report.status = QpStatus::Solved;
        }
      }
    }
  }
  report.objective = kkt.objective;
  report.primal_residual = kkt.primal_residual;
  report.dual_residual = kkt.dual_residual;
  report.complementarity = kkt.complementarity;
  out.report = report;
  return out;
}

}  // namespace eei
