#include "eei/errors.hpp"
#include "eei/qp_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace eei;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Exhaustive active-set enumeration: every row is inactive, at its lower or at
// its upper bound. Each candidate solves the equality-constrained KKT system;
// the best feasible one is the optimum for strictly convex P.
double brute_force_objective(const MatrixXd& P, const VectorXd& q, const MatrixXd& A, const VectorXd& l,
                             const VectorXd& u) {
  const int n = static_cast<int>(q.size()), m = static_cast<int>(l.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(m, 0);
  while (true) {
    std::vector<int> rows;
    std::vector<double> target;
    bool ok = true;
    for (int i = 0; i < m; ++i) {
      if (l[i] == u[i]) {
        if (state[i] != 0) ok = false;
        rows.push_back(i);
        target.push_back(l[i]);
      } else if (state[i] == 1) {
        if (!std::isfinite(l[i])) ok = false;
        rows.push_back(i);
        target.push_back(l[i]);
      } else if (state[i] == 2) {
        if (!std::isfinite(u[i])) ok = false;
        rows.push_back(i);
        target.push_back(u[i]);
      }
    }
    if (ok && static_cast<int>(rows.size()) <= n) {
      const int k = static_cast<int>(rows.size());
      MatrixXd K = MatrixXd::Zero(n + k, n + k);
      VectorXd rhs(n + k);
      K.topLeftCorner(n, n) = P;
      rhs.head(n) = -q;
      for (int a = 0; a < k; ++a) {
        K.block(n + a, 0, 1, n) = A.row(rows[a]);
        K.block(0, n + a, n, 1) = A.row(rows[a]).transpose();
        rhs[n + a] = target[a];
      }
      Eigen::FullPivLU<MatrixXd> lu(K);
      if (lu.isInvertible()) {
        const VectorXd x = lu.solve(rhs).head(n);
        const VectorXd Ax = A * x;
        bool feasible = true;
        for (int i = 0; i < m; ++i) {
          if (Ax[i] < l[i] - 1e-9 || Ax[i] > u[i] + 1e-9) feasible = false;
        }
        if (feasible) best = std::min(best, 0.5 * x.dot(P * x) + q.dot(x));
      }
    }
    int i = 0;
    while (i < m && state[i] == 2) state[i++] = 0;
    if (i == m) break;
    ++state[i];
  }
  return best;
}

QpProblem dense_problem(const MatrixXd& P, const VectorXd& q, const MatrixXd& A, const VectorXd& l,
                        const VectorXd& u) {
  QpProblem p;
  p.P = P.sparseView();
  p.q = q;
  p.A = A.sparseView();
  p.l = l;
  p.u = u;
  return p;
}

}  // namespace

TEST_CASE("unconstrained least squares returns the target") {
  const VectorXd u0 = (VectorXd(4) << 1.5, -2.0, 0.25, 7.0).finished();
  // minimize |x - u0|^2 = x'x - 2 u0'x + const
  QpProblem p = dense_problem(2.0 * MatrixXd::Identity(4, 4), -2.0 * u0, MatrixXd::Identity(4, 4),
                              VectorXd::Constant(4, -kInf), VectorXd::Constant(4, kInf));
  const auto sol = solve_qp(p);
  CHECK(sol.report.converged());
  CHECK((sol.x - u0).norm() < 1e-8);
  CHECK(sol.report.objective == doctest::Approx(-u0.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("one-dimensional bound is active") {
  // minimize (x - 3)^2 subject to x <= 1
  QpProblem p = dense_problem(MatrixXd::Constant(1, 1, 2.0), VectorXd::Constant(1, -6.0), MatrixXd::Identity(1, 1),
                              VectorXd::Constant(1, -kInf), VectorXd::Constant(1, 1.0));
  const auto sol = solve_qp(p);
  CHECK(sol.report.converged());
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  // multiplier of the upper bound: 2(x - 3) + y = 0
  CHECK(sol.y[0] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("equality and lower bound") {
  // minimize x0^2 + x1^2 subject to x0 + x1 = 2, x0 >= 1.5
  MatrixXd A(2, 2);
  A << 1, 1, 1, 0;
  QpProblem p = dense_problem(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2), A,
                              (VectorXd(2) << 2.0, 1.5).finished(), (VectorXd(2) << 2.0, kInf).finished());
  const auto sol = solve_qp(p);
  CHECK(sol.report.converged());
  CHECK(sol.x[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(sol.x[1] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("random convex problems match exhaustive active-set enumeration") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 19;
    const int m = 1 + (t * 7) % 8;
    MatrixXd M(n, n);
    for (int i = 0; i < n * n; ++i) M.data()[i] = N(rng);
    const MatrixXd P = M.transpose() * M + 0.1 * MatrixXd::Identity(n, n);
    VectorXd q(n);
    for (auto& v : q) v = 5.0 * N(rng);
    MatrixXd A(m, n);
    for (int i = 0; i < m * n; ++i) A.data()[i] = N(rng);
    // bounds built around a known feasible point
    VectorXd xf(n);
    for (auto& v : xf) v = N(rng);
    const VectorXd Ax = A * xf;
    VectorXd l(m), u(m);
    for (int i = 0; i < m; ++i) {
      const double c = U(rng);
      if (c < 0.15) {
        l[i] = u[i] = Ax[i];
      } else {
        l[i] = c < 0.5 ? -kInf : Ax[i] - U(rng);
        u[i] = c > 0.85 ? kInf : Ax[i] + U(rng);
      }
    }
    const auto sol = solve_qp(dense_problem(P, q, A, l, u));
    const double oracle = brute_force_objective(P, q, A, l, u);
    const double rel = std::abs(sol.report.objective - oracle) / std::max(1.0, std::abs(oracle));
    INFO("trial " << t << " n=" << n << " m=" << m);
    CHECK(sol.report.converged());
    CHECK(rel < 1e-6);
    worst = std::max(worst, rel);
  }
  MESSAGE("worst relative objective gap " << worst);
}

TEST_CASE("reported residuals agree with an independent KKT evaluation") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  const int n = 8, m = 5;
  MatrixXd M(n, n);
  for (int i = 0; i < n * n; ++i) M.data()[i] = N(rng);
  const MatrixXd P = M.transpose() * M + MatrixXd::Identity(n, n);
  VectorXd q(n);
  for (auto& v : q) v = 3.0 * N(rng);
  MatrixXd A(m, n);
  for (int i = 0; i < m * n; ++i) A.data()[i] = N(rng);
  const VectorXd l = VectorXd::Constant(m, -0.3), u = VectorXd::Constant(m, 0.3);
  const auto p = dense_problem(P, q, A, l, u);
  const auto sol = solve_qp(p);
  REQUIRE(sol.report.converged());

  const VectorXd Ax = A * sol.x;
  const VectorXd stat = P * sol.x + q + A.transpose() * sol.y;
  double prim = 0.0, comp = 0.0;
  for (int i = 0; i < m; ++i) {
    prim = std::max({prim, Ax[i] - u[i], l[i] - Ax[i]});
    // sign convention: y > 0 on the upper bound, y < 0 on the lower bound
    if (sol.y[i] > 1e-9) comp = std::max(comp, sol.y[i] * (u[i] - Ax[i]));
    if (sol.y[i] < -1e-9) comp = std::max(comp, -sol.y[i] * (Ax[i] - l[i]));
  }
  CHECK(stat.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(prim < 1e-6);
  CHECK(comp < 1e-6);

  const auto kkt = kkt_residuals(p, sol.x, sol.y);
  CHECK(kkt.dual_residual == doctest::Approx(stat.lpNorm<Eigen::Infinity>()).epsilon(1e-6).scale(1e-12));
  CHECK(kkt.primal_residual <= 1e-6);
  CHECK(kkt.complementarity <= 1e-6);
}

TEST_CASE("ball group projects onto the sphere") {
  // minimize |x - c|^2 subject to |x| <= r with c outside the ball
  const VectorXd c = (VectorXd(3) << 3.0, -4.0, 12.0).finished();  // |c| = 13
  const double r = 2.0;
  QpProblem p = dense_problem(2.0 * MatrixXd::Identity(3, 3), -2.0 * c, MatrixXd::Identity(3, 3),
                              VectorXd::Constant(3, -kInf), VectorXd::Constant(3, kInf));
  p.balls.push_back({{0, 1, 2}, r});
  const auto sol = solve_qp(p);
  CHECK(sol.report.converged());
  CHECK((sol.x - r * c / 13.0).norm() < 1e-6);
  CHECK(sol.x.norm() <= r + 1e-6);

  // an interior target is left alone
  p.q = -2.0 * c / 13.0;
  const auto in = solve_qp(p);
  CHECK((in.x - c / 13.0).norm() < 1e-7);
}

TEST_CASE("several ball groups with a shared linear constraint") {
  // two 2-vectors, each in a unit disk, summing to (1.5, 0); pull both toward (2, 2)
  const int n = 4;
  MatrixXd A = MatrixXd::Zero(6, n);
  A.topRows(4) = MatrixXd::Identity(4, 4);
  A(4, 0) = A(4, 2) = 1.0;
  A(5, 1) = A(5, 3) = 1.0;
  VectorXd l(6), u(6);
  l << -kInf, -kInf, -kInf, -kInf, 1.5, 0.0;
  u << kInf, kInf, kInf, kInf, 1.5, 0.0;
  QpProblem p = dense_problem(2.0 * MatrixXd::Identity(n, n), VectorXd::Constant(n, -4.0), A, l, u);
  p.balls.push_back({{0, 1}, 1.0});
  p.balls.push_back({{2, 3}, 1.0});
  const auto sol = solve_qp(p);
  CHECK(sol.report.converged());
  CHECK(sol.x[0] + sol.x[2] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(sol.x[1] + sol.x[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(sol.x.head(2).norm() <= 1.0 + 1e-6);
  CHECK(sol.x.tail(2).norm() <= 1.0 + 1e-6);
  // symmetric problem: both halves equal (0.75, 0)
  CHECK(sol.x[0] == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(std::abs(sol.x[1]) < 1e-6);
}

TEST_CASE("malformed problems are rejected") {
  QpProblem p = dense_problem(MatrixXd::Identity(2, 2), VectorXd::Zero(2), MatrixXd::Identity(2, 2),
                              VectorXd::Constant(2, 1.0), VectorXd::Constant(2, 0.0));
  CHECK_THROWS_AS(solve_qp(p), ConfigError);
  p.l = VectorXd::Constant(2, -kInf);
  p.u = VectorXd::Constant(2, kInf);
  p.balls.push_back({{0, 5}, 1.0});
  CHECK_THROWS_AS(solve_qp(p), ConfigError);
  p.balls = {{{0, 1}, -1.0}};
  CHECK_THROWS_AS(solve_qp(p), ConfigError);
  p.balls.clear();
  p.l = VectorXd::Constant(2, 0.0);
  p.balls.push_back({{0, 1}, 1.0});
  CHECK_THROWS_AS(solve_qp(p), ConfigError);
}
