// Operator-splitting (ADMM) solver for convex quadratic programs
//
//   minimize 1/2 x'Px + q'x  subject to  l <= Ax <= u,  |(Ax)_g| <= r_g
//
// where each g is a group of rows constrained to a Euclidean ball. The
// linear system of every iteration is the quasi-definite KKT matrix, factored
// once per penalty update with a sparse LDL'.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <vector>

namespace eei {

using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BallGroup {
  std::vector<int> rows;   // rows of A forming the vector
  double radius;
};

struct QpProblem {
  SparseMatrix P;          // n x n, symmetric PSD (full storage)
  Eigen::VectorXd q;
  SparseMatrix A;          // m x n
  Eigen::VectorXd l;       // -kInf allowed
  Eigen::VectorXd u;       // +kInf allowed
  std::vector<BallGroup> balls;  // ball rows must have l = -inf, u = +inf

  int n() const { return static_cast<int>(q.size()); }
  int m() const { return static_cast<int>(l.size()); }
  void validate() const;
  double objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(P * x) + q.dot(x); }
};

struct QpSettings {
  double rho{0.1};
  double sigma{1e-6};
  double alpha{1.6};
  double eps_abs{1e-8};
  double eps_rel{1e-8};
  int max_iter{20000};
  int check_every{10};
  bool adaptive_rho{true};
  int adaptive_rho_interval{50};
  int scaling_iters{10};
  bool polish{true};
};

enum class QpStatus { Solved, MaxIterations };

struct QpReport {
  QpStatus status{QpStatus::MaxIterations};
  int iterations{0};
  double objective{0.0};
  double primal_residual{0.0};     // |Ax - z|_inf
  double dual_residual{0.0};       // |Px + q + A'y|_inf
  double complementarity{0.0};     // max_i |y_i| * distance of (Ax)_i from its active bound
  bool polished{false};
  int factorizations{0};

  bool converged() const { return status == QpStatus::Solved; }
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;   // multipliers of the A rows
  Eigen::VectorXd z;   // projected Ax
  QpReport report;
};

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

/// Stationarity, primal feasibility and complementary slackness residuals of
/// (x, y) for the problem (ball groups included), as reported by the solver.
QpReport kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace eei
