#pragma once

#include <vector>

#include "wbf/types.hpp"

namespace wbf {

// Strictly convex dense QP:
//   min  1/2 x' H x + g' x
//   s.t. A_eq x  = b_eq
//        A_in x <= b_in
// H must be symmetric; if it is only positive semidefinite a diagonal shift
// is applied (and reported) so the factorization exists.
struct QpProblem {
  matrix_t H;
  vector_t g;
  matrix_t A_eq;
  vector_t b_eq;
  matrix_t A_in;
  vector_t b_in;

  int dim() const { return static_cast<int>(g.size()); }
  int n_eq() const { return static_cast<int>(b_eq.size()); }
  int n_in() const { return static_cast<int>(b_in.size()); }
};

enum class QpStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(QpStatus s);

struct QpOptions {
  // 0 means the default budget of 10 * (dim + total constraint rows).
  int max_iterations = 0;
  scalar_t kkt_tol = 1e-8;
  // Initial diagonal shift tried when the Cholesky factorization of H fails;
  // escalated by x10 while it keeps failing.
  scalar_t regularization = 1e-9;
  // Inequality rows favoured when picking among near-equally violated
  // constraints; a cheap deterministic warm start (e.g. last tick's active
  // set). Unknown indices are ignored.
  std::vector<int> warm_hint;
};

struct QpSolution {
  QpStatus status = QpStatus::NumericalFailure;
  vector_t x;
  vector_t lambda_eq;           // equality multipliers (free sign)
  vector_t mu_in;               // inequality multipliers, >= 0, size n_in
  std::vector<int> active_set;  // inequality rows tight at the solution, ascending
  int iterations = 0;
  bool regularized = false;
  scalar_t regularization_used = 0.0;
  scalar_t kkt_residual = 0.0;
};

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

// Largest KKT violation (stationarity, primal feasibility, dual positivity,
// complementary slackness) of a candidate primal/dual point.
scalar_t kkt_residual(const QpProblem& p, const vector_t& x, const vector_t& lambda_eq,
                      const vector_t& mu_in);

}  // namespace wbf
