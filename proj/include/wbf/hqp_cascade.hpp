#pragma once

#include <string>
#include <vector>

#include "wbf/qp_solver.hpp"

namespace wbf {

// One block of a lexicographic program over a shared decision vector x:
// equality rows A x = b are met in the least-squares sense at this block's
// priority, inequality rows D x <= f receive slack only if blocks of
// strictly higher priority (lower number) make them unsatisfiable.
struct Task {
  matrix_t A;  // r x d (may have zero rows)
  vector_t b;
  matrix_t D;  // s x d (may have zero rows)
  vector_t f;
  int priority = 0;
  std::string label;

  static Task equality(matrix_t A, vector_t b, int priority, std::string label);
  static Task inequality(matrix_t D, vector_t f, int priority, std::string label);
};

struct HqpOptions {
  // Diagonal shift added to every level's Hessian: keeps each QP strictly
  // convex and makes the minimum-norm solution the deterministic tie-break
  // among equally good x.
  scalar_t level_regularization = 1e-9;
  QpOptions qp;
  // Per-level warm hints: the inequality-row active sets returned in
  // LevelReport::active_set from a previous, similarly structured solve.
  std::vector<std::vector<int>> warm_active;
};

struct LevelReport {
  int priority = 0;
  QpStatus status = QpStatus::NumericalFailure;
  int iterations = 0;
  int eq_rows = 0;
  int ineq_rows = 0;
  scalar_t eq_residual = 0.0;      // ||A x - b|| at the returned solution
  scalar_t ineq_violation = 0.0;   // max(D x - f, 0) max-norm at the returned solution
  scalar_t slack_norm = 0.0;       // ||v*|| granted to this level's inequalities
  scalar_t regularization = 0.0;   // tie-break weight the level was solved with
  std::vector<int> active_set;     // QP inequality rows active at this level's optimum
};

struct HqpSolution {
  bool success = false;
  vector_t x;
  std::vector<LevelReport> levels;
};

// Solves the cascade level by level in ascending priority number. Each
// level's optimum is locked in for the ones below by freezing A_k x = A_k x*
// and D_k x <= f_k + v_k*. Tasks sharing a priority are stacked into one
// level. A level whose QP stalls is skipped — the previous levels' solution
// (feasible for everything frozen so far) is kept, the level's tasks are not
// frozen, the remaining levels still run — and success turns false with the
// stall visible in that level's report.
HqpSolution solve_hierarchy(const std::vector<Task>& tasks, int dim,
                            const HqpOptions& options = {});

}  // namespace wbf
