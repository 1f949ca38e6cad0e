#include "wbf/hqp_cascade.hpp"

#include <algorithm>
#include <map>

namespace wbf {

Task Task::equality(matrix_t A, vector_t b, int priority, std::string label) {
  Task t;
  t.A = std::move(A);
  t.b = std::move(b);
  t.priority = priority;
  t.label = std::move(label);
  t.D.resize(0, t.A.cols());
  t.f.resize(0);
  return t;
}

Task Task::inequality(matrix_t D, vector_t f, int priority, std::string label) {
  Task t;
  t.D = std::move(D);
  t.f = std::move(f);
  t.priority = priority;
  t.label = std::move(label);
  t.A.resize(0, t.D.cols());
  t.b.resize(0);
  return t;
}

namespace {

struct Level {
  int priority;
  matrix_t A;
  vector_t b;
  matrix_t D;
  vector_t f;
};

std::vector<Level> stack_levels(const std::vector<Task>& tasks, int dim) {
  std::map<int, Level> by_priority;
  for (const Task& t : tasks) {
    if (t.A.rows() != t.b.size() || t.D.rows() != t.f.size()) {
      throw DimensionError("task '" + t.label + "': row counts disagree with rhs sizes");
    }
    if ((t.A.rows() > 0 && t.A.cols() != dim) || (t.D.rows() > 0 && t.D.cols() != dim)) {
      throw DimensionError("task '" + t.label + "': column count does not match decision dim");
    }
    auto [it, created] = by_priority.try_emplace(t.priority);
    Level& lv = it->second;
    if (created) {
      lv.priority = t.priority;
      lv.A.resize(0, dim);
      lv.b.resize(0);
      lv.D.resize(0, dim);
      lv.f.resize(0);
    }
    if (t.A.rows() > 0) {
      const Eigen::Index r = lv.A.rows();
      lv.A.conservativeResize(r + t.A.rows(), dim);
      lv.A.bottomRows(t.A.rows()) = t.A;
      lv.b.conservativeResize(r + t.b.size());
      lv.b.tail(t.b.size()) = t.b;
    }
    if (t.D.rows() > 0) {
      const Eigen::Index r = lv.D.rows();
      lv.D.conservativeResize(r + t.D.rows(), dim);
      lv.D.bottomRows(t.D.rows()) = t.D;
      lv.f.conservativeResize(r + t.f.size());
      lv.f.tail(t.f.size()) = t.f;
    }
  }
  std::vector<Level> levels;
  levels.reserve(by_priority.size());
  for (auto& [prio, lv] : by_priority) levels.push_back(std::move(lv));
  return levels;
}

}  // namespace

HqpSolution solve_hierarchy(const std::vector<Task>& tasks, int dim,
                            const HqpOptions& options) {
  HqpSolution out;
  out.x = vector_t::Zero(dim);
  if (tasks.empty()) {
    out.success = true;
    return out;
  }
  const std::vector<Level> levels = stack_levels(tasks, dim);

  // Constraints inherited from already-solved levels, all over x alone.
  matrix_t frozen_A(0, dim);
  vector_t frozen_b(0);
  matrix_t frozen_D(0, dim);
  vector_t frozen_f(0);

  vector_t x = vector_t::Zero(dim);
  bool all_ok = true;

  for (size_t li = 0; li < levels.size(); ++li) {
    const Level& lv = levels[li];
    const int r = static_cast<int>(lv.A.rows());
    const int s = static_cast<int>(lv.D.rows());
    const int nz = dim + s;  // decision variables: [x; v]

    QpProblem qp;
    qp.H = options.level_regularization * matrix_t::Identity(nz, nz);
    qp.g = vector_t::Zero(nz);
    if (r > 0) {
      qp.H.topLeftCorner(dim, dim) += lv.A.transpose() * lv.A;
      qp.g.head(dim) = -lv.A.transpose() * lv.b;
    }
    qp.H.bottomRightCorner(s, s) += matrix_t::Identity(s, s);

    const int n_frozen_eq = static_cast<int>(frozen_A.rows());
    qp.A_eq.setZero(n_frozen_eq, nz);
    qp.A_eq.leftCols(dim) = frozen_A;
    qp.b_eq = frozen_b;

    const int n_frozen_in = static_cast<int>(frozen_D.rows());
    qp.A_in.setZero(n_frozen_in + 2 * s, nz);
    qp.b_in.setZero(n_frozen_in + 2 * s);
    qp.A_in.topLeftCorner(n_frozen_in, dim) = frozen_D;
    qp.b_in.head(n_frozen_in) = frozen_f;
    if (s > 0) {
      qp.A_in.block(n_frozen_in, 0, s, dim) = lv.D;
      qp.A_in.block(n_frozen_in, dim, s, s) = -matrix_t::Identity(s, s);
      qp.b_in.segment(n_frozen_in, s) = lv.f;
      qp.A_in.block(n_frozen_in + s, dim, s, s) = -matrix_t::Identity(s, s);
    }

    QpOptions qp_opts = options.qp;
    if (li < options.warm_active.size()) {
      qp_opts.warm_hint = options.warm_active[li];
    }
    // A level whose constraints were inherited from solved levels is feasible
    // by construction, so a non-optimal status is a conditioning artifact of
    // the tiny tie-break weight; escalate it and retry before giving up.
    scalar_t level_reg = options.level_regularization;
    QpSolution qs = solve_qp(qp, qp_opts);
    for (int escalation = 0; qs.status != QpStatus::Optimal && escalation < 2; ++escalation) {
      const scalar_t bumped = level_reg * 1e3;
      qp.H.diagonal().array() += bumped - level_reg;
      level_reg = bumped;
      qs = solve_qp(qp, qp_opts);
    }

    LevelReport rep;
    rep.priority = lv.priority;
    rep.status = qs.status;
    rep.iterations = qs.iterations;
    rep.eq_rows = r;
    rep.ineq_rows = s;
    rep.regularization = level_reg;
    rep.active_set = qs.active_set;

    if (qs.status != QpStatus::Optimal) {
      // The previous levels' solution satisfies every frozen constraint, so
      // a failure here is a numerical stall, not true infeasibility. Keep
      // that solution, skip this level's objective (its tasks stay
      // unfrozen), and let the remaining levels optimize what they can.
      out.levels.push_back(std::move(rep));
      all_ok = false;
      continue;
    }

    x = qs.x.head(dim);
    const vector_t v = s > 0 ? vector_t(qs.x.tail(s).cwiseMax(0.0)) : vector_t();
    rep.slack_norm = s > 0 ? v.norm() : 0.0;
    out.levels.push_back(std::move(rep));

    // Lock this level in for the ones below: keep the achieved equality
    // values (not the targets) and relax the inequalities by the granted
    // slack. The frozen rows are re-orthonormalized so levels that pin
    // overlapping directions (e.g. joint tracking plus contact motion)
    // never hand a rank-deficient equality block to the QP.
    if (r > 0) {
      matrix_t stacked(frozen_A.rows() + r, dim);
      stacked.topRows(frozen_A.rows()) = frozen_A;
      stacked.bottomRows(r) = lv.A;
      Eigen::ColPivHouseholderQR<matrix_t> qr(stacked.transpose());
      qr.setThreshold(1e-10);
      const Eigen::Index rank = qr.rank();
      const matrix_t q_full =
          qr.householderQ() * matrix_t::Identity(dim, std::min<Eigen::Index>(dim, rank));
      frozen_A = q_full.transpose();
      frozen_b = frozen_A * x;
    }
    if (s > 0) {
      const Eigen::Index fr = frozen_D.rows();
      frozen_D.conservativeResize(fr + s, dim);
      frozen_D.bottomRows(s) = lv.D;
      frozen_f.conservativeResize(fr + s);
      frozen_f.tail(s) = lv.f + v;
    }
  }

  out.x = x;
  out.success = all_ok;
  for (size_t li = 0; li < levels.size(); ++li) {
    const Level& lv = levels[li];
    LevelReport& rep = out.levels[li];
    if (lv.A.rows() > 0) rep.eq_residual = (lv.A * x - lv.b).norm();
    if (lv.D.rows() > 0) {
      rep.ineq_violation = (lv.D * x - lv.f).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
    }
  }
  return out;
}

}  // namespace wbf
