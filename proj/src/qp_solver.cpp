#include "wbf/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace wbf {

namespace {

constexpr scalar_t kInf = std::numeric_limits<scalar_t>::infinity();

void givens(scalar_t& a, scalar_t& b, scalar_t& c, scalar_t& s) {
  // Rotation zeroing b into a; leaves the new diagonal entry non-negative.
  const scalar_t r = std::hypot(a, b);
  if (r < std::numeric_limits<scalar_t>::min()) {
    c = 1.0;
    s = 0.0;
    return;
  }
  c = a / r;
  s = b / r;
  a = r;
  b = 0.0;
}

// Dual active-set method after Goldfarb & Idnani. Constraints are handled in
// the >= form  n_i' x >= b_i  (equalities =), so inequality rows of the
// problem enter with flipped sign. The working-set factorization
//   L^-1 N = Q [R; 0],   J = L^-T Q
// is maintained incrementally with Givens rotations: the trailing columns of
// J span the H-conjugate complement of the working set, giving the primal
// step z = J2 J2' n+ and dual step r = R^-1 J1' n+ in O(d^2) per iteration.
struct GiWorkspace {
  int d = 0;
  matrix_t J;
  matrix_t R;                // q x q upper triangular with positive diagonal
  std::vector<int> active;   // unified constraint indices in working-set order
  vector_t u;                // multipliers of active constraints (>= form)
  int q = 0;

  // Rotates the tail of dv = J' n into dv[q]; J follows the same rotations.
  // Afterwards dv.head(q + 1) is the new column of R.
  void add_constraint(int idx, vector_t& dv) {
    for (int k = d - 1; k > q; --k) {
      scalar_t c, s;
      givens(dv[k - 1], dv[k], c, s);
      const vector_t jl = J.col(k - 1) * c + J.col(k) * s;
      J.col(k) = -J.col(k - 1) * s + J.col(k) * c;
      J.col(k - 1) = jl;
    }
    R.conservativeResize(q + 1, q + 1);
    if (q > 0) {
      R.topRightCorner(q, 1) = dv.head(q);
      R.bottomLeftCorner(1, q).setZero();
    }
    R(q, q) = dv[q];
    active.push_back(idx);
    ++q;
  }

  // Removes working-set position l. Dropping a column leaves the factor
  // Hessenberg; chasing the subdiagonal with rotations (mirrored on J)
  // restores the triangular form.
  void drop_constraint(int l) {
    for (int i = l; i + 1 < q; ++i) {
      active[static_cast<size_t>(i)] = active[static_cast<size_t>(i) + 1];
      u[i] = u[i + 1];
    }
    active.pop_back();
    matrix_t hess = R.rightCols(q - 1 - l);  // columns l+1..q-1, all q rows
    for (int k = l; k + 1 < q; ++k) {
      scalar_t c, s;
      givens(hess(k, k - l), hess(k + 1, k - l), c, s);
      for (int col = k - l + 1; col < hess.cols(); ++col) {
        const scalar_t a = hess(k, col);
        const scalar_t b = hess(k + 1, col);
        hess(k, col) = c * a + s * b;
        hess(k + 1, col) = -s * a + c * b;
      }
      const vector_t jk = J.col(k) * c + J.col(k + 1) * s;
      J.col(k + 1) = -J.col(k) * s + J.col(k + 1) * c;
      J.col(k) = jk;
    }
    matrix_t rnew(q - 1, q - 1);
    rnew.setZero();
    if (l > 0) rnew.topLeftCorner(l, l) = R.topLeftCorner(l, l);
    for (int col = l; col + 1 < q; ++col) {
      rnew.block(0, col, col + 1, 1) = hess.block(0, col - l, col + 1, 1);
    }
    R = rnew;
    --q;
    u.conservativeResize(q);
  }
};

}  // namespace

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

scalar_t kkt_residual(const QpProblem& p, const vector_t& x, const vector_t& lambda_eq,
                      const vector_t& mu_in) {
  vector_t grad = p.H * x + p.g;
  if (p.n_eq() > 0) grad.noalias() += p.A_eq.transpose() * lambda_eq;
  if (p.n_in() > 0) grad.noalias() += p.A_in.transpose() * mu_in;
  scalar_t res = grad.lpNorm<Eigen::Infinity>();
  if (p.n_eq() > 0) {
    res = std::max(res, (p.A_eq * x - p.b_eq).lpNorm<Eigen::Infinity>());
  }
  if (p.n_in() > 0) {
    const vector_t slack = p.A_in * x - p.b_in;
    res = std::max(res, slack.maxCoeff());   // primal feasibility
    res = std::max(res, -mu_in.minCoeff());  // dual feasibility
    for (int i = 0; i < p.n_in(); ++i) {
      res = std::max(res, std::abs(mu_in[i] * slack[i]));  // slackness
    }
  }
  return res;
}

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  const int d = problem.dim();
  const int p = problem.n_eq();
  const int m = problem.n_in();
  QpSolution sol;
  sol.mu_in = vector_t::Zero(m);
  sol.lambda_eq = vector_t::Zero(p);

  if (problem.H.rows() != d || problem.H.cols() != d ||
      (p > 0 && (problem.A_eq.cols() != d || problem.A_eq.rows() != p)) ||
      (m > 0 && (problem.A_in.cols() != d || problem.A_in.rows() != m))) {
    throw DimensionError("qp problem dimensions are inconsistent");
  }

  // Factor H, shifting the diagonal if it is not numerically PD.
  matrix_t Hreg = problem.H;
  Eigen::LLT<matrix_t> llt(Hreg);
  scalar_t shift = 0.0;
  if (llt.info() != Eigen::Success) {
    shift = options.regularization;
    while (shift <= 1e-3) {
      Hreg = problem.H + shift * matrix_t::Identity(d, d);
      llt.compute(Hreg);
      if (llt.info() == Eigen::Success) break;
      shift *= 10.0;
    }
    if (llt.info() != Eigen::Success) {
      sol.status = QpStatus::NumericalFailure;
      return sol;
    }
    sol.regularized = true;
    sol.regularization_used = shift;
  }

  GiWorkspace ws;
  ws.d = d;
  ws.J = llt.matrixU().solve(matrix_t::Identity(d, d));  // L^-T

  vector_t x = -llt.solve(problem.g);

  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 10 * (d + p + m);
  int iter = 0;

  // Unified >=-form constraint access: indices 0..p-1 are the equalities
  // (n = A_eq row), p..p+m-1 the inequalities with n = -A_in row.
  auto normal_of = [&](int idx) -> vector_t {
    if (idx < p) return problem.A_eq.row(idx).transpose();
    return -problem.A_in.row(idx - p).transpose();
  };
  auto rhs_of = [&](int idx) -> scalar_t {
    return idx < p ? problem.b_eq[idx] : -problem.b_in[idx - p];
  };

  std::vector<char> hinted(static_cast<size_t>(m), 0);
  for (int hi : options.warm_hint) {
    if (hi >= 0 && hi < m) hinted[static_cast<size_t>(hi)] = 1;
  }
  std::vector<char> in_active(static_cast<size_t>(p + m), 0);

  const scalar_t tol = options.kkt_tol;

  auto finish_optimal = [&]() {
    sol.x = x;
    for (int k = 0; k < ws.q; ++k) {
      const int idx = ws.active[static_cast<size_t>(k)];
      if (idx < p) {
        sol.lambda_eq[idx] = -ws.u[k];
      } else {
        sol.mu_in[idx - p] = ws.u[k];
        sol.active_set.push_back(idx - p);
      }
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.iterations = iter;
    QpProblem solved = problem;
    solved.H = Hreg;
    sol.kkt_residual = kkt_residual(solved, sol.x, sol.lambda_eq, sol.mu_in);
    sol.status = QpStatus::Optimal;
  };

  // Phase 1: install the equalities. Nothing can block them (the working set
  // holds only equalities), so each one either steps fully, is redundant, or
  // proves the problem infeasible.
  for (int idx = 0; idx < p; ++idx) {
    ++iter;
    const vector_t n = normal_of(idx);
    vector_t dv = ws.J.transpose() * n;
    const scalar_t tail_norm = dv.tail(d - ws.q).norm();
    const scalar_t resid = n.dot(x) - rhs_of(idx);
    if (tail_norm <= 1e-12 * std::max(1.0, dv.norm())) {
      if (std::abs(resid) > tol) {
        sol.x = x;
        sol.iterations = iter;
        sol.status = QpStatus::Infeasible;
        return sol;
      }
      continue;  // linearly dependent but consistent: redundant row
    }
    const vector_t z = ws.J.rightCols(d - ws.q) * dv.tail(d - ws.q);
    const scalar_t t2 = -resid / (tail_norm * tail_norm);
    x += t2 * z;
    if (ws.q > 0) {
      const vector_t r = ws.R.triangularView<Eigen::Upper>().solve(dv.head(ws.q));
      ws.u.head(ws.q) -= t2 * r;
    }
    ws.u.conservativeResize(ws.q + 1);
    ws.u[ws.q] = t2;
    in_active[static_cast<size_t>(idx)] = 1;
    ws.add_constraint(idx, dv);
  }

  // Phase 2: dual iterations over the inequalities.
  while (true) {
    if (iter > max_iter) {
      sol.x = x;
      sol.iterations = iter;
      sol.status = QpStatus::MaxIterations;
      return sol;
    }

    // Most violated inequality; warm-hinted rows win near-ties.
    int chosen = -1;
    scalar_t worst = -tol;
    bool chosen_hinted = false;
    for (int i = 0; i < m; ++i) {
      const int idx = p + i;
      if (in_active[static_cast<size_t>(idx)]) continue;
      const scalar_t s = normal_of(idx).dot(x) - rhs_of(idx);
      if (s >= -tol) continue;
      const bool hint = hinted[static_cast<size_t>(i)] != 0;
      const bool better = chosen < 0 || s < worst - 1e-14 ||
                          (s < worst + 1e-14 && hint && !chosen_hinted);
      if (better) {
        worst = s;
        chosen = idx;
        chosen_hinted = hint;
      }
    }
    if (chosen < 0) {
      finish_optimal();
      return sol;
    }

    const vector_t n = normal_of(chosen);
    scalar_t s_viol = n.dot(x) - rhs_of(chosen);
    scalar_t u_plus = 0.0;

    while (true) {
      ++iter;
      if (iter > max_iter) {
        sol.x = x;
        sol.iterations = iter;
        sol.status = QpStatus::MaxIterations;
        return sol;
      }
      const vector_t dv = ws.J.transpose() * n;
      const scalar_t tail_sq = dv.tail(d - ws.q).squaredNorm();
      const bool have_z = std::sqrt(tail_sq) > 1e-12 * std::max(1.0, dv.norm());
      vector_t r;
      if (ws.q > 0) {
        r = ws.R.triangularView<Eigen::Upper>().solve(dv.head(ws.q));
      }

      // Longest dual step before an active inequality multiplier vanishes
      // (equalities are immune).
      scalar_t t1 = kInf;
      int drop = -1;
      for (int k = 0; k < ws.q; ++k) {
        if (ws.active[static_cast<size_t>(k)] < p) continue;
        if (r[k] > 1e-12) {
          const scalar_t step = ws.u[k] / r[k];
          if (step < t1) {
            t1 = step;
            drop = k;
          }
        }
      }
      const scalar_t t2 = have_z ? -s_viol / tail_sq : kInf;
      const scalar_t t = std::min(t1, t2);

      if (std::isinf(t)) {
        // No primal progress possible and no blocking multiplier: the
        // violated constraint is incompatible with the feasible set.
        sol.x = x;
        sol.iterations = iter;
        sol.status = QpStatus::Infeasible;
        return sol;
      }

      if (ws.q > 0) ws.u.head(ws.q) -= t * r;
      u_plus += t;

      if (have_z) {
        const vector_t z = ws.J.rightCols(d - ws.q) * dv.tail(d - ws.q);
        x += t * z;
        s_viol += t * tail_sq;
      }

      if (t == t2 && have_z) {
        ws.u.conservativeResize(ws.q + 1);
        ws.u[ws.q] = u_plus;
        in_active[static_cast<size_t>(chosen)] = 1;
        vector_t dv_add = dv;
        ws.add_constraint(chosen, dv_add);
        break;  // constraint now active; rescan for violations
      }

      // Partial step: the blocking constraint leaves the working set and the
      // same violated row is retried.
      in_active[static_cast<size_t>(ws.active[static_cast<size_t>(drop)])] = 0;
      ws.drop_constraint(drop);
    }
  }
}

}  // namespace wbf
