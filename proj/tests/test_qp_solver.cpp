#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wbf/qp_solver.hpp"

using namespace wbf;

TEST_CASE("random problems match the enumeration oracle") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dims(2, 6);
  std::uniform_int_distribution<int> eqs(0, 2);
  std::uniform_int_distribution<int> ins(0, 8);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = dims(rng);
    const QpProblem p = oracle::random_qp(rng, dim, std::min(eqs(rng), dim - 1), ins(rng));
    const QpSolution sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);
    const oracle::EnumSolution ref = oracle::qp_enumerate(p);
    REQUIRE(ref.feasible);
    CHECK((sol.x - ref.x).lpNorm<Eigen::Infinity>() <= 1e-6);
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("equality-only problems reproduce the closed-form KKT solution") {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 5;
    const QpProblem p = oracle::random_qp(rng, dim, 2, 0);
    const QpSolution sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);

    matrix_t K = matrix_t::Zero(dim + 2, dim + 2);
    K.topLeftCorner(dim, dim) = p.H;
    K.block(dim, 0, 2, dim) = p.A_eq;
    K.block(0, dim, dim, 2) = p.A_eq.transpose();
    vector_t rhs(dim + 2);
    rhs.head(dim) = -p.g;
    rhs.tail(2) = p.b_eq;
    const vector_t z = K.partialPivLu().solve(rhs);
    CHECK((sol.x - z.head(dim)).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((sol.lambda_eq - z.tail(2)).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("unconstrained minimum is -H^{-1} g") {
  QpProblem p;
  p.H = matrix_t::Identity(3, 3) * 4.0;
  p.g = vector_t::Ones(3);
  p.A_eq.resize(0, 3);
  p.b_eq.resize(0);
  p.A_in.resize(0, 3);
  p.b_in.resize(0);
  const QpSolution sol = solve_qp(p);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK((sol.x + vector_t::Constant(3, 0.25)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(sol.active_set.empty());
}

TEST_CASE("contradictory constraints are reported infeasible") {
  QpProblem box;
  box.H = matrix_t::Identity(1, 1);
  box.g = vector_t::Zero(1);
  box.A_eq.resize(0, 1);
  box.b_eq.resize(0);
  box.A_in.resize(2, 1);
  box.A_in << 1.0, -1.0;  // x <= -1 and -x <= -1
  box.b_in.resize(2);
  box.b_in << -1.0, -1.0;
  CHECK(solve_qp(box).status == QpStatus::Infeasible);

  QpProblem eqs;
  eqs.H = matrix_t::Identity(2, 2);
  eqs.g = vector_t::Zero(2);
  eqs.A_eq.resize(2, 2);
  eqs.A_eq << 1.0, 0.0, 1.0, 0.0;  // x0 = 0 and x0 = 1
  eqs.b_eq.resize(2);
  eqs.b_eq << 0.0, 1.0;
  eqs.A_in.resize(0, 2);
  eqs.b_in.resize(0);
  CHECK(solve_qp(eqs).status == QpStatus::Infeasible);

  QpProblem mixed;  // equality pinned outside the inequality region
  mixed.H = matrix_t::Identity(2, 2);
  mixed.g = vector_t::Zero(2);
  mixed.A_eq.resize(1, 2);
  mixed.A_eq << 1.0, 0.0;
  mixed.b_eq = vector_t::Constant(1, 2.0);
  mixed.A_in.resize(1, 2);
  mixed.A_in << 1.0, 0.0;
  mixed.b_in = vector_t::Constant(1, 1.0);
  CHECK(solve_qp(mixed).status == QpStatus::Infeasible);
}

TEST_CASE("reported duals satisfy the KKT conditions") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    const QpProblem p = oracle::random_qp(rng, 4, 1, 5);
    const QpSolution sol = solve_qp(p);
    REQUIRE(sol.status == QpStatus::Optimal);
    CHECK(sol.mu_in.size() == 5);
    CHECK(sol.mu_in.minCoeff() >= -1e-10);
    CHECK(sol.kkt_residual <= 1e-8);
    CHECK(kkt_residual(p, sol.x, sol.lambda_eq, sol.mu_in) <= 1e-8);
    for (int row : sol.active_set) {
      CHECK(std::abs(p.A_in.row(row).dot(sol.x) - p.b_in[row]) <= 1e-7);
    }
  }
}

TEST_CASE("warm hints keep the answer and cannot hurt correctness") {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 30; ++trial) {
    const QpProblem p = oracle::random_qp(rng, 5, 1, 6);
    const QpSolution cold = solve_qp(p);
    REQUIRE(cold.status == QpStatus::Optimal);

    QpOptions warm;
    warm.warm_hint = cold.active_set;
    const QpSolution hot = solve_qp(p, warm);
    REQUIRE(hot.status == QpStatus::Optimal);
    CHECK((hot.x - cold.x).lpNorm<Eigen::Infinity>() <= 1e-8);

    QpOptions junk;
    junk.warm_hint = {0, 3, 5, 99, -2};  // unknown indices must be ignored
    const QpSolution j = solve_qp(p, junk);
    REQUIRE(j.status == QpStatus::Optimal);
    CHECK((j.x - cold.x).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("solving twice is deterministic") {
  std::mt19937_64 rng(105);
  const QpProblem p = oracle::random_qp(rng, 6, 2, 6);
  const QpSolution a = solve_qp(p);
  const QpSolution b = solve_qp(p);
  REQUIRE(a.status == QpStatus::Optimal);
  CHECK((a.x - b.x).norm() == 0.0);
  CHECK(a.iterations == b.iterations);
  CHECK(a.active_set == b.active_set);
}

TEST_CASE("semidefinite Hessians are shifted instead of failing") {
  QpProblem p;
  p.H = matrix_t::Zero(2, 2);
  p.H(0, 0) = 1.0;  // flat in x1
  p.g.resize(2);
  p.g << 0.0, 1.0;  // pushes x1 down to its bound
  p.A_eq.resize(0, 2);
  p.b_eq.resize(0);
  p.A_in.resize(2, 2);
  p.A_in << 0.0, 1.0, 0.0, -1.0;  // -1 <= x1 <= 1
  p.b_in.resize(2);
  p.b_in << 1.0, 1.0;
  const QpSolution sol = solve_qp(p);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK(sol.regularized);
  CHECK(sol.regularization_used > 0.0);
  CHECK(sol.x[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("dimension mismatches are rejected up front") {
  QpProblem p;
  p.H = matrix_t::Identity(3, 3);
  p.g = vector_t::Zero(2);  // wrong size
  p.A_eq.resize(0, 3);
  p.b_eq.resize(0);
  p.A_in.resize(0, 3);
  p.b_in.resize(0);
  CHECK_THROWS_AS(solve_qp(p), DimensionError);

  p.g = vector_t::Zero(3);
  p.A_in.resize(1, 2);  // wrong column count
  p.A_in.setZero();
  p.b_in = vector_t::Zero(1);
  CHECK_THROWS_AS(solve_qp(p), DimensionError);
}

TEST_CASE("iteration budget is honoured and reported") {
  std::mt19937_64 rng(106);
  const QpProblem p = oracle::random_qp(rng, 6, 0, 8);
  QpOptions opts;
  opts.max_iterations = 1;
  const QpSolution sol = solve_qp(p, opts);
  // Either it solved within one iteration or it says it ran out; both are
  // acceptable, silence is not.
  if (sol.status != QpStatus::Optimal) {
    CHECK(sol.status == QpStatus::MaxIterations);
    CHECK(sol.iterations >= 1);
  }
}
