#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wbf/dynamics.hpp"

using namespace wbf;

namespace {

const std::string kAssets = WBF_ASSET_DIR;

RobotModel hexapod() { return load_robot(kAssets + "/hexapod.robot"); }
RobotModel pendulum() { return load_robot(kAssets + "/pendulum.robot"); }

}  // namespace

TEST_CASE("mass matrix columns match unit-acceleration inverse dynamics") {
  std::mt19937_64 rng(11);
  for (const RobotModel& model : {hexapod(), pendulum()}) {
    for (int trial = 0; trial < 10; ++trial) {
      const GeneralizedState s = oracle::random_state(rng, model);
      const DynamicsTerms terms = compute_dynamics(model, s);
      const matrix_t M_ref = oracle::mass_matrix(model, s);
      CHECK((terms.M - M_ref).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
  }
}

TEST_CASE("mass matrix is symmetric positive definite") {
  std::mt19937_64 rng(12);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 10; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const matrix_t M = compute_dynamics(model, s).M;
    CHECK((M - M.transpose()).lpNorm<Eigen::Infinity>() <= 1e-9);
    Eigen::SelfAdjointEigenSolver<matrix_t> eig(M);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("composite blocks of the mass matrix have their closed forms") {
  std::mt19937_64 rng(13);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const matrix_t M = compute_dynamics(model, s).M;

    // Linear-linear block: translating everything needs the total mass.
    CHECK((M.topLeftCorner(3, 3) - model.total_mass() * matrix3_t::Identity())
              .lpNorm<Eigen::Infinity>() <= 1e-9);

    // Linear-angular block: unit angular acceleration about a base axis drags
    // the combined centre of mass around the base origin.
    const auto frames = oracle::link_frames(model, s);
    vector3_t weighted = vector3_t::Zero();
    for (size_t i = 0; i < model.links.size(); ++i) {
      weighted += model.links[i].mass * (frames[i].com - s.base_pos);
    }
    for (int k = 0; k < 3; ++k) {
      const vector3_t expected = vector3_t(s.base_rot.col(k)).cross(weighted);
      CHECK((vector3_t(M.block<3, 1>(0, 3 + k)) - expected).norm() <= 1e-9);
    }
  }
}

TEST_CASE("pendulum joint inertia is the rod's analytic value") {
  std::mt19937_64 rng(14);
  const RobotModel model = pendulum();
  // m l^2 + I_yy about the pivot, independent of configuration.
  const scalar_t expected = 1.0 * 0.5 * 0.5 + 0.0833333333333333;
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const matrix_t M = compute_dynamics(model, s).M;
    CHECK(M(6, 6) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("bias forces match the oracle inverse dynamics at zero acceleration") {
  std::mt19937_64 rng(15);
  for (const RobotModel& model : {hexapod(), pendulum()}) {
    for (int trial = 0; trial < 10; ++trial) {
      const GeneralizedState s = oracle::random_state(rng, model);
      const vector_t h = compute_dynamics(model, s).h;
      const vector_t h_ref = oracle::bias_forces(model, s);
      CHECK((h - h_ref).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
  }
}

TEST_CASE("at rest the bias is pure gravity") {
  const RobotModel model = hexapod();
  GeneralizedState s = GeneralizedState::neutral(model);
  s.base_pos.z() = 0.3;
  const vector_t h = compute_dynamics(model, s).h;
  CHECK((vector3_t(h.head<3>()) - (-model.total_mass() * model.gravity)).norm() <= 1e-9);
}

TEST_CASE("foot jacobians match analytic and finite-difference references") {
  std::mt19937_64 rng(16);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const DynamicsTerms terms = compute_dynamics(model, s);
    const auto frames = oracle::link_frames(model, s);
    for (int f = 0; f < model.n_feet(); ++f) {
      const matrix_t J = terms.J.middleRows<3>(3 * f);

      const vector3_t p = oracle::foot_position(model, frames, f);
      CHECK((vector3_t(terms.foot_pos.segment<3>(3 * f)) - p).norm() <= 1e-10);

      const matrix_t J_exact =
          oracle::point_jacobian(model, frames, s, model.feet[static_cast<size_t>(f)].link, p);
      CHECK((J - J_exact).lpNorm<Eigen::Infinity>() <= 1e-10);

      const matrix_t J_fd = oracle::foot_jacobian_fd(model, s, f);
      CHECK((J - J_fd).lpNorm<Eigen::Infinity>() <= 1e-6);

      CHECK((vector3_t(terms.foot_vel.segment<3>(3 * f)) - vector3_t(J_exact * s.v))
                .norm() <= 1e-10);
    }
  }
}

TEST_CASE("drift accelerations match the finite-difference flow") {
  std::mt19937_64 rng(17);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const DynamicsTerms terms = compute_dynamics(model, s);
    for (int f = 0; f < model.n_feet(); ++f) {
      const vector3_t ref = oracle::jdot_times_v_fd(model, s, f);
      const vector3_t got = terms.jdot_v.segment<3>(3 * f);
      CHECK((got - ref).norm() <= 1e-5 * (1.0 + ref.norm()));
    }
  }
}

TEST_CASE("forward dynamics inverts the equations of motion") {
  std::mt19937_64 rng(18);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    const vector_t tau = oracle::random_vector(rng, model.n_joints(), -10.0, 10.0);
    const vector_t f_grf = oracle::random_vector(rng, 3 * model.n_feet(), -50.0, 50.0);
    const vector_t a = forward_dynamics(model, s, tau, f_grf);

    // Residual checked against the oracle-side terms, not the library's.
    const matrix_t M_ref = oracle::mass_matrix(model, s);
    const vector_t h_ref = oracle::bias_forces(model, s);
    const auto frames = oracle::link_frames(model, s);
    vector_t rhs = -h_ref;
    rhs.tail(model.n_joints()) += tau;
    for (int f = 0; f < model.n_feet(); ++f) {
      const vector3_t p = oracle::foot_position(model, frames, f);
      const matrix_t J =
          oracle::point_jacobian(model, frames, s, model.feet[static_cast<size_t>(f)].link, p);
      rhs += J.transpose() * f_grf.segment<3>(3 * f);
    }
    CHECK((M_ref * a - rhs).lpNorm<Eigen::Infinity>() <=
          1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("a robot at rest free-falls at exactly gravity") {
  std::mt19937_64 rng(19);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    GeneralizedState s = oracle::random_state(rng, model);
    s.v.setZero();
    const vector_t a = forward_dynamics(model, s, vector_t::Zero(model.n_joints()),
                                        vector_t::Zero(3 * model.n_feet()));
    vector_t expected = vector_t::Zero(model.n_v());
    expected.head<3>() = model.gravity;
    CHECK((a - expected).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("free-fall conserves energy over one second") {
  std::mt19937_64 rng(20);
  const RobotModel model = hexapod();
  GeneralizedState s = oracle::random_state(rng, model);
  s.base_pos.z() = 50.0;  // keep it well above any ground for the whole window
  // Moderate rates: the explicit velocity update drifts O(dt) with a
  // coefficient that grows steeply with speed, and this bound is meant to
  // catch inconsistent dynamics terms, not discretization error.
  s.v.head<3>() = vector3_t(0.1, -0.05, 0.05);
  s.v.segment<3>(3) = vector3_t(0.15, -0.10, 0.05);
  s.v.tail(model.n_joints()) = oracle::random_vector(rng, model.n_joints(), -0.25, 0.25);
  const scalar_t dt = 0.005;
  const scalar_t e0 = total_energy(model, s);
  const vector_t zero_tau = vector_t::Zero(model.n_joints());
  const vector_t zero_f = vector_t::Zero(3 * model.n_feet());
  scalar_t worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const vector_t a = forward_dynamics(model, s, zero_tau, zero_f);
    const vector_t v_old = s.v;
    s.v += a * dt;
    s.base_pos += 0.5 * (v_old.head<3>() + s.v.head<3>()) * dt;
    s.base_rot = s.base_rot * exp_so3(0.5 * (v_old.segment<3>(3) + s.v.segment<3>(3)) * dt);
    s.q_j += 0.5 * (v_old.tail(model.n_joints()) + s.v.tail(model.n_joints())) * dt;
    s.renormalize_rotation();
    worst = std::max(worst, std::abs(total_energy(model, s) - e0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("total energy decomposes into kinetic plus potential") {
  const RobotModel model = hexapod();
  GeneralizedState s = GeneralizedState::neutral(model);
  s.base_pos.z() = 1.0;
  const scalar_t at_rest = total_energy(model, s);
  s.base_pos.z() = 2.0;
  const scalar_t lifted = total_energy(model, s);
  CHECK(lifted - at_rest ==
        doctest::Approx(model.total_mass() * 9.81 * 1.0).epsilon(1e-9));

  s.v.head<3>() = vector3_t(1.0, 0.0, 0.0);
  CHECK(total_energy(model, s) - lifted ==
        doctest::Approx(0.5 * model.total_mass() * 1.0).epsilon(1e-9));
}

TEST_CASE("kinetic energy equals the quadratic form in the mass matrix") {
  std::mt19937_64 rng(21);
  const RobotModel model = hexapod();
  for (int trial = 0; trial < 5; ++trial) {
    const GeneralizedState s = oracle::random_state(rng, model);
    GeneralizedState rest = s;
    rest.v.setZero();
    const scalar_t kinetic = total_energy(model, s) - total_energy(model, rest);
    const matrix_t M = compute_dynamics(model, s).M;
    CHECK(kinetic == doctest::Approx(0.5 * s.v.dot(M * s.v)).epsilon(1e-9));
  }
}
