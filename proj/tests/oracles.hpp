#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here recomputes its answer from the model / problem
// data with a different algorithm than the library uses (Jacobian projection
// instead of spatial recursions, active-set enumeration instead of iteration,
// plain formula evaluation instead of shared helpers), so agreement means
// both sides derived the same mathematics rather than the same code.

#include <random>
#include <vector>

#include "wbf/dynamics.hpp"
#include "wbf/hqp_cascade.hpp"
#include "wbf/qp_solver.hpp"
#include "wbf/terrain.hpp"

namespace oracle {

using wbf::matrix3_t;
using wbf::matrix_t;
using wbf::scalar_t;
using wbf::vector3_t;
using wbf::vector_t;

// ---------------------------------------------------------------------------
// Rigid-body dynamics by direct world-frame propagation + Jacobian projection.

// World pose of every link computed by a plain anchor-to-anchor walk.
struct LinkFrame {
  matrix3_t rot;     // link-to-world
  vector3_t anchor;  // joint anchor (frame origin), world
  vector3_t com;     // centre of mass, world
  vector3_t axis;    // joint axis, world (base: zero)
};

std::vector<LinkFrame> link_frames(const wbf::RobotModel& model,
                                   const wbf::GeneralizedState& state);

// True when link `link` moves with joint `joint` (the joint's link is an
// ancestor of `link` or the link itself).
bool joint_moves_link(const wbf::RobotModel& model, int link, int joint);

// Exact world-frame point Jacobian of a point `p_world` riding on `link`,
// 3 x (6+n), columns in the [base linear; base angular (body); joints] layout.
matrix_t point_jacobian(const wbf::RobotModel& model,
                        const std::vector<LinkFrame>& frames,
                        const wbf::GeneralizedState& state, int link,
                        const vector3_t& p_world);

// Same layout, angular part (rows are the world angular velocity of `link`).
matrix_t angular_jacobian(const wbf::RobotModel& model,
                          const std::vector<LinkFrame>& frames,
                          const wbf::GeneralizedState& state, int link);

// Generalized forces required to produce acceleration `a` at (q, v), with or
// without gravity: Newton-Euler acceleration propagation projected through
// the per-link Jacobians.
vector_t inverse_dynamics(const wbf::RobotModel& model,
                          const wbf::GeneralizedState& state, const vector_t& a,
                          bool with_gravity);

// Mass matrix column by column from unit-acceleration inverse dynamics
// (v = 0, no gravity).
matrix_t mass_matrix(const wbf::RobotModel& model, const wbf::GeneralizedState& state);

// Bias forces h = ID(q, v, a = 0) with gravity.
vector_t bias_forces(const wbf::RobotModel& model, const wbf::GeneralizedState& state);

// World foot position from the oracle frames.
vector3_t foot_position(const wbf::RobotModel& model,
                        const std::vector<LinkFrame>& frames, int foot);

// Central finite-difference point Jacobian of foot `foot` (3 x (6+n)),
// differencing the oracle foot position under per-coordinate perturbations.
matrix_t foot_jacobian_fd(const wbf::RobotModel& model,
                          const wbf::GeneralizedState& state, int foot,
                          scalar_t eps = 1e-6);

// Drift acceleration (d/dt J) v of a foot by central differences along the
// constant-velocity flow of the state.
vector3_t jdot_times_v_fd(const wbf::RobotModel& model,
                          const wbf::GeneralizedState& state, int foot,
                          scalar_t dt = 1e-6);

// ---------------------------------------------------------------------------
// Quadratic programs by brute-force active-set enumeration.

struct EnumSolution {
  bool feasible = false;
  vector_t x;
  scalar_t objective = 0.0;
};

// Tries every subset of the inequalities as the active set, solves the
// resulting KKT system directly, and keeps the best candidate that is primal
// and dual feasible. Exact for strictly convex problems with a modest number
// of inequality rows (hard limit 20).
EnumSolution qp_enumerate(const wbf::QpProblem& p, scalar_t tol = 1e-8);

// ---------------------------------------------------------------------------
// Lexicographic hierarchies by the plain sequential method.

struct SeqSolution {
  bool ok = false;
  vector_t x;
  // Per priority level, ascending, evaluated at the final x.
  std::vector<scalar_t> eq_residual;
  std::vector<scalar_t> ineq_violation;
};

// Solves the same per-level ridge-regularized programs the library poses,
// but each one by enumeration, and freezes levels by naive row stacking.
SeqSolution hqp_sequential(const std::vector<wbf::Task>& tasks, int dim,
                           scalar_t ridge = 1e-9);

// ---------------------------------------------------------------------------
// Foot-terrain interaction formulas, written out directly.

scalar_t tm_shear_ratio(const wbf::TerrainParams& p, scalar_t shear_disp);
scalar_t tm_normal_force(const wbf::TerrainParams& p, scalar_t radius,
                         scalar_t depth, scalar_t depth_rate);
vector3_t tm_contact_force(const wbf::TerrainParams& p, scalar_t radius,
                           const wbf::FootContact& contact, const vector3_t& foot_pos);

// Worst violation of the force pyramid the deployment stack enforces, checked
// from the raw terrain formulas: per contact foot, |F_x| and |F_y| within
// sqrt(2)/2 * s(xi) * (mu_assumed F_z + pi R^2 a), 0 <= F_z <= capacity at the
// sinkage budget; swing feet carry nothing. Returns the max over all rows.
scalar_t pyramid_violation(const wbf::TerrainParams& terrain,
                           const std::vector<scalar_t>& foot_radii,
                           const std::vector<bool>& contact, scalar_t mu_assumed,
                           scalar_t xi_xy_max, scalar_t delta_max,
                           const vector_t& f_grf);

// ---------------------------------------------------------------------------
// Static stance: gravity compensation through the contact forces.

struct StaticSolution {
  vector_t tau;    // per joint
  vector_t f_grf;  // stacked per foot (zero for swing feet)
};

// Minimum-norm (over ||F||^2 + ||tau||^2) static equilibrium at zero
// generalized acceleration: S' tau + J' F = h with the base rows exact.
// Everything (h, J) comes from the oracle-side dynamics.
StaticSolution static_stance(const wbf::RobotModel& model,
                             const wbf::GeneralizedState& state,
                             const std::vector<bool>& contact);

// ---------------------------------------------------------------------------
// Seeded generators for randomized comparisons.

matrix_t random_matrix(std::mt19937_64& rng, int rows, int cols, scalar_t lo = -1.0,
                       scalar_t hi = 1.0);
vector_t random_vector(std::mt19937_64& rng, int n, scalar_t lo = -1.0,
                       scalar_t hi = 1.0);

// Strictly convex QP with a known feasible point; roughly half the
// inequalities are tight at that point so the active set is nontrivial.
wbf::QpProblem random_qp(std::mt19937_64& rng, int dim, int n_eq, int n_in);

// Random task hierarchy over `dim` variables with `levels` priorities, mixing
// equality and inequality tasks; row counts are kept small enough for the
// enumeration oracle.
std::vector<wbf::Task> random_hierarchy(std::mt19937_64& rng, int dim, int levels);

// Random robot state: bounded base pose, joints inside their limits,
// velocities in [-1, 1].
wbf::GeneralizedState random_state(std::mt19937_64& rng, const wbf::RobotModel& model);

}  // namespace oracle
