#pragma once

#include <vector>

#include "wbf/robot_model.hpp"

namespace wbf {

// Thrown when a numerical guard trips (near-singular mass matrix,
// diverging state, ...).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// World-frame kinematic quantities per link, filled by forward passes over
// the tree. The *_bias fields are the accelerations the link would have if
// all generalized accelerations were zero (velocity-product terms only).
struct LinkKinematics {
  matrix3_t rot;       // link-to-world
  vector3_t origin;    // joint anchor (frame origin), world
  vector3_t com;       // centre of mass, world
  vector3_t axis;      // joint axis, world (meaningless for the base)
  vector3_t ang_vel;   // world
  vector3_t lin_vel;   // of the frame origin, world
  vector3_t ang_acc_bias;
  vector3_t lin_acc_bias;  // of the frame origin
};

// Equation-of-motion terms in the generalized-velocity layout
// [base linear (world); base angular (body); joints]:
//   M vdot + h = S_j' tau + J' f_grf
struct DynamicsTerms {
  matrix_t M;          // (6+n) x (6+n), symmetric positive definite
  vector_t h;          // Coriolis/centrifugal/gravity bias forces
  matrix_t J;          // stacked 3-row point Jacobians of the feet, (3c) x (6+n)
  vector_t jdot_v;     // stacked drift accelerations (d/dt J) v, 3c
  vector_t foot_pos;   // stacked world foot positions, 3c
  vector_t foot_vel;   // stacked world foot velocities, 3c
};

std::vector<LinkKinematics> forward_kinematics(const RobotModel& model,
                                               const GeneralizedState& state);

DynamicsTerms compute_dynamics(const RobotModel& model, const GeneralizedState& state);

// Solves M vdot = S_j' tau + J' f_grf - h for vdot. `f_grf` stacks one world
// force per foot (3c). Throws NumericalError if M is numerically singular.
vector_t forward_dynamics(const RobotModel& model, const DynamicsTerms& terms,
                          const vector_t& tau, const vector_t& f_grf);
vector_t forward_dynamics(const RobotModel& model, const GeneralizedState& state,
                          const vector_t& tau, const vector_t& f_grf);

// Kinetic plus gravitational potential energy; conserved in free fall.
scalar_t total_energy(const RobotModel& model, const GeneralizedState& state);

}  // namespace wbf
