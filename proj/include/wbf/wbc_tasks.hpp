#pragma once

#include <vector>

#include "wbf/dynamics.hpp"
#include "wbf/hqp_cascade.hpp"
#include "wbf/terrain.hpp"

namespace wbf {

// Layout of the decision vector x = [vdot; f_grf; tau]:
// generalized accelerations, stacked world contact forces, joint torques.
struct DecisionLayout {
  int nv = 0;  // 6 + n_joints
  int nj = 0;
  int nc = 0;  // feet

  static DecisionLayout from(const RobotModel& model) {
    return {model.n_v(), model.n_joints(), model.n_feet()};
  }
  int dim() const { return nv + 3 * nc + nj; }
  int qdd_offset() const { return 0; }
  int grf_offset() const { return nv; }
  int tau_offset() const { return nv + 3 * nc; }
};

// Equations of motion as a hard constraint:  M vdot - J' f - S' tau = -h.
Task task_dynamic_consistency(const DynamicsTerms& dyn, const DecisionLayout& layout);

// Acceleration bounds keeping each joint inside its position limits over a
// look-ahead horizon dt_h (and below its velocity limit one horizon ahead):
//   qdd <=  2/dt_h^2 (q_max - q - dt_h qd),   qdd <= ( vel_max - qd)/dt_h
//   qdd >=  2/dt_h^2 (q_min - q - dt_h qd),   qdd >= (-vel_max - qd)/dt_h
// The caller passes the effective limits (range-of-motion overrides applied).
Task task_kinematic_limits(const vector_t& q_min, const vector_t& q_max,
                           const vector_t& vel_max, const GeneralizedState& state,
                           scalar_t dt_horizon, const DecisionLayout& layout);

// Actuator box constraints tau_min <= tau <= tau_max.
Task task_torque_limits(const vector_t& tau_min, const vector_t& tau_max,
                        const DecisionLayout& layout);

// Joint-space tracking of the action targets a_t:
//   qdd_j = kp o (a_t - q_j) - kd o qd_j.
Task task_joint_tracking(const vector_t& a_t, const GeneralizedState& state,
                         const vector_t& kp, const vector_t& kd,
                         const DecisionLayout& layout);

// Stationarity of the feet in contact: J_i vdot = -(dJ/dt v)_i.
Task task_contact_motion(const DynamicsTerms& dyn, const std::vector<bool>& contact,
                         const DecisionLayout& layout);

// Per-foot force limits derived from the terrain model, evaluated once per
// control tick and carried into the force-interaction task.
struct FootForceBounds {
  scalar_t mu = 0.0;            // friction coefficient the controller assumes
  scalar_t xi_xy_max = 0.0;     // shear displacement budget for tangential load
  scalar_t delta_max = 0.0;     // sinkage budget for normal load
  scalar_t shear_factor = 0.0;  // s(xi_xy_max)
  vector_t f_z_max;             // per foot: normal capacity at delta_max
  vector_t cohesion_cap;        // per foot: pi R^2 a (adhesive shear capacity)
  vector_t f_xy_max;            // per foot: tangential capacity at the weight share
};

// `mu_assumed` is the friction coefficient the follower believes in (a study
// knob that may differ from the terrain's true value); `total_weight` spreads
// over the feet in contact for the diagnostic f_xy_max entries.
FootForceBounds compute_force_bounds(const TerrainParams& terrain,
                                     const std::vector<scalar_t>& foot_radii,
                                     const std::vector<bool>& contact,
                                     scalar_t total_weight, scalar_t mu_assumed,
                                     scalar_t xi_xy_max, scalar_t delta_max);

// Foot-terrain interaction constraints on the contact forces. Feet in
// contact get the shear pyramid (inner sqrt(2)/2 approximation)
//   +-F_x - (sqrt(2)/2) mu s F_z <= (sqrt(2)/2) s pi R^2 a
//   +-F_y - (sqrt(2)/2) mu s F_z <= (sqrt(2)/2) s pi R^2 a
//   0 <= F_z <= F_z_max,
// with s = s(xi_xy_max); swing feet have all three components pinned to zero
// by inequality pairs.
Task task_ft_interaction(const FootForceBounds& bounds, const std::vector<bool>& contact,
                         const DecisionLayout& layout);

// Body stabilization: zero vertical acceleration and zero roll/pitch angular
// acceleration of the base.
Task task_body_stabilization(const DecisionLayout& layout);

}  // namespace wbf
