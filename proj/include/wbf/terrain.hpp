#pragma once

#include <string>

#include "wbf/types.hpp"

namespace wbf {

// Ground geometry as a height field with an outward normal.
struct GroundProfile {
  enum class Kind { Flat, Slope, Stairs };
  Kind kind = Kind::Flat;
  scalar_t slope_angle = 0.0;  // slope rises along +x: z = tan(angle) * x
  scalar_t stair_rise = 0.08;
  scalar_t stair_run = 0.3;    // steps ascend along +x, first edge at x = 0

  scalar_t height(scalar_t x, scalar_t y) const;
  vector3_t normal(scalar_t x, scalar_t y) const;
};

// Pressure-sinkage and shear parameters of the foot-soil interaction.
// Normal load on a circular patch of radius R at sinkage depth d:
//   F_N = pi R^2 (k_c / R + k_phi) d^m + b_N dd/dt        (clamped >= 0)
// Tangential reaction after accumulated shear displacement x:
//   F_T = (pi R^2 a + mu F_N) (1 - e^(-1.43 x / K)) / (1 + e^(-1.43 x / K))
//         + b_T dx/dt,   opposing the slip direction.
struct TerrainParams {
  scalar_t k_c = 0.0;     // cohesive pressure-sinkage modulus
  scalar_t k_phi = 3e7;   // frictional pressure-sinkage modulus
  scalar_t m = 1.1;       // sinkage exponent
  scalar_t b_N = 150.0;   // normal contact damping
  scalar_t a = 0.0;       // adhesive shear stress
  scalar_t mu = 0.6;      // internal friction coefficient
  scalar_t K = 0.01;      // shear deformation modulus
  scalar_t b_T = 60.0;    // tangential contact damping
  GroundProfile ground;
};

// Named parameter sets; throws ValidationError for unknown names.
// "flat", "soft_soil", "low_friction", "slope", "stairs".
TerrainParams terrain_preset(const std::string& name);

// Evolving contact state of one foot. `shear` is the displacement
// accumulated along the slip path since touchdown.
struct FootContact {
  bool active = false;
  scalar_t depth = 0.0;
  scalar_t depth_rate = 0.0;
  scalar_t shear = 0.0;
  scalar_t shear_rate = 0.0;
  vector3_t slip_dir = vector3_t::Zero();  // unit tangent of the slip motion
};

struct ContactForce {
  scalar_t normal = 0.0;      // magnitude along the terrain normal
  scalar_t tangential = 0.0;  // magnitude opposing slip
  vector3_t force = vector3_t::Zero();  // world-frame sum
};

// Advances one foot's contact bookkeeping by a physics step: penetration
// depth and rate along the local normal, shear accumulation while in
// contact, reset on touchdown, deactivation on lift-off.
FootContact update_contact(const TerrainParams& params, const FootContact& prev,
                           const vector3_t& foot_pos, const vector3_t& foot_vel,
                           scalar_t dt);

// Evaluates the contact model at a given state. Inactive contacts produce
// zero force.
ContactForce contact_force(const TerrainParams& params, scalar_t foot_radius,
                           const FootContact& contact, const vector3_t& foot_pos);

// Shear saturation factor s(x) = (1 - e^(-1.43 x/K)) / (1 + e^(-1.43 x/K)).
scalar_t shear_saturation(const TerrainParams& params, scalar_t shear_disp);

// Largest sustainable normal load at sinkage delta_max for a patch radius R.
scalar_t normal_force_capacity(const TerrainParams& params, scalar_t foot_radius,
                               scalar_t delta_max);

// Sinkage at which the static normal force balances `load` (inverse of the
// pressure-sinkage law; used to initialise standing robots in equilibrium).
scalar_t equilibrium_sinkage(const TerrainParams& params, scalar_t foot_radius,
                             scalar_t load);

}  // namespace wbf
