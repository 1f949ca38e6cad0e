#include "wbf/terrain.hpp"

#include <cmath>

namespace wbf {

scalar_t GroundProfile::height(scalar_t x, scalar_t y) const {
  (void)y;
  switch (kind) {
    case Kind::Flat:
      return 0.0;
    case Kind::Slope:
      return std::tan(slope_angle) * x;
    case Kind::Stairs:
      if (x <= 0.0) return 0.0;
      return stair_rise * std::floor(x / stair_run + 1.0);
  }
  return 0.0;
}

vector3_t GroundProfile::normal(scalar_t x, scalar_t y) const {
  (void)x;
  (void)y;
  if (kind == Kind::Slope) {
    // Unit normal of the plane z = tan(angle) x.
    const scalar_t c = std::cos(slope_angle);
    const scalar_t s = std::sin(slope_angle);
    return vector3_t(-s, 0.0, c);
  }
  return vector3_t::UnitZ();  // flat ground and stair treads
}

TerrainParams terrain_preset(const std::string& name) {
  TerrainParams p;  // defaults are the firm flat preset
  if (name == "flat") {
    return p;
  }
  if (name == "soft_soil") {
    p.k_c = 1000.0;
    p.k_phi = 5e6;
    p.b_N = 80.0;
    p.mu = 0.5;
    p.K = 0.025;
    p.b_T = 40.0;
    return p;
  }
  if (name == "low_friction") {
    // Rigid-board limit: linear pressure-sinkage with a stiff modulus keeps
    // sinkage negligible, so the interaction is dominated by the shear law.
    // A slick board saturates its shear stress within a millimetre (grip does
    // not need centimetres of deformation, unlike soil), and a skating foot
    // gets almost no viscous grip back — sliding is cheap and unproductive.
    p.m = 1.0;
    p.mu = 0.15;
    p.K = 0.001;
    p.b_T = 5.0;
    return p;
  }
  if (name == "slope") {
    p.ground.kind = GroundProfile::Kind::Slope;
    p.ground.slope_angle = 10.0 * M_PI / 180.0;
    return p;
  }
  if (name == "stairs") {
    p.ground.kind = GroundProfile::Kind::Stairs;
    p.ground.stair_rise = 0.06;
    p.ground.stair_run = 0.3;
    return p;
  }
  throw ValidationError("unknown terrain preset '" + name + "'");
}

FootContact update_contact(const TerrainParams& params, const FootContact& prev,
                           const vector3_t& foot_pos, const vector3_t& foot_vel,
                           scalar_t dt) {
  const vector3_t n = params.ground.normal(foot_pos.x(), foot_pos.y());
  const scalar_t ground_z = params.ground.height(foot_pos.x(), foot_pos.y());
  // Penetration measured along the local normal; for a plane z = g(x) the
  // vertical gap scales by cos(angle) = n_z.
  const scalar_t depth = (ground_z - foot_pos.z()) * n.z();

  FootContact next;
  if (depth <= 0.0) {
    return next;  // airborne: everything reset
  }
  const vector3_t v_t = foot_vel - foot_vel.dot(n) * n;
  const scalar_t speed = v_t.norm();

  next.active = true;
  next.depth = depth;
  next.depth_rate = -foot_vel.dot(n);
  next.shear_rate = speed;
  if (!prev.active) {
    next.shear = speed * dt;  // touchdown: shear history restarts
  } else {
    next.shear = prev.shear + speed * dt;
  }
  if (speed > 1e-9) {
    next.slip_dir = v_t / speed;
  } else {
    next.slip_dir = prev.active ? prev.slip_dir : vector3_t::Zero();
  }
  return next;
}

scalar_t shear_saturation(const TerrainParams& params, scalar_t shear_disp) {
  const scalar_t e = std::exp(-1.43 * shear_disp / params.K);
  return (1.0 - e) / (1.0 + e);
}

ContactForce contact_force(const TerrainParams& params, scalar_t foot_radius,
                           const FootContact& contact, const vector3_t& foot_pos) {
  ContactForce out;
  if (!contact.active || contact.depth <= 0.0) {
    return out;
  }
  const scalar_t area = M_PI * foot_radius * foot_radius;
  const scalar_t stiffness = area * (params.k_c / foot_radius + params.k_phi);
  out.normal = stiffness * std::pow(contact.depth, params.m) +
               params.b_N * contact.depth_rate;
  if (out.normal < 0.0) out.normal = 0.0;  // soil cannot pull

  out.tangential = (area * params.a + params.mu * out.normal) *
                       shear_saturation(params, contact.shear) +
                   params.b_T * contact.shear_rate;

  const vector3_t n = params.ground.normal(foot_pos.x(), foot_pos.y());
  out.force = out.normal * n - out.tangential * contact.slip_dir;
  return out;
}

scalar_t normal_force_capacity(const TerrainParams& params, scalar_t foot_radius,
                               scalar_t delta_max) {
  const scalar_t area = M_PI * foot_radius * foot_radius;
  return area * (params.k_c / foot_radius + params.k_phi) * std::pow(delta_max, params.m);
}

scalar_t equilibrium_sinkage(const TerrainParams& params, scalar_t foot_radius,
                             scalar_t load) {
  const scalar_t area = M_PI * foot_radius * foot_radius;
  const scalar_t stiffness = area * (params.k_c / foot_radius + params.k_phi);
  if (load <= 0.0 || stiffness <= 0.0) return 0.0;
  return std::pow(load / stiffness, 1.0 / params.m);
}

}  // namespace wbf
