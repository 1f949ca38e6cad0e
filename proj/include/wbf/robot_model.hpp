#pragma once

#include <string>
#include <vector>

#include "wbf/config_text.hpp"
#include "wbf/types.hpp"

namespace wbf {

// One rigid body. Index 0 is the floating base; every other link is attached
// to its parent through a single revolute joint, so link index i >= 1 owns
// joint index i-1 and the tree has n_links = n_joints + 1.
struct Link {
  std::string name;
  int parent = -1;            // -1 for the base
  vector3_t origin = vector3_t::Zero();   // joint anchor in the parent frame
  matrix3_t fixed_rot = matrix3_t::Identity();  // parent->link rotation at q=0
  vector3_t axis = vector3_t::UnitZ();    // revolute axis, link frame
  scalar_t mass = 0.0;
  vector3_t com = vector3_t::Zero();      // centre of mass, link frame
  matrix3_t inertia = matrix3_t::Zero();  // about the com, link frame

  // Joint data (ignored for the base).
  scalar_t q_min = 0.0, q_max = 0.0;
  scalar_t vel_max = 0.0;
  scalar_t tau_min = 0.0, tau_max = 0.0;
  scalar_t nominal = 0.0;     // stance posture angle
  bool hip_yaw = false;       // joint participates in hip range-of-motion overrides
};

// A contact point: a sphere of radius `radius` centred at `offset` in the
// frame of link `link`.
struct Foot {
  std::string name;
  int link = -1;
  vector3_t offset = vector3_t::Zero();
  scalar_t radius = 0.0;
};

struct RobotModel {
  std::string name;
  int schema_version = 1;
  std::vector<Link> links;
  std::vector<Foot> feet;
  vector3_t gravity = vector3_t(0.0, 0.0, -9.81);

  int n_joints() const { return static_cast<int>(links.size()) - 1; }
  int n_feet() const { return static_cast<int>(feet.size()); }
  int n_v() const { return 6 + n_joints(); }
  scalar_t total_mass() const;

  const Link& joint_link(int j) const { return links[static_cast<size_t>(j) + 1]; }
  Link& joint_link(int j) { return links[static_cast<size_t>(j) + 1]; }
  int find_link(const std::string& name) const;  // -1 if absent

  vector_t joint_lower() const;
  vector_t joint_upper() const;
  vector_t joint_vel_max() const;
  vector_t tau_lower() const;
  vector_t tau_upper() const;
  vector_t nominal_posture() const;
};

// Full robot configuration and velocity. The generalized velocity stacks
// [base linear velocity (world); base angular velocity (body); joint rates],
// and accelerations use the same layout.
struct GeneralizedState {
  vector3_t base_pos = vector3_t::Zero();        // base frame origin, world
  matrix3_t base_rot = matrix3_t::Identity();    // body-to-world
  vector_t q_j;
  vector_t v;

  int nj() const { return static_cast<int>(q_j.size()); }
  int nv() const { return 6 + nj(); }

  Eigen::Ref<const vector3_t> base_lin_vel() const { return v.head<3>(); }
  Eigen::Ref<const vector3_t> omega_body() const { return v.segment<3>(3); }
  Eigen::Ref<const vector_t> qd_j() const { return v.tail(nj()); }
  quaternion_t base_quat() const { return quaternion_t(base_rot); }

  // Projects base_rot back onto SO(3); integration drift stays ~1e-16 per
  // step but compounds over long runs.
  void renormalize_rotation();

  static GeneralizedState neutral(const RobotModel& model);
};

RobotModel parse_robot(const ConfigNode& root, const std::string& origin);
RobotModel load_robot(const std::string& path);

// Writes the model in the same text format load_robot reads. Scalars are
// printed so that a reload reproduces identical doubles.
std::string serialize_robot(const RobotModel& model);

}  // namespace wbf
