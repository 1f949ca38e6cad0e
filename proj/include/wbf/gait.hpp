#pragma once

#include <vector>

#include "wbf/robot_model.hpp"

namespace wbf {

// Planar body velocity command, expressed in the body frame.
struct BodyCommand {
  scalar_t vx = 0.0;
  scalar_t vy = 0.0;
  scalar_t wz = 0.0;

  bool moving() const { return std::abs(vx) + std::abs(vy) + std::abs(wz) > 1e-9; }
};

struct GaitParams {
  scalar_t period = 0.6;       // full gait cycle [s]
  scalar_t duty = 0.5;         // stance fraction of the cycle
  scalar_t body_height = 0.28; // base origin above the feet at nominal stance
  scalar_t clearance = 0.06;   // swing apex above the ground
};

// Scripted alternating-tripod walk: odd and even feet step half a cycle
// apart. Stance feet track the commanded body motion backwards through the
// body frame; swing feet return along a quintic profile whose end velocities
// match the stance sweep, so the reference is C1 across transitions. Foot
// targets are converted to joint targets with a per-leg Newton IK.
class GaitGenerator {
 public:
  GaitGenerator(const RobotModel& model, GaitParams params);

  // Action targets a_t for all joints at time t. Stateless in t: the same
  // (t, cmd) always produces the same targets.
  vector_t joint_targets(scalar_t t, const BodyCommand& cmd) const;

  // Reference stance flag of the gait pattern (not the measured contact).
  bool stance_phase(scalar_t t, int foot) const;

  // Body-frame foot target of the pattern at time t.
  vector3_t foot_target(scalar_t t, int foot, const BodyCommand& cmd) const;

  const GaitParams& params() const { return params_; }
  const std::vector<int>& leg_joints(int foot) const {
    return legs_[static_cast<size_t>(foot)].joints;
  }

  // Body-frame position of one foot for given angles of its three leg
  // joints (all other joints at nominal).
  vector3_t leg_forward(int foot, const vector3_t& angles) const;

  // Inverse of leg_forward: joint angles placing the foot at `target`
  // (body frame). Newton iteration from the nominal posture; returns the
  // best found angles and sets `reached` (residual below 1e-10) if given.
  vector3_t leg_inverse(int foot, const vector3_t& target, bool* reached = nullptr) const;

 private:
  struct Leg {
    std::vector<int> joints;  // joint indices, base-outward order
    vector3_t nominal_foot;   // body-frame foot position at nominal posture
    scalar_t phase_offset;
  };

  const RobotModel* model_;
  GaitParams params_;
  std::vector<Leg> legs_;
};

}  // namespace wbf
