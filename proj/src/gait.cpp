#include "wbf/gait.hpp"

#include <cmath>

#include "wbf/dynamics.hpp"

namespace wbf {

namespace {

scalar_t fractional(scalar_t x) { return x - std::floor(x); }

// Quintic swing interpolant: beta(0)=0, beta(1)=1, with end slopes matching
// the backward stance sweep (-1 in normalized time for equal stance/swing
// duration scaled by `slope`), zero end curvature.
scalar_t swing_blend(scalar_t s, scalar_t slope) {
  const scalar_t s2 = s * s;
  const scalar_t s3 = s2 * s;
  const scalar_t s4 = s3 * s;
  const scalar_t s5 = s4 * s;
  const scalar_t h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;   // unit start slope
  const scalar_t h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;     // unit end value
  const scalar_t h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;      // unit end slope
  return h3 - slope * (h1 + h4);
}

}  // namespace

GaitGenerator::GaitGenerator(const RobotModel& model, GaitParams params)
    : model_(&model), params_(params) {
  if (params_.period <= 0.0 || params_.duty <= 0.0 || params_.duty >= 1.0) {
    throw ValidationError("gait period must be positive and duty inside (0, 1)");
  }
  GeneralizedState neutral = GeneralizedState::neutral(model);
  const auto kin = forward_kinematics(model, neutral);

  for (int f = 0; f < model.n_feet(); ++f) {
    Leg leg;
    int li = model.feet[static_cast<size_t>(f)].link;
    while (li > 0) {
      leg.joints.push_back(li - 1);
      li = model.links[static_cast<size_t>(li)].parent;
    }
    std::reverse(leg.joints.begin(), leg.joints.end());
    if (leg.joints.size() != 3) {
      throw ValidationError("foot '" + model.feet[static_cast<size_t>(f)].name +
                            "': the gait needs exactly 3 joints per leg");
    }
    const Foot& foot = model.feet[static_cast<size_t>(f)];
    const LinkKinematics& k = kin[static_cast<size_t>(foot.link)];
    leg.nominal_foot = k.origin + k.rot * foot.offset;  // base at identity
    leg.phase_offset = (f % 2 == 0) ? 0.0 : 0.5;
    legs_.push_back(std::move(leg));
  }
}

bool GaitGenerator::stance_phase(scalar_t t, int foot) const {
  const Leg& leg = legs_[static_cast<size_t>(foot)];
  const scalar_t s = fractional(t / params_.period + leg.phase_offset);
  return s < params_.duty;
}

vector3_t GaitGenerator::foot_target(scalar_t t, int foot, const BodyCommand& cmd) const {
  const Leg& leg = legs_[static_cast<size_t>(foot)];
  if (!cmd.moving()) {
    return leg.nominal_foot;
  }
  const scalar_t s = fractional(t / params_.period + leg.phase_offset);
  const scalar_t t_stance = params_.duty * params_.period;

  // Body displacement over one stance, seen from the foot: the stance foot
  // must sweep backward by the commanded translation plus the yaw-induced
  // motion at its station.
  const vector3_t station = leg.nominal_foot;
  vector3_t stride(cmd.vx + cmd.wz * -station.y(), cmd.vy + cmd.wz * station.x(), 0.0);
  stride *= t_stance;

  vector3_t p = station;
  if (s < params_.duty) {
    const scalar_t sigma = s / params_.duty;
    p -= (sigma - 0.5) * stride;
  } else {
    const scalar_t sigma = (s - params_.duty) / (1.0 - params_.duty);
    // End slopes continue the stance sweep; scale converts stance speed to
    // swing-normalized time.
    const scalar_t slope = (1.0 - params_.duty) / params_.duty;
    p += (swing_blend(sigma, slope) - 0.5) * stride;
    const scalar_t sz = std::sin(M_PI * sigma);
    p.z() += params_.clearance * sz * sz;
  }
  return p;
}

vector3_t GaitGenerator::leg_forward(int foot, const vector3_t& angles) const {
  const RobotModel& model = *model_;
  const Foot& ft = model.feet[static_cast<size_t>(foot)];
  const Leg& leg = legs_[static_cast<size_t>(foot)];

  matrix3_t rot = matrix3_t::Identity();
  vector3_t pos = vector3_t::Zero();
  for (size_t k = 0; k < leg.joints.size(); ++k) {
    const Link& link = model.joint_link(leg.joints[k]);
    pos += rot * link.origin;
    rot = rot * link.fixed_rot * Eigen::AngleAxisd(angles[static_cast<int>(k)], link.axis);
  }
  return pos + rot * ft.offset;
}

vector3_t GaitGenerator::leg_inverse(int foot, const vector3_t& target, bool* reached) const {
  const Leg& leg = legs_[static_cast<size_t>(foot)];
  vector3_t q;
  for (int k = 0; k < 3; ++k) q[k] = model_->joint_link(leg.joints[static_cast<size_t>(k)]).nominal;

  vector3_t err = leg_forward(foot, q) - target;
  const scalar_t fd_step = 1e-7;
  for (int it = 0; it < 60 && err.norm() > 1e-12; ++it) {
    matrix3_t jac;
    for (int k = 0; k < 3; ++k) {
      vector3_t qp = q, qm = q;
      qp[k] += fd_step;
      qm[k] -= fd_step;
      jac.col(k) = (leg_forward(foot, qp) - leg_forward(foot, qm)) / (2.0 * fd_step);
    }
    const matrix3_t damped = jac.transpose() * jac + 1e-10 * matrix3_t::Identity();
    vector3_t step = damped.ldlt().solve(jac.transpose() * err);
    // Backtrack if the full Newton step overshoots (near-singular poses).
    for (int bt = 0; bt < 8; ++bt) {
      const vector3_t q_try = q - step;
      const vector3_t err_try = leg_forward(foot, q_try) - target;
      if (err_try.norm() < err.norm() || bt == 7) {
        q = q_try;
        err = err_try;
        break;
      }
      step *= 0.5;
    }
  }
  if (reached != nullptr) *reached = err.norm() < 1e-10;
  return q;
}

vector_t GaitGenerator::joint_targets(scalar_t t, const BodyCommand& cmd) const {
  vector_t a_t = model_->nominal_posture();
  for (int f = 0; f < model_->n_feet(); ++f) {
    const vector3_t q = leg_inverse(f, foot_target(t, f, cmd));
    const Leg& leg = legs_[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) a_t[leg.joints[static_cast<size_t>(k)]] = q[k];
  }
  return a_t;
}

}  // namespace wbf
