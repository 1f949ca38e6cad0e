#include "wbf/follower.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbf {

FollowerMode follower_mode_from_string(const std::string& s) {
  if (s == "training") return FollowerMode::Training;
  if (s == "deployment") return FollowerMode::Deployment;
  throw ValidationError("unknown follower mode '" + s + "'");
}

const char* to_string(FollowerMode m) {
  return m == FollowerMode::Training ? "training" : "deployment";
}

Follower::Follower(const RobotModel& model, FollowerConfig config)
    : model_(&model), config_(config), layout_(DecisionLayout::from(model)) {
  if (config_.rate_hz <= 0.0) {
    throw ValidationError("follower rate must be positive");
  }
  if (config_.kp < 0.0 || config_.kd < 0.0) {
    throw ValidationError("tracking gains must be non-negative");
  }
  if (config_.limit_margin < 0.0) {
    throw ValidationError("limit margin must be non-negative");
  }
  const int n = model.n_joints();
  kp_ = vector_t::Constant(n, config_.kp);
  kd_ = vector_t::Constant(n, config_.kd);
  q_min_eff_ = model.joint_lower();
  q_max_eff_ = model.joint_upper();
  if (config_.hip_rom) {
    const scalar_t half = *config_.hip_rom / 2.0;
    if (half <= 0.0) throw ValidationError("hip range-of-motion must be positive");
    for (int j = 0; j < n; ++j) {
      const Link& link = model.joint_link(j);
      if (!link.hip_yaw) continue;
      q_min_eff_[j] = std::max(q_min_eff_[j], link.nominal - half);
      q_max_eff_[j] = std::min(q_max_eff_[j], link.nominal + half);
    }
  }
  // Enforce positions inside a guard band: the acceleration bounds assume the
  // planned contact forces are realized, and terrain mismatch (stance drag,
  // touchdown shocks) can push a joint a couple of degrees past the point the
  // plan would have stopped at.
  for (int j = 0; j < n; ++j) {
    const scalar_t margin =
        std::min(config_.limit_margin, 0.25 * (q_max_eff_[j] - q_min_eff_[j]));
    q_min_eff_[j] += margin;
    q_max_eff_[j] -= margin;
  }
  for (const Foot& f : model.feet) foot_radii_.push_back(f.radius);
}

void Follower::effective_joint_limits(vector_t& q_min, vector_t& q_max) const {
  q_min = q_min_eff_;
  q_max = q_max_eff_;
}

void Follower::reset() { warm_active_.clear(); }

std::vector<Task> Follower::build_tasks(const GeneralizedState& state, const vector_t& a_t,
                                        const std::vector<bool>& contact,
                                        const TerrainParams& terrain,
                                        const DynamicsTerms& dyn) const {
  if (a_t.size() != layout_.nj) {
    throw DimensionError("action target size does not match the joint count");
  }
  // More than a full turn away from the current angle is an upstream bug
  // (wrong unit, unwrapped angle), not a target the tracker should chase.
  for (int j = 0; j < layout_.nj; ++j) {
    if (!std::isfinite(a_t[j]) || std::abs(a_t[j] - state.q_j[j]) > 2.0 * M_PI) {
      throw ValidationError("action target for joint " + std::to_string(j) +
                            " is more than one turn from the current angle");
    }
  }
  std::vector<Task> tasks;
  tasks.push_back(task_dynamic_consistency(dyn, layout_));
  vector_t a_t_eff = a_t;
  if (config_.enable_kinematic_limits) {
    const scalar_t dt_h = config_.limit_horizon_ticks / config_.rate_hz;
    tasks.push_back(task_kinematic_limits(q_min_eff_, q_max_eff_, model_->joint_vel_max(),
                                          state, dt_h, layout_));
    // Track the reachable projection of the action: asking the tracker to
    // chase a target outside the enforced envelope just turns the position
    // limits into a permanent tug-of-war.
    a_t_eff = a_t_eff.cwiseMax(q_min_eff_).cwiseMin(q_max_eff_);
  }
  tasks.push_back(task_torque_limits(model_->tau_lower(), model_->tau_upper(), layout_));
  tasks.push_back(task_joint_tracking(a_t_eff, state, kp_, kd_, layout_));

  if (config_.mode == FollowerMode::Deployment) {
    tasks.push_back(task_contact_motion(dyn, contact, layout_));
    if (config_.enable_ft_interaction) {
      const scalar_t mu = config_.mu_override ? *config_.mu_override : terrain.mu;
      const scalar_t weight = model_->total_mass() * model_->gravity.norm();
      const FootForceBounds bounds =
          compute_force_bounds(terrain, foot_radii_, contact, weight, mu,
                               config_.xi_xy_max, config_.delta_max);
      tasks.push_back(task_ft_interaction(bounds, contact, layout_));
    }
    tasks.push_back(task_body_stabilization(layout_));
  }
  return tasks;
}

FollowerOutput Follower::step(const GeneralizedState& state, const vector_t& a_t,
                              const std::vector<bool>& contact,
                              const TerrainParams& terrain) {
  return step(state, a_t, contact, terrain, compute_dynamics(*model_, state));
}

FollowerOutput Follower::step(const GeneralizedState& state, const vector_t& a_t,
                              const std::vector<bool>& contact, const TerrainParams& terrain,
                              const DynamicsTerms& dyn) {
  const std::vector<Task> tasks = build_tasks(state, a_t, contact, terrain, dyn);

  HqpOptions opts;
  opts.warm_active = warm_active_;
  HqpSolution hqp = solve_hierarchy(tasks, layout_.dim(), opts);

  FollowerOutput out;
  const int n = layout_.nj;
  const vector_t tau_lo = model_->tau_lower();
  const vector_t tau_hi = model_->tau_upper();

  // A stalled lower level is survivable — the carried solution still honors
  // every constraint frozen above it. Only a failure at the top level (the
  // hard constraints) leaves no usable solution.
  const bool top_failed =
      hqp.levels.empty() || hqp.levels.front().status != QpStatus::Optimal;
  if (top_failed) {
    // Keep the robot controllable with pure joint damping until the cascade
    // recovers; the run-level budget decides whether this is fatal.
    out.fallback = true;
    out.tau = (-kd_.cwiseProduct(vector_t(state.qd_j())))
                  .cwiseMax(tau_lo)
                  .cwiseMin(tau_hi);
    out.qdd = vector_t::Zero(layout_.nv);
    out.f_grf = vector_t::Zero(3 * layout_.nc);
    out.hqp = std::move(hqp);
    warm_active_.clear();
    return out;
  }

  out.qdd = hqp.x.head(layout_.nv);
  out.f_grf = hqp.x.segment(layout_.grf_offset(), 3 * layout_.nc);
  // Clamp away solver tolerance dust; the torque task already bounds tau.
  out.tau = hqp.x.tail(n).cwiseMax(tau_lo).cwiseMin(tau_hi);

  warm_active_.clear();
  for (const LevelReport& lr : hqp.levels) warm_active_.push_back(lr.active_set);
  out.hqp = std::move(hqp);
  return out;
}

}  // namespace wbf
