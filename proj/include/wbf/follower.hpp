#pragma once

#include <optional>
#include <vector>

#include "wbf/gait.hpp"
#include "wbf/wbc_tasks.hpp"

namespace wbf {

// Training mode keeps only the non-negotiable constraints and the tracking
// objective (priorities 0-1); deployment adds the contact-consistency and
// body-stabilization layers (priorities 0-3).
enum class FollowerMode { Training, Deployment };

FollowerMode follower_mode_from_string(const std::string& s);
const char* to_string(FollowerMode m);

struct FollowerConfig {
  FollowerMode mode = FollowerMode::Deployment;
  scalar_t rate_hz = 500.0;
  // Stiff tracking, near critical damping: the tracking task has no
  // acceleration feedforward, so the stiffness alone must keep the lag small
  // against the gait's peak reference accelerations.
  scalar_t kp = 2000.0;
  scalar_t kd = 90.0;
  // Look-ahead horizon of the kinematic-limit task, in control periods.
  scalar_t limit_horizon_ticks = 10.0;
  // Friction coefficient assumed by the force constraints; defaults to the
  // terrain's true value when unset (study knob).
  std::optional<scalar_t> mu_override;
  // Full width of a symmetric hip range-of-motion restriction around each
  // hip joint's nominal angle (study knob).
  std::optional<scalar_t> hip_rom;
  scalar_t limit_margin = 0.03;  // guard band inside the position limits [rad]
  scalar_t xi_xy_max = 0.005;  // shear displacement budget for force bounds
  scalar_t delta_max = 0.02;   // sinkage budget for force bounds
  bool enable_kinematic_limits = true;  // study baseline switch
  bool enable_ft_interaction = true;    // study baseline switch
};

struct FollowerOutput {
  vector_t tau;    // clamped to the actuator limits
  vector_t qdd;    // solved generalized accelerations
  vector_t f_grf;  // solved contact forces (stacked per foot)
  bool fallback = false;  // cascade failed; pure joint damping applied
  HqpSolution hqp;
};

// Whole-body follower: converts joint-space action targets into torques by
// solving the prioritized task cascade on the current dynamics.
class Follower {
 public:
  Follower(const RobotModel& model, FollowerConfig config);

  FollowerOutput step(const GeneralizedState& state, const vector_t& a_t,
                      const std::vector<bool>& contact, const TerrainParams& terrain);

  // Same, but reusing dynamics terms the caller already computed for `state`.
  FollowerOutput step(const GeneralizedState& state, const vector_t& a_t,
                      const std::vector<bool>& contact, const TerrainParams& terrain,
                      const DynamicsTerms& dyn);

  // The task stack the given situation produces (what `step` solves);
  // exposed so tests can inspect the mode structure.
  std::vector<Task> build_tasks(const GeneralizedState& state, const vector_t& a_t,
                                const std::vector<bool>& contact,
                                const TerrainParams& terrain,
                                const DynamicsTerms& dyn) const;

  // Joint position limits with the hip range-of-motion override applied.
  void effective_joint_limits(vector_t& q_min, vector_t& q_max) const;

  const FollowerConfig& config() const { return config_; }
  const DecisionLayout& layout() const { return layout_; }
  const RobotModel& model() const { return *model_; }

  // Forgets the warm-start hints (e.g. after a state reset).
  void reset();

 private:
  const RobotModel* model_;
  FollowerConfig config_;
  DecisionLayout layout_;
  vector_t kp_, kd_;
  vector_t q_min_eff_, q_max_eff_;
  std::vector<scalar_t> foot_radii_;
  std::vector<std::vector<int>> warm_active_;
};

}  // namespace wbf
