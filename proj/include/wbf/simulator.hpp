#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wbf/follower.hpp"
#include "wbf/terrain.hpp"

namespace wbf {

struct CommandSample {
  scalar_t t = 0.0;
  BodyCommand cmd;
};

struct InitOverrides {
  std::optional<scalar_t> base_z;  // default: equilibrium sinkage stance
  scalar_t joint_noise = 0.0;      // stddev of seeded perturbation on q_j
};

// A fully resolved experiment description: robot, terrain, follower setup,
// gait shape, command schedule, and integration settings.
struct Scenario {
  std::string name = "scenario";
  std::string robot_path;  // absolute after loading
  RobotModel model;
  std::string terrain_preset = "flat";
  TerrainParams terrain;
  FollowerConfig follower;
  GaitParams gait;
  std::vector<CommandSample> schedule;
  scalar_t duration = 10.0;
  scalar_t dt_phys = 0.002;
  std::uint64_t seed = 0;
  InitOverrides init;

  BodyCommand command_at(scalar_t t) const;
  // Physics steps per follower tick; throws if the rates do not nest.
  int follower_every() const;
};

Scenario load_scenario(const std::string& path);
// Round-trippable text form (robot referenced by absolute path).
std::string serialize_scenario(const Scenario& s);

// One physics tick of logged state: everything the analysis and the CSV
// export need. State quantities are pre-integration (time t).
struct TickLog {
  scalar_t t = 0.0;
  BodyCommand cmd;
  vector3_t base_pos = vector3_t::Zero();
  quaternion_t base_quat = quaternion_t::Identity();
  vector_t q_j, v, tau, f_grf, foot_pos, a_t;
  std::vector<bool> contact;
};

struct Trajectory {
  std::vector<std::string> joint_names;
  std::vector<std::string> foot_names;
  scalar_t dt = 0.0;
  std::vector<TickLog> ticks;
};

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
Trajectory read_trajectory_csv(std::istream& is);

struct SafetyThresholds {
  scalar_t slip = 0.04;          // per-stance slip path length [m]
  scalar_t torque = 20.0;        // |tau| event threshold [Nm]
  scalar_t torque_rearm = 0.95;  // hysteresis fraction
  scalar_t joint_margin = 1e-3;  // tolerated excursion past a limit [rad]
  int debounce_ticks = 15;       // contact flips shorter than this are chatter
};

struct StanceSegment {
  int foot = 0;
  scalar_t t_begin = 0.0;
  scalar_t t_end = 0.0;
  scalar_t slip = 0.0;  // horizontal foot path length while planted
  // Forward distance gained over the stance minus the foot slip spent on it:
  // base displacement along the commanded heading, with the scrubbed path
  // subtracted. Negative when the foot skated more than the base advanced.
  scalar_t effective_step = 0.0;
};

struct SafetyReport {
  int slip_events = 0;
  int torque_events = 0;
  int kinematic_events = 0;
  int stance_count = 0;
  scalar_t mean_slip = 0.0;
  scalar_t max_slip = 0.0;
  scalar_t max_abs_torque = 0.0;
  scalar_t effective_step_length = 0.0;  // mean effective_step over moving stances
  scalar_t rms_tracking_error = 0.0;
  int fallback_ticks = 0;   // filled by the run loop, not by analysis
  int follower_ticks = 0;
  std::vector<StanceSegment> stances;

  std::string to_text() const;  // structured text, parseable
};
SafetyReport parse_safety_text(const std::string& text);

// Recomputes the trajectory-derivable safety metrics (everything except the
// fallback counters).
SafetyReport analyze_trajectory(const Trajectory& traj, const RobotModel& model,
                                const SafetyThresholds& thresholds = {});

enum class RunStatus {
  Ok = 0,
  ConfigError = 2,
  Divergence = 3,
  SolverBudget = 4,
};

struct RunResult {
  RunStatus status = RunStatus::Ok;
  std::string message;
  Trajectory trajectory;
  SafetyReport safety;
};

// Observation hook invoked after every follower tick (before integration):
// physics tick index, pre-integration state, per-foot contact bookkeeping,
// and the follower's solution. Used by tests and studies to inspect the
// cascade without re-deriving the rollout.
using FollowerProbe = std::function<void(
    int tick, const GeneralizedState& state, const std::vector<FootContact>& contacts,
    const FollowerOutput& out)>;

// Closed-loop rollout: terramechanics contacts -> follower torques ->
// forward dynamics -> semi-implicit integration (trapezoidal in position).
// Aborts on numerical divergence or when more than 1% of follower ticks
// fall back.
RunResult run_scenario(const Scenario& scenario, const FollowerProbe& probe = {});

}  // namespace wbf
