#include "wbf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "wbf/dynamics.hpp"

namespace wbf {

namespace {

scalar_t deg2rad(scalar_t d) { return d * M_PI / 180.0; }

std::string csv_num(scalar_t v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

BodyCommand Scenario::command_at(scalar_t t) const {
  BodyCommand cmd;
  for (const CommandSample& s : schedule) {
    if (s.t <= t + 1e-12) {
      cmd = s.cmd;
    } else {
      break;
    }
  }
  return cmd;
}

int Scenario::follower_every() const {
  const scalar_t ratio = 1.0 / (follower.rate_hz * dt_phys);
  const int k = static_cast<int>(std::lround(ratio));
  if (k < 1 || std::abs(ratio - k) > 1e-6) {
    throw ValidationError("follower rate " + std::to_string(follower.rate_hz) +
                          " Hz does not divide the physics step " +
                          std::to_string(dt_phys) + " s into whole ticks");
  }
  return k;
}

Scenario load_scenario(const std::string& path) {
  const ConfigNode root = load_config_file(path);
  if (root.get_int("schema_version", -1) != 1) {
    throw ValidationError(path + ": schema_version must be 1");
  }
  Scenario s;
  s.name = root.get_string("name", std::filesystem::path(path).stem().string());
  const std::string robot_rel = root.require_string("robot");
  std::filesystem::path rp(robot_rel);
  if (rp.is_relative()) {
    rp = std::filesystem::absolute(std::filesystem::path(path).parent_path() / rp);
  }
  s.robot_path = rp.string();
  s.model = load_robot(s.robot_path);
  s.duration = root.get_scalar("duration", s.duration);
  s.dt_phys = root.get_scalar("dt_phys", s.dt_phys);
  if (s.duration <= 0.0 || s.dt_phys <= 0.0) {
    throw ValidationError(path + ": duration and dt_phys must be positive");
  }
  s.seed = static_cast<std::uint64_t>(root.get_int("seed", 0));

  if (const ConfigNode* t = root.section("terrain")) {
    s.terrain_preset = t->get_string("preset", "flat");
    s.terrain = terrain_preset(s.terrain_preset);
    s.terrain.k_c = t->get_scalar("k_c", s.terrain.k_c);
    s.terrain.k_phi = t->get_scalar("k_phi", s.terrain.k_phi);
    s.terrain.m = t->get_scalar("m", s.terrain.m);
    s.terrain.b_N = t->get_scalar("b_N", s.terrain.b_N);
    s.terrain.a = t->get_scalar("a", s.terrain.a);
    s.terrain.mu = t->get_scalar("mu", s.terrain.mu);
    s.terrain.K = t->get_scalar("K", s.terrain.K);
    s.terrain.b_T = t->get_scalar("b_T", s.terrain.b_T);
    if (t->has("slope_angle_deg")) {
      s.terrain.ground.slope_angle = deg2rad(t->require_scalar("slope_angle_deg"));
    }
    if (t->has("stair_rise")) s.terrain.ground.stair_rise = t->require_scalar("stair_rise");
    if (t->has("stair_run")) s.terrain.ground.stair_run = t->require_scalar("stair_run");
    if (s.terrain.m <= 0.0 || s.terrain.K <= 0.0) {
      throw ValidationError(path + ": terrain m and K must be positive");
    }
  } else {
    s.terrain = terrain_preset(s.terrain_preset);
  }

  if (const ConfigNode* f = root.section("follower")) {
    s.follower.mode = follower_mode_from_string(f->get_string("mode", "deployment"));
    s.follower.rate_hz = f->get_scalar("rate_hz", s.follower.rate_hz);
    s.follower.kp = f->get_scalar("kp", s.follower.kp);
    s.follower.kd = f->get_scalar("kd", s.follower.kd);
    s.follower.limit_horizon_ticks =
        f->get_scalar("limit_horizon_ticks", s.follower.limit_horizon_ticks);
    if (auto mu = f->maybe_scalar("mu_override")) s.follower.mu_override = *mu;
    if (auto rom = f->maybe_scalar("hip_rom")) s.follower.hip_rom = *rom;
    if (auto romd = f->maybe_scalar("hip_rom_deg")) s.follower.hip_rom = deg2rad(*romd);
    s.follower.limit_margin = f->get_scalar("limit_margin", s.follower.limit_margin);
    s.follower.xi_xy_max = f->get_scalar("xi_xy_max", s.follower.xi_xy_max);
    s.follower.delta_max = f->get_scalar("delta_max", s.follower.delta_max);
    s.follower.enable_kinematic_limits =
        f->get_bool("kinematic_limits", s.follower.enable_kinematic_limits);
    s.follower.enable_ft_interaction =
        f->get_bool("ft_interaction", s.follower.enable_ft_interaction);
  }

  if (const ConfigNode* g = root.section("gait")) {
    s.gait.period = g->get_scalar("period", s.gait.period);
    s.gait.duty = g->get_scalar("duty", s.gait.duty);
    s.gait.body_height = g->get_scalar("body_height", s.gait.body_height);
    s.gait.clearance = g->get_scalar("clearance", s.gait.clearance);
  }

  for (const ConfigNode* c : root.sections("command")) {
    CommandSample cs;
    cs.t = c->get_scalar("t", 0.0);
    cs.cmd.vx = c->get_scalar("vx", 0.0);
    cs.cmd.vy = c->get_scalar("vy", 0.0);
    cs.cmd.wz = c->get_scalar("wz", 0.0);
    if (!s.schedule.empty() && cs.t < s.schedule.back().t) {
      throw ValidationError(path + ": command samples must be in ascending time order");
    }
    s.schedule.push_back(cs);
  }

  if (const ConfigNode* i = root.section("init")) {
    if (auto z = i->maybe_scalar("base_z")) s.init.base_z = *z;
    s.init.joint_noise = i->get_scalar("joint_noise", 0.0);
  }
  s.follower_every();  // validate rate layering early
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  ConfigWriter w;
  w.entry("schema_version", 1L);
  w.entry("name", s.name);
  w.entry("robot", s.robot_path);
  w.entry("duration", s.duration);
  w.entry("dt_phys", s.dt_phys);
  w.entry("seed", static_cast<long>(s.seed));
  w.blank();
  w.open("terrain");
  w.entry("preset", s.terrain_preset);
  w.entry("k_c", s.terrain.k_c);
  w.entry("k_phi", s.terrain.k_phi);
  w.entry("m", s.terrain.m);
  w.entry("b_N", s.terrain.b_N);
  w.entry("a", s.terrain.a);
  w.entry("mu", s.terrain.mu);
  w.entry("K", s.terrain.K);
  w.entry("b_T", s.terrain.b_T);
  if (s.terrain.ground.kind == GroundProfile::Kind::Slope) {
    w.entry("slope_angle_deg", s.terrain.ground.slope_angle * 180.0 / M_PI);
  } else if (s.terrain.ground.kind == GroundProfile::Kind::Stairs) {
    w.entry("stair_rise", s.terrain.ground.stair_rise);
    w.entry("stair_run", s.terrain.ground.stair_run);
  }
  w.close();
  w.blank();
  w.open("follower");
  w.entry("mode", std::string(to_string(s.follower.mode)));
  w.entry("rate_hz", s.follower.rate_hz);
  w.entry("kp", s.follower.kp);
  w.entry("kd", s.follower.kd);
  w.entry("limit_horizon_ticks", s.follower.limit_horizon_ticks);
  if (s.follower.mu_override) w.entry("mu_override", *s.follower.mu_override);
  if (s.follower.hip_rom) w.entry("hip_rom", *s.follower.hip_rom);
  w.entry("limit_margin", s.follower.limit_margin);
  w.entry("xi_xy_max", s.follower.xi_xy_max);
  w.entry("delta_max", s.follower.delta_max);
  w.entry("kinematic_limits", std::string(s.follower.enable_kinematic_limits ? "true" : "false"));
  w.entry("ft_interaction", std::string(s.follower.enable_ft_interaction ? "true" : "false"));
  w.close();
  w.blank();
  w.open("gait");
  w.entry("period", s.gait.period);
  w.entry("duty", s.gait.duty);
  w.entry("body_height", s.gait.body_height);
  w.entry("clearance", s.gait.clearance);
  w.close();
  for (const CommandSample& c : s.schedule) {
    w.blank();
    w.open("command");
    w.entry("t", c.t);
    w.entry("vx", c.cmd.vx);
    w.entry("vy", c.cmd.vy);
    w.entry("wz", c.cmd.wz);
    w.close();
  }
  w.blank();
  w.open("init");
  if (s.init.base_z) w.entry("base_z", *s.init.base_z);
  w.entry("joint_noise", s.init.joint_noise);
  w.close();
  return w.str();
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  const auto& jn = traj.joint_names;
  const auto& fn = traj.foot_names;
  os << "t,cmd_vx,cmd_vy,cmd_wz,base_x,base_y,base_z,quat_w,quat_x,quat_y,quat_z";
  for (const auto& j : jn) os << ",q_" << j;
  os << ",vb_x,vb_y,vb_z,wb_x,wb_y,wb_z";
  for (const auto& j : jn) os << ",qd_" << j;
  for (const auto& j : jn) os << ",tau_" << j;
  for (const auto& f : fn) os << ",f_" << f << "_x,f_" << f << "_y,f_" << f << "_z";
  for (const auto& f : fn) os << ",p_" << f << "_x,p_" << f << "_y,p_" << f << "_z";
  for (const auto& f : fn) os << ",contact_" << f;
  for (const auto& j : jn) os << ",at_" << j;
  os << "\n";
  const int n = static_cast<int>(jn.size());
  const int c = static_cast<int>(fn.size());
  for (const TickLog& k : traj.ticks) {
    os << csv_num(k.t) << ',' << csv_num(k.cmd.vx) << ',' << csv_num(k.cmd.vy) << ','
       << csv_num(k.cmd.wz);
    for (int i = 0; i < 3; ++i) os << ',' << csv_num(k.base_pos[i]);
    os << ',' << csv_num(k.base_quat.w()) << ',' << csv_num(k.base_quat.x()) << ','
       << csv_num(k.base_quat.y()) << ',' << csv_num(k.base_quat.z());
    for (int i = 0; i < n; ++i) os << ',' << csv_num(k.q_j[i]);
    for (int i = 0; i < 6; ++i) os << ',' << csv_num(k.v[i]);
    for (int i = 0; i < n; ++i) os << ',' << csv_num(k.v[6 + i]);
    for (int i = 0; i < n; ++i) os << ',' << csv_num(k.tau[i]);
    for (int i = 0; i < 3 * c; ++i) os << ',' << csv_num(k.f_grf[i]);
    for (int i = 0; i < 3 * c; ++i) os << ',' << csv_num(k.foot_pos[i]);
    for (int i = 0; i < c; ++i) os << ',' << (k.contact[static_cast<size_t>(i)] ? 1 : 0);
    for (int i = 0; i < n; ++i) os << ',' << csv_num(k.a_t[i]);
    os << "\n";
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("trajectory csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  for (const auto& h : header) {
    if (h.rfind("q_", 0) == 0) traj.joint_names.push_back(h.substr(2));
    if (h.rfind("contact_", 0) == 0) traj.foot_names.push_back(h.substr(8));
  }
  const int n = static_cast<int>(traj.joint_names.size());
  const int c = static_cast<int>(traj.foot_names.size());
  const size_t expected = 11 + 4 * static_cast<size_t>(n) + 6 + 7 * static_cast<size_t>(c);
  if (header.size() != expected) {
    throw ParseError("trajectory csv: unexpected column count " + std::to_string(header.size()));
  }
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<scalar_t> vals;
    vals.reserve(expected);
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) vals.push_back(std::strtod(tok.c_str(), nullptr));
    if (vals.size() != expected) {
      throw ParseError("trajectory csv:" + std::to_string(lineno) + ": bad column count");
    }
    TickLog k;
    size_t i = 0;
    k.t = vals[i++];
    k.cmd.vx = vals[i++];
    k.cmd.vy = vals[i++];
    k.cmd.wz = vals[i++];
    for (int d = 0; d < 3; ++d) k.base_pos[d] = vals[i++];
    {
      const scalar_t w = vals[i++], x = vals[i++], y = vals[i++], z = vals[i++];
      k.base_quat = quaternion_t(w, x, y, z);
    }
    k.q_j.resize(n);
    for (int d = 0; d < n; ++d) k.q_j[d] = vals[i++];
    k.v.resize(6 + n);
    for (int d = 0; d < 6 + n; ++d) k.v[d] = vals[i++];
    k.tau.resize(n);
    for (int d = 0; d < n; ++d) k.tau[d] = vals[i++];
    k.f_grf.resize(3 * c);
    for (int d = 0; d < 3 * c; ++d) k.f_grf[d] = vals[i++];
    k.foot_pos.resize(3 * c);
    for (int d = 0; d < 3 * c; ++d) k.foot_pos[d] = vals[i++];
    k.contact.resize(static_cast<size_t>(c));
    for (int d = 0; d < c; ++d) k.contact[static_cast<size_t>(d)] = vals[i++] != 0.0;
    k.a_t.resize(n);
    for (int d = 0; d < n; ++d) k.a_t[d] = vals[i++];
    traj.ticks.push_back(std::move(k));
  }
  if (traj.ticks.size() >= 2) traj.dt = traj.ticks[1].t - traj.ticks[0].t;
  return traj;
}

std::string SafetyReport::to_text() const {
  ConfigWriter w;
  w.entry("schema_version", 1L);
  w.entry("slip_events", static_cast<long>(slip_events));
  w.entry("torque_events", static_cast<long>(torque_events));
  w.entry("kinematic_events", static_cast<long>(kinematic_events));
  w.entry("stance_count", static_cast<long>(stance_count));
  w.entry("mean_slip", mean_slip);
  w.entry("max_slip", max_slip);
  w.entry("max_abs_torque", max_abs_torque);
  w.entry("effective_step_length", effective_step_length);
  w.entry("rms_tracking_error", rms_tracking_error);
  w.entry("fallback_ticks", static_cast<long>(fallback_ticks));
  w.entry("follower_ticks", static_cast<long>(follower_ticks));
  for (const StanceSegment& s : stances) {
    w.open("stance");
    w.entry("foot", static_cast<long>(s.foot));
    w.entry("t_begin", s.t_begin);
    w.entry("t_end", s.t_end);
    w.entry("slip", s.slip);
    w.entry("effective_step", s.effective_step);
    w.close();
  }
  return w.str();
}

SafetyReport parse_safety_text(const std::string& text) {
  const ConfigNode root = parse_config_text(text, "<safety>");
  SafetyReport r;
  r.slip_events = static_cast<int>(root.get_int("slip_events", 0));
  r.torque_events = static_cast<int>(root.get_int("torque_events", 0));
  r.kinematic_events = static_cast<int>(root.get_int("kinematic_events", 0));
  r.stance_count = static_cast<int>(root.get_int("stance_count", 0));
  r.mean_slip = root.get_scalar("mean_slip", 0.0);
  r.max_slip = root.get_scalar("max_slip", 0.0);
  r.max_abs_torque = root.get_scalar("max_abs_torque", 0.0);
  r.effective_step_length = root.get_scalar("effective_step_length", 0.0);
  r.rms_tracking_error = root.get_scalar("rms_tracking_error", 0.0);
  r.fallback_ticks = static_cast<int>(root.get_int("fallback_ticks", 0));
  r.follower_ticks = static_cast<int>(root.get_int("follower_ticks", 0));
  for (const ConfigNode* s : root.sections("stance")) {
    StanceSegment seg;
    seg.foot = static_cast<int>(s->get_int("foot", 0));
    seg.t_begin = s->get_scalar("t_begin", 0.0);
    seg.t_end = s->get_scalar("t_end", 0.0);
    seg.slip = s->get_scalar("slip", 0.0);
    seg.effective_step = s->get_scalar("effective_step", 0.0);
    r.stances.push_back(seg);
  }
  return r;
}

SafetyReport analyze_trajectory(const Trajectory& traj, const RobotModel& model,
                                const SafetyThresholds& th) {
  SafetyReport rep;
  const int nt = static_cast<int>(traj.ticks.size());
  if (nt == 0) return rep;
  const int nf = static_cast<int>(traj.foot_names.size());
  const int n = static_cast<int>(traj.joint_names.size());

  // Debounced contact streams: a flip must persist for `debounce_ticks`
  // samples before the effective state follows it.
  std::vector<std::vector<char>> stable(static_cast<size_t>(nf),
                                        std::vector<char>(static_cast<size_t>(nt), 0));
  for (int f = 0; f < nf; ++f) {
    bool state = traj.ticks[0].contact[static_cast<size_t>(f)];
    int run = 0;
    for (int k = 0; k < nt; ++k) {
      const bool raw = traj.ticks[static_cast<size_t>(k)].contact[static_cast<size_t>(f)];
      if (raw != state) {
        if (++run >= th.debounce_ticks) {
          state = raw;
          run = 0;
        }
      } else {
        run = 0;
      }
      stable[static_cast<size_t>(f)][static_cast<size_t>(k)] = state ? 1 : 0;
    }
  }

  scalar_t slip_sum = 0.0;
  scalar_t step_sum = 0.0;
  int step_count = 0;
  for (int f = 0; f < nf; ++f) {
    int k = 0;
    while (k < nt) {
      if (!stable[static_cast<size_t>(f)][static_cast<size_t>(k)]) {
        ++k;
        continue;
      }
      int end = k;
      while (end + 1 < nt && stable[static_cast<size_t>(f)][static_cast<size_t>(end) + 1]) ++end;

      StanceSegment seg;
      seg.foot = f;
      seg.t_begin = traj.ticks[static_cast<size_t>(k)].t;
      seg.t_end = traj.ticks[static_cast<size_t>(end)].t;
      // Per-tick accumulation: full slip path for the safety metrics, and —
      // over the ticks where the command is in motion — base advance along
      // the commanded heading with the slip spent on those ticks subtracted.
      scalar_t advance = 0.0;
      scalar_t slip_moving = 0.0;
      bool any_moving = false;
      for (int i = k; i < end; ++i) {
        const TickLog& k0 = traj.ticks[static_cast<size_t>(i)];
        const TickLog& k1 = traj.ticks[static_cast<size_t>(i) + 1];
        const scalar_t dx = k1.foot_pos[3 * f] - k0.foot_pos[3 * f];
        const scalar_t dy = k1.foot_pos[3 * f + 1] - k0.foot_pos[3 * f + 1];
        const scalar_t slip_step = std::sqrt(dx * dx + dy * dy);
        seg.slip += slip_step;
        if (k0.cmd.moving() && std::hypot(k0.cmd.vx, k0.cmd.vy) > 1e-9) {
          any_moving = true;
          const matrix3_t r0 = k0.base_quat.toRotationMatrix();
          const scalar_t yaw = std::atan2(r0(1, 0), r0(0, 0));
          Eigen::Vector2d dir(k0.cmd.vx, k0.cmd.vy);
          dir.normalize();
          const Eigen::Vector2d dir_w(std::cos(yaw) * dir.x() - std::sin(yaw) * dir.y(),
                                      std::sin(yaw) * dir.x() + std::cos(yaw) * dir.y());
          const Eigen::Vector2d dp(k1.base_pos.x() - k0.base_pos.x(),
                                   k1.base_pos.y() - k0.base_pos.y());
          advance += dp.dot(dir_w);
          slip_moving += slip_step;
        }
      }
      if (any_moving) {
        seg.effective_step = advance - slip_moving;
        step_sum += seg.effective_step;
        ++step_count;
      }
      slip_sum += seg.slip;
      rep.max_slip = std::max(rep.max_slip, seg.slip);
      if (seg.slip > th.slip) ++rep.slip_events;
      rep.stances.push_back(seg);
      k = end + 1;
    }
  }
  rep.stance_count = static_cast<int>(rep.stances.size());
  rep.mean_slip = rep.stance_count > 0 ? slip_sum / rep.stance_count : 0.0;
  rep.effective_step_length = step_count > 0 ? step_sum / step_count : 0.0;

  // Torque events: per-joint hysteresis, re-armed below the rearm fraction.
  std::vector<char> armed(static_cast<size_t>(n), 1);
  for (const TickLog& k : traj.ticks) {
    for (int j = 0; j < n; ++j) {
      const scalar_t a = std::abs(k.tau[j]);
      rep.max_abs_torque = std::max(rep.max_abs_torque, a);
      if (armed[static_cast<size_t>(j)] && a > th.torque) {
        ++rep.torque_events;
        armed[static_cast<size_t>(j)] = 0;
      } else if (!armed[static_cast<size_t>(j)] && a < th.torque_rearm * th.torque) {
        armed[static_cast<size_t>(j)] = 1;
      }
    }
  }

  // Kinematic events: joint positions past their mechanical limits by more
  // than the margin.
  const vector_t q_lo = model.joint_lower();
  const vector_t q_hi = model.joint_upper();
  std::vector<char> inside(static_cast<size_t>(n), 1);
  for (const TickLog& k : traj.ticks) {
    for (int j = 0; j < n; ++j) {
      const bool out = k.q_j[j] < q_lo[j] - th.joint_margin || k.q_j[j] > q_hi[j] + th.joint_margin;
      if (out && inside[static_cast<size_t>(j)]) {
        ++rep.kinematic_events;
        inside[static_cast<size_t>(j)] = 0;
      } else if (!out) {
        inside[static_cast<size_t>(j)] = 1;
      }
    }
  }

  scalar_t err_sq = 0.0;
  for (const TickLog& k : traj.ticks) {
    err_sq += (k.q_j - k.a_t).squaredNorm();
  }
  rep.rms_tracking_error = std::sqrt(err_sq / (static_cast<scalar_t>(nt) * n));
  return rep;
}

RunResult run_scenario(const Scenario& scenario, const FollowerProbe& probe) {
  const RobotModel& model = scenario.model;
  const int n = model.n_joints();
  const int nc = model.n_feet();
  const int every = scenario.follower_every();
  const scalar_t dt = scenario.dt_phys;
  const int n_ticks = static_cast<int>(std::lround(scenario.duration / dt));
  const int planned_follower_ticks = (n_ticks + every - 1) / every;

  Follower follower(model, scenario.follower);
  GaitGenerator gait(model, scenario.gait);

  GeneralizedState state = GeneralizedState::neutral(model);
  if (scenario.init.joint_noise > 0.0) {
    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<scalar_t> dist(0.0, scenario.init.joint_noise);
    for (int j = 0; j < n; ++j) {
      const Link& l = model.joint_link(j);
      state.q_j[j] = std::clamp(state.q_j[j] + dist(rng), l.q_min, l.q_max);
    }
  }
  if (scenario.init.base_z) {
    state.base_pos.z() = *scenario.init.base_z;
  } else {
    // Start with every foot at its static sinkage so the stance is already
    // in equilibrium.
    scalar_t mean_radius = 0.0;
    for (const Foot& f : model.feet) mean_radius += f.radius;
    mean_radius /= std::max(1, nc);
    const scalar_t load = model.total_mass() * model.gravity.norm() / std::max(1, nc);
    const scalar_t sink = equilibrium_sinkage(scenario.terrain, mean_radius, load);
    state.base_pos.z() =
        scenario.gait.body_height - sink + scenario.terrain.ground.height(0.0, 0.0);
  }

  RunResult result;
  Trajectory& traj = result.trajectory;
  traj.dt = dt;
  for (int j = 0; j < n; ++j) traj.joint_names.push_back(model.joint_link(j).name);
  for (const Foot& f : model.feet) traj.foot_names.push_back(f.name);
  traj.ticks.reserve(static_cast<size_t>(n_ticks));

  std::vector<FootContact> contacts(static_cast<size_t>(nc));
  vector_t tau_hold = vector_t::Zero(n);
  vector_t a_t = model.nominal_posture();
  int fallback_ticks = 0;
  int follower_ticks = 0;

  for (int tick = 0; tick < n_ticks; ++tick) {
    const scalar_t t = tick * dt;
    const BodyCommand cmd = scenario.command_at(t);
    const DynamicsTerms terms = compute_dynamics(model, state);

    vector_t f_grf = vector_t::Zero(3 * nc);
    std::vector<bool> flags(static_cast<size_t>(nc), false);
    std::vector<bool> support(static_cast<size_t>(nc), false);
    for (int i = 0; i < nc; ++i) {
      const vector3_t fp = terms.foot_pos.segment<3>(3 * i);
      const vector3_t fv = terms.foot_vel.segment<3>(3 * i);
      contacts[static_cast<size_t>(i)] =
          update_contact(scenario.terrain, contacts[static_cast<size_t>(i)], fp, fv, dt);
      const ContactForce cf = contact_force(
          scenario.terrain, model.feet[static_cast<size_t>(i)].radius,
          contacts[static_cast<size_t>(i)], fp);
      f_grf.segment<3>(3 * i) = cf.force;
      flags[static_cast<size_t>(i)] = contacts[static_cast<size_t>(i)].active;
      // The follower treats a foot as support only when the gait plans it as
      // stance AND the soil actually carries it; a lifting foot must not be
      // counted on for force, and a landing foot not constrained before it
      // touches.
      const bool planned = cmd.moving() ? gait.stance_phase(t, i) : true;
      support[static_cast<size_t>(i)] = planned && flags[static_cast<size_t>(i)];
    }

    if (tick % every == 0) {
      a_t = gait.joint_targets(t, cmd);
      const FollowerOutput out = follower.step(state, a_t, support, scenario.terrain, terms);
      tau_hold = out.tau;
      ++follower_ticks;
      if (probe) probe(tick, state, contacts, out);
      if (out.fallback) {
        ++fallback_ticks;
        if (fallback_ticks > std::max(1, planned_follower_ticks / 100)) {
          result.status = RunStatus::SolverBudget;
          result.message = "follower fallback budget exceeded at t=" + std::to_string(t);
          break;
        }
      }
    }

    TickLog log;
    log.t = t;
    log.cmd = cmd;
    log.base_pos = state.base_pos;
    log.base_quat = state.base_quat();
    log.q_j = state.q_j;
    log.v = state.v;
    log.tau = tau_hold;
    log.f_grf = f_grf;
    log.foot_pos = terms.foot_pos;
    log.contact = flags;
    log.a_t = a_t;
    traj.ticks.push_back(std::move(log));

    const vector_t qdd = forward_dynamics(model, terms, tau_hold, f_grf);
    const vector_t v_old = state.v;
    state.v += qdd * dt;
    // Trapezoidal position update (exact for constant acceleration over the
    // step); orientation advances by the exponential of the mean body rate.
    state.base_pos += 0.5 * (v_old.head<3>() + state.v.head<3>()) * dt;
    state.base_rot =
        state.base_rot * exp_so3(0.5 * (v_old.segment<3>(3) + state.v.segment<3>(3)) * dt);
    state.q_j += 0.5 * (v_old.tail(n) + state.v.tail(n)) * dt;
    state.renormalize_rotation();

    if (!state.v.allFinite() || !state.q_j.allFinite() || !state.base_pos.allFinite() ||
        state.v.lpNorm<Eigen::Infinity>() > 1e3 ||
        state.base_pos.lpNorm<Eigen::Infinity>() > 1e3) {
      result.status = RunStatus::Divergence;
      result.message = "state diverged at t=" + std::to_string(t + dt);
      break;
    }
  }

  result.safety = analyze_trajectory(traj, model);
  result.safety.fallback_ticks = fallback_ticks;
  result.safety.follower_ticks = follower_ticks;
  return result;
}

}  // namespace wbf
