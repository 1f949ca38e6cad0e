// Command-line experiment runner: single rollouts, constraint-parameter
// sweeps, and post-hoc verification of previously written run directories.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "wbf/simulator.hpp"

namespace fs = std::filesystem;
using namespace wbf;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitVerifyMismatch = 5;

int status_code(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return 0;
    case RunStatus::ConfigError: return 2;
    case RunStatus::Divergence: return 3;
    case RunStatus::SolverBudget: return 4;
  }
  return 2;
}

void write_outputs(const Scenario& sc, const RunResult& res, const fs::path& dir,
                   const std::string& label) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir / (label + "_scenario.scn"));
    f << serialize_scenario(sc);
  }
  {
    std::ofstream f(dir / (label + "_trajectory.csv"));
    write_trajectory_csv(res.trajectory, f);
  }
  {
    std::ofstream f(dir / (label + "_safety.txt"));
    f << res.safety.to_text();
  }
}

struct SweepCase {
  std::string value;
  Scenario scenario;
  RunResult result;
};

void apply_sweep_value(Scenario& sc, const std::string& param, const std::string& value) {
  if (param == "mu") {
    if (value == "off") {
      sc.follower.enable_ft_interaction = false;
      sc.follower.mu_override.reset();
    } else {
      sc.follower.enable_ft_interaction = true;
      sc.follower.mu_override = std::stod(value);
    }
  } else if (param == "hip_rom") {
    if (value == "off") {
      sc.follower.enable_kinematic_limits = false;
      sc.follower.hip_rom.reset();
    } else {
      sc.follower.enable_kinematic_limits = true;
      sc.follower.hip_rom = std::stod(value) * M_PI / 180.0;
    }
  } else if (param == "mode") {
    sc.follower.mode = follower_mode_from_string(value);
  } else {
    throw ValidationError("unknown sweep parameter '" + param +
                          "' (expected mu, hip_rom, or mode)");
  }
}

bool close(scalar_t a, scalar_t b) { return std::abs(a - b) <= 1e-9 + 1e-6 * std::abs(b); }

// Recomputes every trajectory-derivable metric and compares it with the
// stored safety report. Returns mismatch descriptions (empty = verified).
std::vector<std::string> verify_run(const fs::path& dir, const std::string& label) {
  std::vector<std::string> issues;
  const fs::path scn = dir / (label + "_scenario.scn");
  const fs::path csv = dir / (label + "_trajectory.csv");
  const fs::path saf = dir / (label + "_safety.txt");
  for (const fs::path& p : {scn, csv, saf}) {
    if (!fs::exists(p)) {
      issues.push_back("missing file: " + p.string());
      return issues;
    }
  }
  const Scenario scenario = load_scenario(scn.string());
  std::ifstream cf(csv);
  const Trajectory traj = read_trajectory_csv(cf);
  std::stringstream sf;
  sf << std::ifstream(saf).rdbuf();
  const SafetyReport stored = parse_safety_text(sf.str());

  if (static_cast<int>(traj.joint_names.size()) != scenario.model.n_joints()) {
    issues.push_back("trajectory joint count does not match the robot model");
  }
  const int expected_ticks =
      static_cast<int>(std::lround(scenario.duration / scenario.dt_phys));
  if (static_cast<int>(traj.ticks.size()) > expected_ticks) {
    issues.push_back("trajectory has more ticks than the scenario duration allows");
  }
  const SafetyReport fresh = analyze_trajectory(traj, scenario.model);

  auto check_int = [&](const char* name, int got, int want) {
    if (got != want) {
      issues.push_back(std::string(name) + ": stored " + std::to_string(want) +
                       ", recomputed " + std::to_string(got));
    }
  };
  auto check_scalar = [&](const char* name, scalar_t got, scalar_t want) {
    if (!close(got, want)) {
      issues.push_back(std::string(name) + ": stored " + std::to_string(want) +
                       ", recomputed " + std::to_string(got));
    }
  };
  check_int("slip_events", fresh.slip_events, stored.slip_events);
  check_int("torque_events", fresh.torque_events, stored.torque_events);
  check_int("kinematic_events", fresh.kinematic_events, stored.kinematic_events);
  check_int("stance_count", fresh.stance_count, stored.stance_count);
  check_scalar("mean_slip", fresh.mean_slip, stored.mean_slip);
  check_scalar("max_slip", fresh.max_slip, stored.max_slip);
  check_scalar("max_abs_torque", fresh.max_abs_torque, stored.max_abs_torque);
  check_scalar("effective_step_length", fresh.effective_step_length,
               stored.effective_step_length);
  check_scalar("rms_tracking_error", fresh.rms_tracking_error, stored.rms_tracking_error);
  if (fresh.stances.size() == stored.stances.size()) {
    for (size_t i = 0; i < fresh.stances.size(); ++i) {
      const std::string tag = "stance[" + std::to_string(i) + "].";
      check_int((tag + "foot").c_str(), fresh.stances[i].foot, stored.stances[i].foot);
      check_scalar((tag + "slip").c_str(), fresh.stances[i].slip, stored.stances[i].slip);
      check_scalar((tag + "effective_step").c_str(), fresh.stances[i].effective_step,
                   stored.stances[i].effective_step);
    }
  }
  return issues;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body follower experiment harness"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "runs";
  std::string mode_override;
  double duration_override = -1.0;
  double mu_override = -1.0;
  long seed_override = -1;

  CLI::App* run = app.add_subcommand("run", "Roll out one scenario and write its artifacts");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--mode", mode_override, "follower mode override (training|deployment)");
  run->add_option("--mu", mu_override, "friction-cone belief override");
  run->add_option("--duration", duration_override, "duration override [s]");
  run->add_option("--seed", seed_override, "seed override");

  std::string sweep_param;
  std::vector<std::string> sweep_values;
  int jobs = 1;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run a scenario once per parameter value and tabulate the safety metrics");
  sweep->add_option("scenario", scenario_path, "scenario file")->required();
  sweep->add_option("--param", sweep_param, "mu | hip_rom | mode")->required();
  sweep
      ->add_option("--values", sweep_values,
                   "comma-separated values ('off' disables the constraint; hip_rom in degrees)")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "parallel runs (OpenMP)");
  sweep->add_option("--duration", duration_override, "duration override [s]");

  std::string verify_dir;
  std::string verify_name;
  CLI::App* verify = app.add_subcommand(
      "verify", "Re-derive safety metrics from stored trajectories and compare");
  verify->add_option("dir", verify_dir, "run directory")->required();
  verify->add_option("--name", verify_name, "verify only this run label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      Scenario sc = load_scenario(scenario_path);
      if (!mode_override.empty()) sc.follower.mode = follower_mode_from_string(mode_override);
      if (mu_override > 0.0) {
        sc.follower.enable_ft_interaction = true;
        sc.follower.mu_override = mu_override;
      }
      if (duration_override > 0.0) sc.duration = duration_override;
      if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
      const RunResult res = run_scenario(sc);
      write_outputs(sc, res, out_dir, sc.name);
      std::cout << res.safety.to_text();
      if (res.status != RunStatus::Ok) {
        std::cerr << "run ended early: " << res.message << "\n";
      }
      return status_code(res.status);
    }

    if (sweep->parsed()) {
      const Scenario base = load_scenario(scenario_path);
      std::vector<SweepCase> cases;
      for (const std::string& v : sweep_values) {
        SweepCase c;
        c.value = v;
        c.scenario = base;
        if (duration_override > 0.0) c.scenario.duration = duration_override;
        apply_sweep_value(c.scenario, sweep_param, v);
        c.scenario.name = base.name + "_" + sweep_param + "_" + v;
        cases.push_back(std::move(c));
      }
#ifdef _OPENMP
      omp_set_num_threads(std::max(1, jobs));
#pragma omp parallel for schedule(dynamic)
#endif
      for (size_t i = 0; i < cases.size(); ++i) {  // NOLINT(modernize-loop-convert)
        cases[i].result = run_scenario(cases[i].scenario);
      }

      fs::create_directories(out_dir);
      std::ofstream summary(fs::path(out_dir) / "summary.csv");
      summary << "param,value,status,slip_events,torque_events,kinematic_events,"
                 "stance_count,mean_slip,max_slip,max_abs_torque,"
                 "effective_step_length,rms_tracking_error,fallback_ticks,follower_ticks\n";
      int exit_code = 0;
      for (SweepCase& c : cases) {
        write_outputs(c.scenario, c.result, out_dir, c.scenario.name);
        const SafetyReport& s = c.result.safety;
        summary << sweep_param << ',' << c.value << ',' << status_code(c.result.status) << ','
                << s.slip_events << ',' << s.torque_events << ',' << s.kinematic_events << ','
                << s.stance_count << ',' << s.mean_slip << ',' << s.max_slip << ','
                << s.max_abs_torque << ',' << s.effective_step_length << ','
                << s.rms_tracking_error << ',' << s.fallback_ticks << ',' << s.follower_ticks
                << "\n";
        std::cout << c.scenario.name << ": status " << status_code(c.result.status)
                  << ", slip_events " << s.slip_events << ", step "
                  << s.effective_step_length << "\n";
        if (c.result.status != RunStatus::Ok && exit_code == 0) {
          exit_code = status_code(c.result.status);
        }
      }
      return exit_code;
    }

    if (verify->parsed()) {
      std::vector<std::string> labels;
      if (!verify_name.empty()) {
        labels.push_back(verify_name);
      } else {
        for (const auto& e : fs::directory_iterator(verify_dir)) {
          const std::string fn = e.path().filename().string();
          const std::string suffix = "_scenario.scn";
          if (fn.size() > suffix.size() &&
              fn.compare(fn.size() - suffix.size(), suffix.size(), suffix) == 0) {
            labels.push_back(fn.substr(0, fn.size() - suffix.size()));
          }
        }
        std::sort(labels.begin(), labels.end());
      }
      if (labels.empty()) {
        std::cerr << "no run artifacts found in " << verify_dir << "\n";
        return kExitConfig;
      }
      bool all_ok = true;
      for (const std::string& label : labels) {
        const std::vector<std::string> issues = verify_run(verify_dir, label);
        if (issues.empty()) {
          std::cout << label << ": verified\n";
        } else {
          all_ok = false;
          for (const std::string& msg : issues) {
            std::cout << label << ": MISMATCH " << msg << "\n";
          }
        }
      }
      return all_ok ? 0 : kExitVerifyMismatch;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
