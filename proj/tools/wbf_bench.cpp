// Micro/throughput benchmark: per-component costs and a batch-of-rollouts
// comparison between the serial loop and the OpenMP-parallel loop.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wbf/dynamics.hpp"
#include "wbf/simulator.hpp"

using namespace wbf;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::string scenario_path = std::string(WBF_BENCH_ASSET_DIR) + "/scenarios/standing.scn";
  int batch = 8;
  double duration = 0.5;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--scenario" && i + 1 < argc) scenario_path = argv[++i];
    if (a == "--batch" && i + 1 < argc) batch = std::atoi(argv[++i]);
    if (a == "--duration" && i + 1 < argc) duration = std::atof(argv[++i]);
  }

  Scenario sc = load_scenario(scenario_path);
  sc.duration = duration;

  // Component costs on the scenario's robot at its initial stance.
  {
    GeneralizedState state = GeneralizedState::neutral(sc.model);
    state.base_pos.z() = sc.gait.body_height;
    const int reps = 2000;
    auto t0 = std::chrono::steady_clock::now();
    volatile scalar_t sink = 0.0;
    for (int i = 0; i < reps; ++i) {
      const DynamicsTerms terms = compute_dynamics(sc.model, state);
      sink = sink + terms.M(0, 0);
    }
    const double dt = seconds_since(t0);
    std::printf("dynamics terms:      %8.1f evals/s (%.3f ms each)\n", reps / dt,
                1e3 * dt / reps);
  }
  {
    Follower follower(sc.model, sc.follower);
    GeneralizedState state = GeneralizedState::neutral(sc.model);
    state.base_pos.z() = sc.gait.body_height;
    const vector_t a_t = sc.model.nominal_posture();
    const std::vector<bool> contact(static_cast<size_t>(sc.model.n_feet()), true);
    const int reps = 200;
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) {
      (void)follower.step(state, a_t, contact, sc.terrain);
    }
    const double dt = seconds_since(t0);
    std::printf("follower tick:       %8.1f ticks/s (%.3f ms each)\n", reps / dt,
                1e3 * dt / reps);
  }

  // Batch of independent rollouts, serial vs parallel.
  std::vector<Scenario> jobs;
  for (int i = 0; i < batch; ++i) {
    Scenario s = sc;
    s.seed = static_cast<std::uint64_t>(i + 1);
    s.init.joint_noise = 0.01;
    jobs.push_back(std::move(s));
  }

  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < batch; ++i) {
    const RunResult r = run_scenario(jobs[static_cast<size_t>(i)]);
    if (r.status != RunStatus::Ok) std::printf("  rollout %d: status %d\n", i, (int)r.status);
  }
  const double serial = seconds_since(t0);
  std::printf("batch x%d serial:    %8.3f s\n", batch, serial);

#ifdef _OPENMP
  t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < batch; ++i) {
    const RunResult r = run_scenario(jobs[static_cast<size_t>(i)]);
    if (r.status != RunStatus::Ok) {
#pragma omp critical
      std::printf("  rollout %d: status %d\n", i, (int)r.status);
    }
  }
  const double parallel = seconds_since(t0);
  std::printf("batch x%d parallel:  %8.3f s (%d threads, speedup %.2fx)\n", batch, parallel,
              omp_get_max_threads(), serial / parallel);
#else
  std::printf("OpenMP not available; parallel batch skipped\n");
#endif
  return 0;
}
