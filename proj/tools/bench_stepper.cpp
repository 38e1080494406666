// Micro-benchmark: atom-steps per second of the trajectory engine.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "cascade/engine.hpp"

int main(int argc, char** argv) {
    using namespace cascade;
    int n_atoms = argc > 1 ? std::atoi(argv[1]) : 200;
    std::uint64_t n_traj = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 200;

    SystemParams p = SystemParams::homogeneous(n_atoms, 0.05);
    p.t_end = 2.0;
    p.dt = 1e-3;
    p.output_stride = 100;
    p.n_trajectories = n_traj;
    p.seed = 7;
    InitialState init = InitialState::inverted(n_atoms);

    EngineOptions opt;
    opt.workers = 1;
    opt.bootstrap_resamples = 10;

    auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_ensemble(p, init, opt);
    double dt_wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double atom_steps = static_cast<double>(n_atoms) * 2000.0 * static_cast<double>(n_traj);
    std::printf("atoms=%d trajectories=%llu wall=%.2fs rate=%.1f Matom-steps/s (%.1f ns/atom-step)\n",
                n_atoms, static_cast<unsigned long long>(n_traj), dt_wall,
                atom_steps / dt_wall / 1e6, dt_wall / atom_steps * 1e9);
    std::printf("P(0)=%.6f P(end)=%.6f t_limit=%.3f\n", r.series.P.front(),
                r.series.P.back(), r.series.t_limit);
    return 0;
}
