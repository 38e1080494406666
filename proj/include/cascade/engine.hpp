#pragma once

#include <string>
#include <vector>

#include "cascade/correlators.hpp"
#include "cascade/model.hpp"

namespace cascade {

struct EnergyEstimate {
    double mean = 0.0;  // trapezoid integral of the flux over the recorded grid,
    double sem = 0.0;   // averaged over trajectories
};

struct RunResult {
    CorrelatorSeries series;
    EnergyEstimate energy;
    std::vector<std::string> warnings;
    std::uint64_t n_trajectories = 0;
    double wall_seconds = 0.0;
};

struct EngineOptions {
    int workers = 1;           // 0 = hardware concurrency
    int bootstrap_resamples = 1000;
    bool reference_stepper = false;  // use the plain libm stepper (for tests)
};

// Runs the trajectory ensemble and reduces it to a CorrelatorSeries.
// Trajectories are split into fixed blocks that are merged in block order,
// so the output is bit-identical for any worker count.
RunResult run_ensemble(const SystemParams& params, const InitialState& init,
                       const EngineOptions& options = {});

}  // namespace cascade
