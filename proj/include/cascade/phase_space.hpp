#pragma once

#include <array>
#include <vector>

#include "cascade/model.hpp"
#include "cascade/rng.hpp"

namespace cascade {

// One phase-space point: spherical angles per atom, theta in (0,pi),
// phi in [0,2pi).
struct PhaseConfig {
    std::vector<double> theta;
    std::vector<double> phi;

    std::size_t size() const { return theta.size(); }
};

// Weyl symbols of the basic single-atom operators at (theta, phi).
struct SpinSymbols {
    complexd w_sigma;              // lowering operator |g><e|
    double w_pop;                  // excited-state population sigma^dag sigma
    std::array<double, 3> w_pauli; // (sx, sy, sz)
};

SpinSymbols weyl_spin_symbols(double theta, double phi);

// Normalization A of the azimuthal density p(phi) = A (1 + c cos(phi-phi0))^2
// used when sampling a pure/mixed single-atom state with Bloch vector (u,v,w).
// Exposed separately because it obeys a quadratic identity used in tests.
double phi_mixing_amplitude(double u, double v, double w);

// Draws one phase-space configuration from the product sampling distribution
// of the given initial state. Polar angle is deterministic per atom,
// azimuth is drawn by rejection from the tilted density above.
PhaseConfig sample_initial(const InitialState& init, TrajectoryRng& rng);

// Exact azimuthal density value (including normalization), for tests.
double azimuth_density(double u, double v, double w, double phi);

}  // namespace cascade
