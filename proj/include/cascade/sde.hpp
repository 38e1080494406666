#pragma once

#include <vector>

#include "cascade/model.hpp"
#include "cascade/phase_space.hpp"

namespace cascade {

// Coefficients of the Ito system for one configuration. For atom n the
// angle increments over dt are
//   d theta_n = f0[n] dt + Re[ f_coll[n] dt + g_coll[n] dZ ]
//   d phi_n   = g0[n] dW_n
//              - cot(theta_n) * Im[ f_coll[n] dt + g_coll[n] dZ ]
// with one independent real Wiener increment dW_n per atom and a single
// complex increment dZ (E|dZ|^2 = 2 dt, E[dZ^2] = 0) shared by the chain.
struct DriftDiffusion {
    std::vector<double> f0;        // non-guided drift
    std::vector<double> g0;        // non-guided diffusion amplitude
    std::vector<complexd> f_coll;  // guided drift (complex packing as above)
    std::vector<complexd> g_coll;  // guided diffusion, |g_coll[n]| = sqrt(beta_n)
    std::vector<complexd> w_field; // field symbol entering each atom; w_field[0] = alpha,
                                   // w_field[n] = field after atoms 1..n (size N+1)
};

struct NoiseDraw {
    std::vector<double> dW;  // one per atom, Var = dt
    complexd dZ{0.0, 0.0};   // shared, E|dZ|^2 = 2 dt
};

// Fills dW[0..N-1] then dZ = (x + i y) sqrt(dt), in that fixed draw order.
void draw_noise(NoiseDraw& out, std::size_t n_atoms, double dt, TrajectoryRng& rng);

// Drift/diffusion from emission into non-guided modes only; independent of
// every other atom. Returned as (f0, g0). The g0 radicand is clamped at zero
// (it can dip to -1e-12 from rounding near the equator).
std::pair<double, double> free_decay_terms(double theta, double beta);

// Coefficients of the guided-mode (chain) part, built in a single O(N) pass
// that threads the field symbol through the atoms in chain order.
DriftDiffusion collective_terms(const PhaseConfig& omega,
                                const std::vector<double>& beta,
                                complexd alpha);

// Same coefficients assembled from the explicit pairwise sums (Theta(N^2));
// retained as a cross-check for tests, N <= 200.
DriftDiffusion collective_terms_reference(const PhaseConfig& omega,
                                          const std::vector<double>& beta,
                                          complexd alpha);

// One Euler-Maruyama step, in place. theta is clamped to
// [theta_min, pi - theta_min] and phi wrapped to [0, 2pi).
void step(PhaseConfig& omega, double t, double dt, const SystemParams& params,
          const NoiseDraw& noise);

// Convenience: draws the noise itself.
void step(PhaseConfig& omega, double t, double dt, const SystemParams& params,
          TrajectoryRng& rng);

}  // namespace cascade
