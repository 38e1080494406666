#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

using complexd = std::complex<double>;

// Piecewise-constant drive amplitude alpha(t); zero outside all segments.
// |alpha|^2 is a photon flux in units of Gamma_0 = 1.
struct DriveSegment {
    double t_start = 0.0;
    double t_stop = 0.0;
    complexd alpha{0.0, 0.0};
};

struct DriveSchedule {
    std::vector<DriveSegment> segments;  // time-ordered, non-overlapping

    complexd alpha_at(double t) const {
        for (const auto& s : segments) {
            if (t >= s.t_start && t < s.t_stop) return s.alpha;
        }
        return {0.0, 0.0};
    }
    bool is_zero() const { return segments.empty(); }
};

// Full experiment description. Time is measured in units of the excited-state
// lifetime (Gamma_0 = 1) throughout.
struct SystemParams {
    int n_atoms = 1;
    std::vector<double> beta;  // per-atom waveguide coupling, in [0,1]
    DriveSchedule drive;
    double dt = 1e-3;
    double t_end = 3.0;
    int output_stride = 50;       // record every k-th step
    std::uint64_t n_trajectories = 10000;
    std::uint64_t seed = 1;
    double theta_min = 1e-6;      // pole-regularization knob

    static SystemParams homogeneous(int n, double beta_value) {
        SystemParams p;
        p.n_atoms = n;
        p.beta.assign(static_cast<std::size_t>(n), beta_value);
        return p;
    }
};

struct BlochVector {
    double u = 0.0, v = 0.0, w = 0.0;
};

// Per-atom Bloch vectors (u,v,w) = (<sx>,<sy>,<sz>); any point in the unit
// ball, so mixed single-atom states are allowed.
struct InitialState {
    std::vector<BlochVector> bloch;

    static InitialState inverted(int n) { return uniform(n, {0.0, 0.0, 1.0}); }
    static InitialState ground(int n) { return uniform(n, {0.0, 0.0, -1.0}); }
    static InitialState uniform(int n, BlochVector b) {
        InitialState s;
        s.bloch.assign(static_cast<std::size_t>(n), b);
        return s;
    }
};

// Bloch vector of cos(A/2)|g> - i sin(A/2)|e>, with w = +1 denoting |e>.
// The sign of v is pinned by cross-validation against the exact solver
// (see tests); it comes out +sin(A) in our Pauli convention.
BlochVector bloch_from_pulse_area(double area);

// Returns std::nullopt on success, otherwise a message naming the first
// violated invariant.
std::optional<std::string> validate(const SystemParams& params, const InitialState& init);

}  // namespace cascade
