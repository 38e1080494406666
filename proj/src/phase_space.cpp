#include "cascade/phase_space.hpp"

#include <cmath>

namespace cascade {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kTwoPi = 6.283185307179586;

struct AzimuthLaw {
    double c = 0.0;     // modulation depth of (1 + c cos)^2
    double phi0 = 0.0;  // peak location
    double amp = 1.0;   // normalization amplitude A
};

AzimuthLaw azimuth_law(double u, double v, double w) {
    AzimuthLaw law;
    double m2 = (u * u + v * v) / (3.0 - w * w);
    double s = std::sqrt(std::max(0.0, 1.0 - 2.0 * m2));
    law.amp = 0.5 * (1.0 + s);
    law.c = std::sqrt(m2) / law.amp;
    law.phi0 = std::atan2(v, u);
    return law;
}
}  // namespace

SpinSymbols weyl_spin_symbols(double theta, double phi) {
    SpinSymbols sym;
    double st = std::sin(theta), ct = std::cos(theta);
    double cp = std::cos(phi), sp = std::sin(phi);
    sym.w_sigma = 0.5 * kSqrt3 * st * complexd(cp, -sp);
    sym.w_pop = 0.5 * (1.0 + kSqrt3 * ct);
    sym.w_pauli = {kSqrt3 * st * cp, kSqrt3 * st * sp, kSqrt3 * ct};
    return sym;
}

double phi_mixing_amplitude(double u, double v, double w) {
    return azimuth_law(u, v, w).amp;
}

double azimuth_density(double u, double v, double w, double phi) {
    AzimuthLaw law = azimuth_law(u, v, w);
    double g = 1.0 + law.c * std::cos(phi - law.phi0);
    return law.amp / kTwoPi * g * g;
}

PhaseConfig sample_initial(const InitialState& init, TrajectoryRng& rng) {
    PhaseConfig cfg;
    const std::size_t n = init.bloch.size();
    cfg.theta.resize(n);
    cfg.phi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = init.bloch[i];
        cfg.theta[i] = std::acos(b.w / kSqrt3);
        AzimuthLaw law = azimuth_law(b.u, b.v, b.w);
        // Rejection with the flat envelope (1+c)^2; acceptance >= 1/4.
        double env = (1.0 + law.c) * (1.0 + law.c);
        double delta = 0.0;
        for (;;) {
            delta = kTwoPi * rng.uniform01();
            double g = 1.0 + law.c * std::cos(delta);
            if (env * rng.uniform01() < g * g) break;
        }
        double phi = delta + law.phi0;
        phi = std::fmod(phi, kTwoPi);
        if (phi < 0.0) phi += kTwoPi;
        cfg.phi[i] = phi;
    }
    return cfg;
}

}  // namespace cascade
