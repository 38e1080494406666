#include "cascade/sde.hpp"

#include <cmath>

namespace cascade {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kInvSqrt3 = 0.5773502691896258;
constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;

inline int sgn(int x) { return (x > 0) - (x < 0); }
}  // namespace

void draw_noise(NoiseDraw& out, std::size_t n_atoms, double dt, TrajectoryRng& rng) {
    out.dW.resize(n_atoms);
    const double sq = std::sqrt(dt);
    for (std::size_t n = 0; n < n_atoms; ++n) out.dW[n] = sq * rng.normal();
    double zx = rng.normal();
    double zy = rng.normal();
    out.dZ = complexd(zx * sq, zy * sq);
}

std::pair<double, double> free_decay_terms(double theta, double beta) {
    double st = std::sin(theta);
    double ct = std::cos(theta);
    double cot = ct / st;
    double csc = 1.0 / st;
    double f0 = (1.0 - beta) * (cot + csc * kInvSqrt3);
    double radicand = 1.0 + 2.0 * cot * (cot + csc * kInvSqrt3);
    // The radicand is non-negative analytically but can round to ~-1e-16
    // near its zero crossing; clamp rather than propagate a NaN.
    if (radicand < 0.0) radicand = 0.0;
    double g0 = std::sqrt(1.0 - beta) * std::sqrt(radicand);
    return {f0, g0};
}

DriftDiffusion collective_terms(const PhaseConfig& omega,
                                const std::vector<double>& beta, complexd alpha) {
    const std::size_t n_atoms = omega.size();
    DriftDiffusion dd;
    dd.f0.resize(n_atoms);
    dd.g0.resize(n_atoms);
    dd.f_coll.resize(n_atoms);
    dd.g_coll.resize(n_atoms);
    dd.w_field.resize(n_atoms + 1);

    complexd field = alpha;  // symbol of the field entering the next atom
    dd.w_field[0] = field;
    for (std::size_t n = 0; n < n_atoms; ++n) {
        double st = std::sin(omega.theta[n]);
        double ct = std::cos(omega.theta[n]);
        double cot = ct / st;
        double rb = std::sqrt(beta[n]);
        complexd eip(std::cos(omega.phi[n]), std::sin(omega.phi[n]));

        auto [f0, g0] = free_decay_terms(omega.theta[n], beta[n]);
        dd.f0[n] = f0;
        dd.g0[n] = g0;
        dd.f_coll[n] = 0.5 * beta[n] * (cot + kSqrt3 * st)
                       + complexd(0.0, 2.0) * rb * eip * field;
        dd.g_coll[n] = -rb * eip;

        complexd w_sigma = 0.5 * kSqrt3 * st * std::conj(eip);
        field -= complexd(0.0, 1.0) * rb * w_sigma;
        dd.w_field[n + 1] = field;
    }
    return dd;
}

DriftDiffusion collective_terms_reference(const PhaseConfig& omega,
                                          const std::vector<double>& beta,
                                          complexd alpha) {
    const std::size_t n_atoms = omega.size();
    DriftDiffusion dd;
    dd.f0.resize(n_atoms);
    dd.g0.resize(n_atoms);
    dd.f_coll.resize(n_atoms);
    dd.g_coll.resize(n_atoms);
    dd.w_field.resize(n_atoms + 1);

    for (std::size_t n = 0; n < n_atoms; ++n) {
        double st_n = std::sin(omega.theta[n]);
        double ct_n = std::cos(omega.theta[n]);
        double cot_n = ct_n / st_n;
        double rb_n = std::sqrt(beta[n]);
        complexd eip(std::cos(omega.phi[n]), std::sin(omega.phi[n]));

        auto [f0, g0] = free_decay_terms(omega.theta[n], beta[n]);
        dd.f0[n] = f0;
        dd.g0[n] = g0;

        // Symmetric pair sum of the collective dissipator plus the
        // antisymmetric (signum-weighted) sum of the cascade Hamiltonian.
        double sym_c = 0.0, sym_s = 0.0, asym_c = 0.0, asym_s = 0.0;
        for (std::size_t m = 0; m < n_atoms; ++m) {
            double rb_m = std::sqrt(beta[m]);
            double st_m = std::sin(omega.theta[m]);
            double dphi = omega.phi[m] - omega.phi[n];
            double c = std::cos(dphi), s = std::sin(dphi);
            sym_c += rb_m * st_m * c;
            sym_s += rb_m * st_m * s;
            int sg = sgn(static_cast<int>(m) - static_cast<int>(n));
            asym_c += rb_m * st_m * sg * c;
            asym_s += rb_m * st_m * sg * s;
        }
        double dtheta_drift = 0.5 * rb_n * (rb_n * cot_n + kSqrt3 * sym_c)
                              - 0.5 * kSqrt3 * rb_n * asym_c;
        // The phi drift rows carry an overall cot(theta_n); in the complex
        // packing d phi = -cot(theta_n) Im[f_coll] dt, so store the bracket.
        double phi_bracket = 0.5 * kSqrt3 * rb_n * (sym_s - asym_s);
        // Drive terms.
        complexd ea = eip * alpha;
        dtheta_drift += -2.0 * rb_n * ea.imag();
        phi_bracket += -2.0 * rb_n * ea.real();

        dd.f_coll[n] = complexd(dtheta_drift, -phi_bracket);
        dd.g_coll[n] = -rb_n * eip;

        // Field symbol after atoms 1..n as an explicit partial sum.
        complexd acc = alpha;
        for (std::size_t m = 0; m <= n; ++m) {
            double st_m = std::sin(omega.theta[m]);
            complexd w_sigma =
                0.5 * kSqrt3 * st_m *
                complexd(std::cos(omega.phi[m]), -std::sin(omega.phi[m]));
            acc -= complexd(0.0, 1.0) * std::sqrt(beta[m]) * w_sigma;
        }
        dd.w_field[n + 1] = acc;
    }
    dd.w_field[0] = alpha;
    return dd;
}

void step(PhaseConfig& omega, double t, double dt, const SystemParams& params,
          const NoiseDraw& noise) {
    const std::size_t n_atoms = omega.size();
    complexd alpha = params.drive.alpha_at(t);
    DriftDiffusion dd = collective_terms(omega, params.beta, alpha);

    const double th_min = params.theta_min;
    const double th_max = kPi - params.theta_min;
    for (std::size_t n = 0; n < n_atoms; ++n) {
        double cot = std::cos(omega.theta[n]) / std::sin(omega.theta[n]);
        complexd coll = dd.f_coll[n] * dt + dd.g_coll[n] * noise.dZ;
        double dtheta = dd.f0[n] * dt + coll.real();
        double dphi = dd.g0[n] * noise.dW[n] - cot * coll.imag();

        double theta = omega.theta[n] + dtheta;
        if (theta < th_min) theta = th_min;
        if (theta > th_max) theta = th_max;
        omega.theta[n] = theta;

        double phi = std::fmod(omega.phi[n] + dphi, kTwoPi);
        if (phi < 0.0) phi += kTwoPi;
        omega.phi[n] = phi;
    }
}

void step(PhaseConfig& omega, double t, double dt, const SystemParams& params,
          TrajectoryRng& rng) {
    NoiseDraw noise;
    draw_noise(noise, omega.size(), dt, rng);
    step(omega, t, dt, params, noise);
}

}  // namespace cascade
