#pragma once

#include <cstdint>
#include <vector>

#include "cascade/model.hpp"
#include "cascade/phase_space.hpp"
#include "cascade/stats.hpp"

namespace cascade {

// Per-trajectory symbols of the output-field observables, obtained by
// threading moment recursions through the chain (O(N), no N^2 sums):
//   w_a   : symbol of a_out
//   w_n1  : symbol of a_out^dag a_out            (photon flux)
//   w_n2  : symbol of a_out^dag a_out^dag a_out a_out
//   w_12  : symbol of a_out^dag a_out a_out      (internal)
//   w_02  : symbol of a_out a_out                (internal)
// Only w_a, w_n1, w_n2 feed estimators; the others are recursion state.
struct FieldMoments {
    complexd w_a{0.0, 0.0};
    complexd w_n1{0.0, 0.0};
    complexd w_n2{0.0, 0.0};
    complexd w_12{0.0, 0.0};
    complexd w_02{0.0, 0.0};
};

FieldMoments propagate_field_moments(const PhaseConfig& omega,
                                     const std::vector<double>& beta,
                                     complexd alpha);

// Symbol of the total-spin-squared operator S^2 at one configuration:
// 3N/4 plus the symmetrized pair sums over the three Pauli axes.
double s_squared_symbol(const PhaseConfig& omega);

// Ensemble estimates on the recorded time grid. "err_g2" is the half-width
// pair of the bootstrap percentile band (lo/hi stored separately since the
// band need not be symmetric).
struct CorrelatorSeries {
    std::vector<double> t;
    std::vector<complexd> E;        // <a_out>
    std::vector<double> P;          // photon flux
    std::vector<double> G2;         // unnormalized equal-time correlator
    std::vector<double> g2;         // G2 / P^2 (ratio of ensemble means)
    std::vector<double> S2;         // <S^2>
    std::vector<double> sem_P;
    std::vector<double> sem_G2;
    std::vector<double> sem_E_re;
    std::vector<double> sem_E_im;
    std::vector<double> g2_lo;      // bootstrap one-sigma percentile band
    std::vector<double> g2_hi;
    std::vector<bool> g2_unbounded; // flux consistent with zero at this time
    std::vector<double> sem_S2;
    std::vector<double> im_n1;      // imaginary parts of the flux / G2 symbols:
    std::vector<double> im_n2;      // pure sampling noise, kept as a diagnostic
    double t_limit = 0.0;
    std::vector<bool> beyond_limit; // marks t > t_limit
    bool t_limit_window_warning = false;

    std::size_t size() const { return t.size(); }
};

// Largest grid time t* such that the trapezoid integral of P over [t*, t_end]
// still holds at least n_atoms/1000 quanta. Returns t_end and sets the
// warning flag when even the full window holds less than that.
struct TLimitResult {
    double t_limit = 0.0;
    bool window_warning = false;
};
TLimitResult compute_t_limit(const std::vector<double>& t,
                             const std::vector<double>& P, int n_atoms);

// Raw per-time ensemble sums plus the per-trajectory flux pairs needed for
// the g2 bootstrap; written by the engine, reduced by estimate_series.
struct EnsembleAccumulator {
    std::vector<TimeAccumulator> acc;       // one per recorded time
    std::vector<double> traj_n1;            // [k * n_traj + traj], time-major
    std::vector<double> traj_n2;
    std::size_t n_times = 0;
    std::uint64_t n_traj = 0;

    void init(std::size_t n_times_, std::uint64_t n_traj_);
};

struct BootstrapConfig {
    int resamples = 1000;
    std::uint64_t seed = 1;
};

CorrelatorSeries estimate_series(const std::vector<double>& t_grid,
                                 const EnsembleAccumulator& ens, int n_atoms,
                                 const BootstrapConfig& bootstrap);

}  // namespace cascade
