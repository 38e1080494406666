#pragma once

#include <vector>

#include "cascade/correlators.hpp"
#include "cascade/model.hpp"

namespace cascade {

// Exact (master-equation) results on the same schema as the trajectory code;
// all statistical-error fields are zero and the g2 band collapses to a point.
struct OracleOptions {
    double dt = 1e-3;          // RK4 step
    int output_stride = 50;    // record every k-th step
    bool check_invariants = true;  // Hermiticity / trace / positivity per record
};

struct OracleInvariantReport {
    double max_hermiticity_error = 0.0;  // max |rho - rho^dag| entry over run
    double max_trace_error = 0.0;        // max |tr(rho) - 1| over run
    double min_eigenvalue = 0.0;         // most negative eigenvalue seen
};

struct OracleResult {
    CorrelatorSeries series;
    OracleInvariantReport invariants;
};

// Full density-matrix integration of the unidirectionally coupled chain,
// including the drive and the non-guided decay channels. Dimension 2^N;
// intended for N <= 8. Uses drive/beta/t_end from params; its own dt/stride
// come from options (the trajectory dt does not apply here).
OracleResult evolve_cascaded_exact(const SystemParams& params,
                                   const InitialState& init,
                                   const OracleOptions& options = {});

// Permutation-symmetric reference: N emitters decaying collectively through a
// single mode at unit rate, evolved in the maximal-spin sector of dimension
// N+1. All atoms start identically (first Bloch vector is used for all).
OracleResult evolve_dicke(int n_atoms, const BlochVector& init,
                          double t_end, const OracleOptions& options = {});

// Closed-form single-atom decay: population p(t) = p0 exp(-t), guided flux
// P(t) = beta * p(t).
struct SingleAtomAnalytic {
    double population = 0.0;
    double flux = 0.0;
};
SingleAtomAnalytic analytic_single_atom(double beta, double w0, double t);

}  // namespace cascade
