#pragma once

#include <Eigen/Dense>

#include "cascade/phase_space.hpp"

namespace cascade {

// Dense-matrix evaluation of Weyl symbols for small systems, used only as a
// test oracle against the closed-form symbols. Builds the product phase-point
// kernel Delta(omega) = kron_n Delta_1(theta_n, phi_n) and returns
// tr[op * Delta(omega)]. Basis per atom: index 0 = |e>, index 1 = |g>;
// dimension 2^N with atom 1 as the slowest index. Intended for N <= 6.
Eigen::Matrix2cd kernel_weyl_single(double theta, double phi);

complexd kernel_weyl_small_n(const Eigen::MatrixXcd& op, const PhaseConfig& omega);

// Single-atom operator embedded at position `atom` (0-based) in an N-atom
// product space; convenience for building test operators.
Eigen::MatrixXcd embed_single(const Eigen::Matrix2cd& op, int atom, int n_atoms);

}  // namespace cascade
