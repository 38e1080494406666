#include "cascade/phase_space_kernel.hpp"

#include <cmath>

namespace cascade {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}
}  // namespace

Eigen::Matrix2cd kernel_weyl_single(double theta, double phi) {
    double st = std::sin(theta), ct = std::cos(theta);
    complexd off = 0.5 * kSqrt3 * st * complexd(std::cos(phi), -std::sin(phi));
    Eigen::Matrix2cd d;
    // Basis (|e>, |g>): population symbol on the top-left diagonal.
    d << complexd(0.5 * (1.0 + kSqrt3 * ct), 0.0), off,
         std::conj(off), complexd(0.5 * (1.0 - kSqrt3 * ct), 0.0);
    return d;
}

complexd kernel_weyl_small_n(const Eigen::MatrixXcd& op, const PhaseConfig& omega) {
    Eigen::MatrixXcd delta = Eigen::MatrixXcd::Identity(1, 1);
    for (std::size_t n = 0; n < omega.size(); ++n)
        delta = kron(delta, kernel_weyl_single(omega.theta[n], omega.phi[n]));
    return (op * delta).trace();
}

Eigen::MatrixXcd embed_single(const Eigen::Matrix2cd& op, int atom, int n_atoms) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (int n = 0; n < n_atoms; ++n) {
        if (n == atom)
            out = kron(out, op);
        else
            out = kron(out, Eigen::MatrixXcd::Identity(2, 2));
    }
    return out;
}

}  // namespace cascade
