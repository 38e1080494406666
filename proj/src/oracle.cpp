#include "cascade/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>

namespace cascade {

namespace {

using SparseC = Eigen::SparseMatrix<complexd>;
using DenseC = Eigen::MatrixXcd;
using Triplet = Eigen::Triplet<complexd>;

// Basis: atom 0 is the slowest index; per-atom bit 0 = |e>, 1 = |g>.
SparseC lowering_op(int atom, int n_atoms) {
    const int dim = 1 << n_atoms;
    const int mask = 1 << (n_atoms - 1 - atom);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(dim / 2));
    for (int i = 0; i < dim; ++i)
        if ((i & mask) == 0) trips.emplace_back(i | mask, i, complexd(1.0, 0.0));
    SparseC op(dim, dim);
    op.setFromTriplets(trips.begin(), trips.end());
    return op;
}

DenseC product_state(const InitialState& init) {
    DenseC rho = DenseC::Identity(1, 1);
    for (const auto& b : init.bloch) {
        Eigen::Matrix2cd r1;
        r1 << complexd(0.5 * (1.0 + b.w), 0.0), 0.5 * complexd(b.u, -b.v),
              0.5 * complexd(b.u, b.v), complexd(0.5 * (1.0 - b.w), 0.0);
        DenseC next(rho.rows() * 2, rho.cols() * 2);
        for (Eigen::Index i = 0; i < rho.rows(); ++i)
            for (Eigen::Index j = 0; j < rho.cols(); ++j)
                next.block(i * 2, j * 2, 2, 2) = rho(i, j) * r1;
        rho = std::move(next);
    }
    return rho;
}

struct RecordGrid {
    std::vector<double> t;
    std::vector<std::uint64_t> at;
    std::uint64_t n_steps = 0;
};

RecordGrid make_grid(double t_end, double dt, int stride) {
    RecordGrid g;
    g.n_steps = static_cast<std::uint64_t>(std::llround(t_end / dt));
    if (g.n_steps < 1) g.n_steps = 1;
    for (std::uint64_t s = 0; s <= g.n_steps; ++s) {
        if (s % static_cast<std::uint64_t>(stride) == 0 || s == g.n_steps) {
            g.t.push_back(static_cast<double>(s) * dt);
            g.at.push_back(s);
        }
    }
    return g;
}

void init_series(CorrelatorSeries& s, std::size_t m) {
    s.t.resize(m);
    s.E.resize(m);
    s.P.resize(m);
    s.G2.resize(m);
    s.g2.resize(m);
    s.S2.resize(m);
    s.sem_P.assign(m, 0.0);
    s.sem_G2.assign(m, 0.0);
    s.sem_E_re.assign(m, 0.0);
    s.sem_E_im.assign(m, 0.0);
    s.g2_lo.resize(m);
    s.g2_hi.resize(m);
    s.g2_unbounded.assign(m, false);
    s.sem_S2.assign(m, 0.0);
    s.im_n1.assign(m, 0.0);
    s.im_n2.assign(m, 0.0);
    s.beyond_limit.assign(m, false);
}

void finish_series(CorrelatorSeries& s, int n_atoms) {
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        if (s.P[k] > 1e-12) {
            s.g2[k] = s.G2[k] / (s.P[k] * s.P[k]);
        } else {
            s.g2[k] = 0.0;
            s.g2_unbounded[k] = true;
        }
        s.g2_lo[k] = s.g2[k];
        s.g2_hi[k] = s.g2[k];
    }
    TLimitResult tl = compute_t_limit(s.t, s.P, n_atoms);
    s.t_limit = tl.t_limit;
    s.t_limit_window_warning = tl.window_warning;
    for (std::size_t k = 0; k < s.t.size(); ++k)
        s.beyond_limit[k] = s.t[k] > s.t_limit + 1e-12;
}

}  // namespace

OracleResult evolve_cascaded_exact(const SystemParams& params,
                                   const InitialState& init,
                                   const OracleOptions& options) {
    const int n = params.n_atoms;
    if (n > 8) throw std::invalid_argument("exact solver limited to 8 atoms");
    if (auto err = validate(params, init)) throw std::invalid_argument(*err);

    const int dim = 1 << n;
    std::vector<SparseC> sigma;
    sigma.reserve(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) sigma.push_back(lowering_op(a, n));

    // Collective jump C = sum_n sqrt(beta_n) sigma_n and cascade Hamiltonian
    // H_casc = -(i/2) sum_{k<n} sqrt(beta_k beta_n) (sigma_n^dag sigma_k - h.c.).
    SparseC C(dim, dim);
    for (int a = 0; a < n; ++a) C = C + SparseC(std::sqrt(params.beta[a]) * sigma[a]);
    SparseC Cd = SparseC(C.adjoint());
    SparseC casc(dim, dim);
    for (int k = 0; k < n; ++k)
        for (int m = k + 1; m < n; ++m) {
            double g = std::sqrt(params.beta[k] * params.beta[m]);
            SparseC up = SparseC(sigma[m].adjoint() * sigma[k]);
            casc = casc + SparseC(complexd(0.0, -0.5) * g * up) +
                   SparseC(complexd(0.0, 0.5) * g * SparseC(up.adjoint()));
        }

    // Non-Hermitian damping part: C^dag C plus the non-guided channels.
    SparseC damping = SparseC(Cd * C);
    std::vector<SparseC> free_jumps, free_jumps_dag;
    std::vector<double> free_rates;
    for (int a = 0; a < n; ++a) {
        double r = 1.0 - params.beta[a];
        if (r > 0.0) {
            free_jumps.push_back(sigma[a]);
            free_jumps_dag.push_back(SparseC(sigma[a].adjoint()));
            free_rates.push_back(r);
            damping = damping + SparseC(r * SparseC(sigma[a].adjoint() * sigma[a]));
        }
    }

    // S^2 with S_a = (1/2) sum_n sigma_a^(n).
    DenseC s2op = DenseC::Zero(dim, dim);
    {
        DenseC sx = DenseC::Zero(dim, dim), sy = DenseC::Zero(dim, dim),
               sz = DenseC::Zero(dim, dim);
        for (int a = 0; a < n; ++a) {
            DenseC low = DenseC(sigma[a]);
            DenseC raise = low.adjoint();
            sx += 0.5 * (low + raise);
            sy += 0.5 * complexd(0.0, 1.0) * (low - raise);
            sz += 0.5 * (raise * low - low * raise);  // [s+,s-] = sigma_z per atom
        }
        s2op = sx * sx + sy * sy + sz * sz;
    }

    RecordGrid grid = make_grid(params.t_end, options.dt, options.output_stride);
    OracleResult out;
    init_series(out.series, grid.t.size());
    out.series.t = grid.t;
    out.invariants.min_eigenvalue = 1.0;

    DenseC rho = product_state(init);
    const DenseC c_dense = DenseC(C);

    auto rhs = [&](const DenseC& r, double t) -> DenseC {
        complexd alpha = params.drive.alpha_at(t);
        DenseC k = casc * r;
        if (alpha != complexd(0.0, 0.0)) {
            // H0 = alpha C^dag + conj(alpha) C
            k += alpha * (Cd * r) + std::conj(alpha) * (C * r);
        }
        k += complexd(0.0, -0.5) * (damping * r);
        DenseC out_m = complexd(0.0, -1.0) * k;
        out_m += out_m.adjoint().eval();
        out_m += C * (r * Cd).eval();
        for (std::size_t i = 0; i < free_jumps.size(); ++i)
            out_m += free_rates[i] * (free_jumps[i] * (r * free_jumps_dag[i]).eval());
        return out_m;
    };

    std::size_t rec = 0;
    const double dt = options.dt;
    for (std::uint64_t s = 0; s <= grid.n_steps; ++s) {
        double t = static_cast<double>(s) * dt;
        if (rec < grid.at.size() && grid.at[rec] == s) {
            complexd alpha = params.drive.alpha_at(t);
            DenseC a_op = complexd(0.0, -1.0) * c_dense;
            a_op.diagonal().array() += alpha;
            DenseC a2 = a_op * a_op;
            complexd e_val = (a_op * rho).trace();
            double p_val = ((a_op.adjoint() * a_op) * rho).trace().real();
            double g2_val = ((a2.adjoint() * a2) * rho).trace().real();
            double s2_val = (s2op * rho).trace().real();
            out.series.E[rec] = e_val;
            out.series.P[rec] = p_val;
            out.series.G2[rec] = g2_val;
            out.series.S2[rec] = s2_val;

            if (options.check_invariants) {
                double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
                double tr_err = std::abs(rho.trace().real() - 1.0) +
                                std::abs(rho.trace().imag());
                out.invariants.max_hermiticity_error =
                    std::max(out.invariants.max_hermiticity_error, herm);
                out.invariants.max_trace_error =
                    std::max(out.invariants.max_trace_error, tr_err);
                Eigen::SelfAdjointEigenSolver<DenseC> es(
                    0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
                out.invariants.min_eigenvalue =
                    std::min(out.invariants.min_eigenvalue, es.eigenvalues().minCoeff());
            }
            ++rec;
        }
        if (s == grid.n_steps) break;

        DenseC k1 = rhs(rho, t);
        DenseC k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt);
        DenseC k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt);
        DenseC k4 = rhs(rho + dt * k3, t + dt);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    finish_series(out.series, n);
    return out;
}

OracleResult evolve_dicke(int n_atoms, const BlochVector& init, double t_end,
                          const OracleOptions& options) {
    double norm2 = init.u * init.u + init.v * init.v + init.w * init.w;
    if (std::abs(norm2 - 1.0) > 1e-9)
        throw std::invalid_argument("collective reference needs a pure initial state");

    const int d = n_atoms + 1;  // m = j - i for row i, j = N/2
    const double j = 0.5 * n_atoms;
    std::vector<double> rate(static_cast<std::size_t>(d));  // S-|m> coefficient^2
    for (int i = 0; i < d; ++i) {
        double m = j - i;
        rate[static_cast<std::size_t>(i)] = j * (j + 1.0) - m * (m - 1.0);
    }

    RecordGrid grid = make_grid(t_end, options.dt, options.output_stride);
    OracleResult out;
    init_series(out.series, grid.t.size());
    out.series.t = grid.t;
    out.invariants.min_eigenvalue = 1.0;

    // Spin-coherent amplitudes c_i = sqrt(C(N,i)) a^(N-i) b^i with
    // a = <e|psi>, b = <g|psi>.
    Eigen::VectorXcd psi(d);
    {
        double a_mag = std::sqrt(std::max(0.0, 0.5 * (1.0 + init.w)));
        complexd b = a_mag > 1e-12 ? complexd(init.u, init.v) / (2.0 * a_mag)
                                   : complexd(1.0, 0.0);
        complexd a(a_mag, 0.0);
        std::vector<complexd> a_pow(static_cast<std::size_t>(d), 1.0);
        std::vector<complexd> b_pow(static_cast<std::size_t>(d), 1.0);
        for (int i = 1; i < d; ++i) {
            a_pow[static_cast<std::size_t>(i)] = a_pow[static_cast<std::size_t>(i - 1)] * a;
            b_pow[static_cast<std::size_t>(i)] = b_pow[static_cast<std::size_t>(i - 1)] * b;
        }
        double log_binom = 0.0;
        for (int i = 0; i < d; ++i) {
            if (i > 0) log_binom += std::log(static_cast<double>(n_atoms - i + 1) /
                                             static_cast<double>(i));
            psi(i) = std::exp(0.5 * log_binom) *
                     a_pow[static_cast<std::size_t>(n_atoms - i)] *
                     b_pow[static_cast<std::size_t>(i)];
        }
    }
    DenseC rho = psi * psi.adjoint();

    auto rhs = [&](const DenseC& r) -> DenseC {
        DenseC out_m = DenseC::Zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) {
                double gain = (i > 0 && l > 0)
                                  ? std::sqrt(rate[static_cast<std::size_t>(i - 1)] *
                                              rate[static_cast<std::size_t>(l - 1)])
                                  : 0.0;
                complexd g = gain ? gain * r(i - 1, l - 1) : complexd(0.0, 0.0);
                out_m(i, l) = g - 0.5 *
                    (rate[static_cast<std::size_t>(i)] + rate[static_cast<std::size_t>(l)]) *
                    r(i, l);
            }
        return out_m;
    };

    const double j2 = j * (j + 1.0);
    std::size_t rec = 0;
    const double dt = options.dt;
    for (std::uint64_t s = 0; s <= grid.n_steps; ++s) {
        if (rec < grid.at.size() && grid.at[rec] == s) {
            double p_val = 0.0, g2_val = 0.0, tr = 0.0;
            complexd e_val(0.0, 0.0);
            for (int i = 0; i < d; ++i) {
                double pop = rho(i, i).real();
                tr += pop;
                p_val += rate[static_cast<std::size_t>(i)] * pop;
                if (i + 1 < d)
                    g2_val += rate[static_cast<std::size_t>(i)] *
                              rate[static_cast<std::size_t>(i + 1)] *
                              rho(i, i).real();
                if (i + 1 < d)
                    e_val += complexd(0.0, -1.0) *
                             std::sqrt(rate[static_cast<std::size_t>(i)]) * rho(i, i + 1);
            }
            out.series.P[rec] = p_val;
            out.series.G2[rec] = g2_val;
            out.series.E[rec] = e_val;
            out.series.S2[rec] = j2 * tr;

            if (options.check_invariants) {
                double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
                out.invariants.max_hermiticity_error =
                    std::max(out.invariants.max_hermiticity_error, herm);
                out.invariants.max_trace_error =
                    std::max(out.invariants.max_trace_error, std::abs(tr - 1.0));
                Eigen::SelfAdjointEigenSolver<DenseC> es(
                    0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
                out.invariants.min_eigenvalue =
                    std::min(out.invariants.min_eigenvalue, es.eigenvalues().minCoeff());
            }
            ++rec;
        }
        if (s == grid.n_steps) break;

        DenseC k1 = rhs(rho);
        DenseC k2 = rhs(rho + 0.5 * dt * k1);
        DenseC k3 = rhs(rho + 0.5 * dt * k2);
        DenseC k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    finish_series(out.series, n_atoms);
    return out;
}

SingleAtomAnalytic analytic_single_atom(double beta, double w0, double t) {
    SingleAtomAnalytic out;
    out.population = 0.5 * (1.0 + w0) * std::exp(-t);
    out.flux = beta * out.population;
    return out;
}

}  // namespace cascade
