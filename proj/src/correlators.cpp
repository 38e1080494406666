#include "cascade/correlators.hpp"

#include <cmath>
#include <limits>

namespace cascade {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

FieldMoments propagate_field_moments(const PhaseConfig& omega,
                                     const std::vector<double>& beta,
                                     complexd alpha) {
    // Thread the field operators' symbols through the chain. Per atom the
    // output field is a' = a - i sqrt(beta) sigma; normally ordered moments
    // pick up the commutator terms, which is where the beta * w_pop pieces
    // come from. All updates use the pre-atom values (synchronous update).
    const double a_abs2 = std::norm(alpha);
    complexd a = alpha;
    complexd n1 = a_abs2;
    complexd n2 = a_abs2 * a_abs2;
    complexd m12 = a_abs2 * alpha;  // symbol of a^dag a a
    complexd a2 = alpha * alpha;    // symbol of a a
    const complexd im(0.0, 1.0);

    for (std::size_t n = 0; n < omega.size(); ++n) {
        double st = std::sin(omega.theta[n]);
        double ct = std::cos(omega.theta[n]);
        complexd s = 0.5 * kSqrt3 * st *
                     complexd(std::cos(omega.phi[n]), -std::sin(omega.phi[n]));
        double p = 0.5 * (1.0 + kSqrt3 * ct);
        double rb = std::sqrt(beta[n]);

        complexd cs_a = std::conj(s) * a;
        complexd cs_m = std::conj(s) * m12;
        complexd a_new = a - im * rb * s;
        complexd n1_new = n1 + im * rb * (cs_a - std::conj(cs_a)) + beta[n] * p;
        complexd n2_new = n2 + 2.0 * im * rb * (cs_m - std::conj(cs_m))
                          + 4.0 * beta[n] * n1.real() * p;
        complexd m12_new = m12 - im * rb * (2.0 * n1.real() * s - std::conj(s) * a2)
                           + 2.0 * beta[n] * p * a;
        complexd a2_new = a2 - 2.0 * im * rb * s * a;

        a = a_new;
        n1 = n1_new;
        n2 = n2_new;
        m12 = m12_new;
        a2 = a2_new;
    }
    FieldMoments out;
    out.w_a = a;
    out.w_n1 = n1;
    out.w_n2 = n2;
    out.w_12 = m12;
    out.w_02 = a2;
    return out;
}

double s_squared_symbol(const PhaseConfig& omega) {
    const std::size_t n_atoms = omega.size();
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double qx = 0.0, qy = 0.0, qz = 0.0;
    for (std::size_t n = 0; n < n_atoms; ++n) {
        double st = std::sin(omega.theta[n]);
        double x = kSqrt3 * st * std::cos(omega.phi[n]);
        double y = kSqrt3 * st * std::sin(omega.phi[n]);
        double z = kSqrt3 * std::cos(omega.theta[n]);
        sx += x; qx += x * x;
        sy += y; qy += y * y;
        sz += z; qz += z * z;
    }
    // (sigma^a)^2 = 1 fixes the diagonal at 3N/4; the cross terms use the
    // pairwise products of single-atom symbols.
    return 0.75 * static_cast<double>(n_atoms)
           + 0.25 * ((sx * sx - qx) + (sy * sy - qy) + (sz * sz - qz));
}

TLimitResult compute_t_limit(const std::vector<double>& t,
                             const std::vector<double>& P, int n_atoms) {
    TLimitResult out;
    const double threshold = static_cast<double>(n_atoms) / 1000.0;
    const std::size_t m = t.size();
    if (m < 2) {
        out.t_limit = m ? t.back() : 0.0;
        out.window_warning = true;
        return out;
    }
    // Tail integrals by trapezoid, accumulated from the right.
    double tail = 0.0;
    std::size_t best = m;  // index of t_limit; m = none found yet
    for (std::size_t k = m - 1; k-- > 0;) {
        tail += 0.5 * (P[k] + P[k + 1]) * (t[k + 1] - t[k]);
        if (tail >= threshold) {
            best = k;
            break;
        }
    }
    if (best == m) {
        out.t_limit = t.back();
        out.window_warning = true;
    } else {
        out.t_limit = t[best];
        out.window_warning = false;
    }
    return out;
}

void EnsembleAccumulator::init(std::size_t n_times_, std::uint64_t n_traj_) {
    n_times = n_times_;
    n_traj = n_traj_;
    acc.assign(n_times, TimeAccumulator{});
    traj_n1.assign(n_times * n_traj, 0.0);
    traj_n2.assign(n_times * n_traj, 0.0);
}

CorrelatorSeries estimate_series(const std::vector<double>& t_grid,
                                 const EnsembleAccumulator& ens, int n_atoms,
                                 const BootstrapConfig& bootstrap) {
    const std::size_t m = t_grid.size();
    CorrelatorSeries s;
    s.t = t_grid;
    s.E.resize(m);
    s.P.resize(m);
    s.G2.resize(m);
    s.g2.resize(m);
    s.S2.resize(m);
    s.sem_P.resize(m);
    s.sem_G2.resize(m);
    s.sem_E_re.resize(m);
    s.sem_E_im.resize(m);
    s.g2_lo.resize(m);
    s.g2_hi.resize(m);
    s.g2_unbounded.resize(m);
    s.sem_S2.resize(m);
    s.im_n1.resize(m);
    s.im_n2.resize(m);
    s.beyond_limit.resize(m);

    for (std::size_t k = 0; k < m; ++k) {
        const TimeAccumulator& a = ens.acc[k];
        MeanSem re_a = finalize_moment(a.s_re_a, a.q_re_a, a.n);
        MeanSem im_a = finalize_moment(a.s_im_a, a.q_im_a, a.n);
        MeanSem re_n1 = finalize_moment(a.s_re_n1, a.q_re_n1, a.n);
        MeanSem im_n1 = finalize_moment(a.s_im_n1, a.q_im_n1, a.n);
        MeanSem re_n2 = finalize_moment(a.s_re_n2, a.q_re_n2, a.n);
        MeanSem im_n2 = finalize_moment(a.s_im_n2, a.q_im_n2, a.n);
        MeanSem s2 = finalize_moment(a.s_s2, a.q_s2, a.n);

        s.E[k] = complexd(re_a.mean, im_a.mean);
        s.sem_E_re[k] = re_a.sem;
        s.sem_E_im[k] = im_a.sem;
        s.P[k] = re_n1.mean;
        s.sem_P[k] = re_n1.sem;
        s.G2[k] = re_n2.mean;
        s.sem_G2[k] = re_n2.sem;
        s.S2[k] = s2.mean;
        s.sem_S2[k] = s2.sem;
        s.im_n1[k] = im_n1.mean;
        s.im_n2[k] = im_n2.mean;

        RatioBand band = bootstrap_ratio(ens.traj_n2.data() + k * ens.n_traj,
                                         ens.traj_n1.data() + k * ens.n_traj,
                                         ens.n_traj, bootstrap.resamples,
                                         splitmix64(bootstrap.seed) ^ (0x67320000ULL + k));
        s.g2[k] = band.ratio;
        s.g2_lo[k] = band.lo;
        s.g2_hi[k] = band.hi;
        s.g2_unbounded[k] = band.unbounded;
    }

    TLimitResult tl = compute_t_limit(s.t, s.P, n_atoms);
    s.t_limit = tl.t_limit;
    s.t_limit_window_warning = tl.window_warning;
    for (std::size_t k = 0; k < m; ++k)
        s.beyond_limit[k] = s.t[k] > s.t_limit + 1e-12;
    return s;
}

}  // namespace cascade
