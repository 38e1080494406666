#include "cascade/engine.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cascade/sde.hpp"
#include "cascade/stats.hpp"

namespace cascade {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kHalfSqrt3 = 0.8660254037844386;
constexpr double kInvSqrt3 = 0.5773502691896258;
constexpr double kPi = 3.141592653589793;
constexpr int kBlocks = 256;  // fixed work partition -> scheduling-independent sums

struct Grid {
    std::vector<double> t;           // recorded times
    std::vector<std::uint64_t> at;   // step index of each record
    std::uint64_t n_steps = 0;
};

Grid make_grid(const SystemParams& p) {
    Grid g;
    g.n_steps = static_cast<std::uint64_t>(std::llround(p.t_end / p.dt));
    if (g.n_steps < 1) g.n_steps = 1;
    const auto stride = static_cast<std::uint64_t>(p.output_stride);
    for (std::uint64_t s = 0; s <= g.n_steps; ++s) {
        if (s % stride == 0 || s == g.n_steps) {
            g.t.push_back(static_cast<double>(s) * p.dt);
            g.at.push_back(s);
        }
    }
    return g;
}

// Degree-11/10 polynomials, |x| <= 0.2: error below 1e-17, no libm call.
inline void sincos_small(double x, double& s, double& c) {
    double y = x * x;
    if (y <= 0.04) {
        s = x * (1.0 + y * (-1.0 / 6.0 + y * (1.0 / 120.0 + y * (-1.0 / 5040.0 +
                  y * (1.0 / 362880.0 - y * (1.0 / 39916800.0))))));
        c = 1.0 + y * (-0.5 + y * (1.0 / 24.0 + y * (-1.0 / 720.0 +
                  y * (1.0 / 40320.0 - y * (1.0 / 3628800.0)))));
    } else {
        s = std::sin(x);
        c = std::cos(x);
    }
}

inline void renorm(double& s, double& c) {
    double r2 = s * s + c * c;
    double f = 1.5 - 0.5 * r2;  // first-order 1/sqrt, exact enough per step
    s *= f;
    c *= f;
}

// Per-worker scratch. The stepper tracks (theta, sin/cos theta, sin/cos phi)
// and advances the trig pairs by rotation, so the inner loop needs no libm
// sin/cos except at pole clamps and large azimuth kicks.
struct WorkerScratch {
    std::vector<double> th, sn, cs, sp, cp;
    std::vector<double> dw;
    std::vector<double> sre, sim, pop, px, py, pz;  // record-time symbols

    void resize(std::size_t n) {
        th.resize(n);
        sn.resize(n);
        cs.resize(n);
        sp.resize(n);
        cp.resize(n);
        dw.resize(n);
        sre.resize(n);
        sim.resize(n);
        pop.resize(n);
        px.resize(n);
        py.resize(n);
        pz.resize(n);
    }
};

struct AtomConstants {
    std::vector<double> beta, rb, half_b, two_rb, onemb, sqrt_onemb;
    double th_min = 0.0, th_max = 0.0;
    double sin_min = 0.0, cos_min = 0.0, cos_max = 0.0;

    explicit AtomConstants(const SystemParams& p) {
        const std::size_t n = p.beta.size();
        beta = p.beta;
        rb.resize(n);
        half_b.resize(n);
        two_rb.resize(n);
        onemb.resize(n);
        sqrt_onemb.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rb[i] = std::sqrt(beta[i]);
            half_b[i] = 0.5 * beta[i];
            two_rb[i] = 2.0 * rb[i];
            onemb[i] = 1.0 - beta[i];
            sqrt_onemb[i] = std::sqrt(std::max(0.0, onemb[i]));
        }
        th_min = p.theta_min;
        th_max = kPi - p.theta_min;
        sin_min = std::sin(th_min);   // sin is symmetric about pi/2
        cos_min = std::cos(th_min);
        cos_max = std::cos(th_max);
    }
};

struct BlockResult {
    std::vector<TimeAccumulator> acc;
};

class EnsembleRunner {
public:
    EnsembleRunner(const SystemParams& p, const InitialState& init,
                   const EngineOptions& opt, const Grid& grid,
                   EnsembleAccumulator& ens)
        : p_(p), init_(init), opt_(opt), grid_(grid), ens_(ens), consts_(p) {
        blocks_.resize(kBlocks);
    }

    void run(int workers) {
        next_block_.store(0);
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int i = 0; i < workers; ++i)
                pool.emplace_back([this] { work(); });
            for (auto& th : pool) th.join();
        }
        // Deterministic reduction: merge partial sums in block order.
        for (int b = 0; b < kBlocks; ++b) {
            if (blocks_[static_cast<std::size_t>(b)].acc.empty()) continue;
            for (std::size_t k = 0; k < grid_.t.size(); ++k)
                ens_.acc[k].merge(blocks_[static_cast<std::size_t>(b)].acc[k]);
        }
    }

    bool saw_nonfinite() const { return nonfinite_.load(); }

private:
    void work() {
        WorkerScratch scratch;
        scratch.resize(static_cast<std::size_t>(p_.n_atoms));
        const std::uint64_t n_traj = p_.n_trajectories;
        for (;;) {
            int b = next_block_.fetch_add(1);
            if (b >= kBlocks) break;
            std::uint64_t j0 = n_traj * static_cast<std::uint64_t>(b) / kBlocks;
            std::uint64_t j1 = n_traj * static_cast<std::uint64_t>(b + 1) / kBlocks;
            if (j0 == j1) continue;
            BlockResult res;
            res.acc.assign(grid_.t.size(), TimeAccumulator{});
            for (std::uint64_t j = j0; j < j1; ++j) {
                TrajectoryRng rng(p_.seed, j);
                if (opt_.reference_stepper)
                    run_reference(j, rng, res);
                else
                    run_fast(j, rng, scratch, res);
            }
            blocks_[static_cast<std::size_t>(b)] = std::move(res);
        }
    }

    void record_from_symbols(std::uint64_t traj, std::size_t k, complexd alpha,
                             const double* s_re, const double* s_im,
                             const double* pop, const double* px,
                             const double* py, const double* pz,
                             BlockResult& res) {
        const std::size_t n = static_cast<std::size_t>(p_.n_atoms);
        double ar = alpha.real(), ai = alpha.imag();
        double n1 = ar * ar + ai * ai;
        double n2 = n1 * n1;
        double m12r = n1 * ar, m12i = n1 * ai;
        double a2r = ar * ar - ai * ai, a2i = 2.0 * ar * ai;
        double sx = 0.0, sy = 0.0, sz = 0.0, qq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double rb = consts_.rb[i], b = consts_.beta[i];
            const double sre = s_re[i], sim = s_im[i], p = pop[i];
            double im_cs_a = sre * ai - sim * ar;
            double im_cs_m = sre * m12i - sim * m12r;
            double qre = 2.0 * n1 * sre - (sre * a2r + sim * a2i);
            double qim = 2.0 * n1 * sim - (sre * a2i - sim * a2r);
            double sa_re = sre * ar - sim * ai;
            double sa_im = sre * ai + sim * ar;
            double n1n = n1 - 2.0 * rb * im_cs_a + b * p;
            double n2n = n2 - 4.0 * rb * im_cs_m + 4.0 * b * n1 * p;
            double m12rn = m12r + rb * qim + 2.0 * b * p * ar;
            double m12in = m12i - rb * qre + 2.0 * b * p * ai;
            double a2rn = a2r + 2.0 * rb * sa_im;
            double a2in = a2i - 2.0 * rb * sa_re;
            double arn = ar + rb * sim;
            double ain = ai - rb * sre;
            n1 = n1n; n2 = n2n;
            m12r = m12rn; m12i = m12in;
            a2r = a2rn; a2i = a2in;
            ar = arn; ai = ain;

            sx += px[i]; sy += py[i]; sz += pz[i];
            qq += px[i] * px[i] + py[i] * py[i] + pz[i] * pz[i];
        }
        double s2 = 0.75 * static_cast<double>(n)
                    + 0.25 * (sx * sx + sy * sy + sz * sz - qq);
        if (!(std::isfinite(n1) && std::isfinite(n2) && std::isfinite(s2) &&
              std::isfinite(ar) && std::isfinite(ai)))
            nonfinite_.store(true);
        res.acc[k].add(ar, ai, n1, 0.0, n2, 0.0, s2);
        ens_.traj_n1[k * ens_.n_traj + traj] = n1;
        ens_.traj_n2[k * ens_.n_traj + traj] = n2;
    }

    void record_reference(std::uint64_t traj, std::size_t k, double t,
                          const PhaseConfig& cfg, BlockResult& res) {
        complexd alpha = p_.drive.alpha_at(t);
        FieldMoments fm = propagate_field_moments(cfg, p_.beta, alpha);
        double s2 = s_squared_symbol(cfg);
        if (!(std::isfinite(fm.w_n1.real()) && std::isfinite(fm.w_n2.real()) &&
              std::isfinite(s2) && std::isfinite(fm.w_a.real()) &&
              std::isfinite(fm.w_a.imag())))
            nonfinite_.store(true);
        res.acc[k].add(fm.w_a.real(), fm.w_a.imag(), fm.w_n1.real(), fm.w_n1.imag(),
                       fm.w_n2.real(), fm.w_n2.imag(), s2);
        ens_.traj_n1[k * ens_.n_traj + traj] = fm.w_n1.real();
        ens_.traj_n2[k * ens_.n_traj + traj] = fm.w_n2.real();
    }

    void run_reference(std::uint64_t traj, TrajectoryRng& rng, BlockResult& res) {
        PhaseConfig cfg = sample_initial(init_, rng);
        std::size_t k = 0;
        for (std::uint64_t s = 0; s <= grid_.n_steps; ++s) {
            double t = static_cast<double>(s) * p_.dt;
            if (k < grid_.at.size() && grid_.at[k] == s) {
                record_reference(traj, k, t, cfg, res);
                ++k;
            }
            if (s < grid_.n_steps) step(cfg, t, p_.dt, p_, rng);
        }
    }

    void run_fast(std::uint64_t traj, TrajectoryRng& rng, WorkerScratch& w,
                  BlockResult& res) {
        const std::size_t n = static_cast<std::size_t>(p_.n_atoms);
        {
            PhaseConfig cfg = sample_initial(init_, rng);
            for (std::size_t i = 0; i < n; ++i) {
                w.th[i] = cfg.theta[i];
                w.sn[i] = std::sin(cfg.theta[i]);
                w.cs[i] = std::cos(cfg.theta[i]);
                w.sp[i] = std::sin(cfg.phi[i]);
                w.cp[i] = std::cos(cfg.phi[i]);
            }
        }
        const double dt = p_.dt;
        const double sqdt = std::sqrt(dt);
        const bool driven = !p_.drive.is_zero();
        std::size_t k = 0;

        for (std::uint64_t s = 0; s <= grid_.n_steps; ++s) {
            double t = static_cast<double>(s) * dt;
            if (k < grid_.at.size() && grid_.at[k] == s) {
                for (std::size_t i = 0; i < n; ++i) {
                    double hs = kHalfSqrt3 * w.sn[i];
                    w.sre[i] = hs * w.cp[i];
                    w.sim[i] = -hs * w.sp[i];
                    w.pop[i] = 0.5 + kHalfSqrt3 * w.cs[i];
                    w.px[i] = kSqrt3 * w.sn[i] * w.cp[i];
                    w.py[i] = kSqrt3 * w.sn[i] * w.sp[i];
                    w.pz[i] = kSqrt3 * w.cs[i];
                }
                record_from_symbols(traj, k, p_.drive.alpha_at(t), w.sre.data(),
                                    w.sim.data(), w.pop.data(), w.px.data(),
                                    w.py.data(), w.pz.data(), res);
                ++k;
            }
            if (s == grid_.n_steps) break;

            for (std::size_t i = 0; i < n; ++i) w.dw[i] = sqdt * rng.normal();
            double zr = sqdt * rng.normal();
            double zi = sqdt * rng.normal();
            complexd alpha = driven ? p_.drive.alpha_at(t) : complexd(0.0, 0.0);
            double wr = alpha.real(), wi = alpha.imag();

            for (std::size_t i = 0; i < n; ++i) {
                const double sn = w.sn[i], cs = w.cs[i];
                const double sp = w.sp[i], cp = w.cp[i];
                const double inv_sn = 1.0 / sn;
                const double cot = cs * inv_sn;
                const double q = cot + inv_sn * kInvSqrt3;

                double dtheta, dphi;
                {
                    const double fr = consts_.half_b[i] * (cot + kSqrt3 * sn) -
                                      consts_.two_rb[i] * (cp * wi + sp * wr);
                    const double fi = consts_.two_rb[i] * (cp * wr - sp * wi);
                    const double gr = -consts_.rb[i] * (cp * zr - sp * zi);
                    const double gi = -consts_.rb[i] * (cp * zi + sp * zr);
                    double f0 = consts_.onemb[i] * q;
                    dtheta = (f0 + fr) * dt + gr;
                    dphi = -cot * (fi * dt + gi);
                    if (consts_.onemb[i] > 0.0) {
                        double rad = 1.0 + 2.0 * cot * q;
                        if (rad < 0.0) rad = 0.0;
                        dphi += consts_.sqrt_onemb[i] * std::sqrt(rad) * w.dw[i];
                    }
                }

                // chain field update with the pre-step symbol of this atom
                const double hs = kHalfSqrt3 * sn;
                wr -= consts_.rb[i] * hs * sp;
                wi -= consts_.rb[i] * hs * cp;

                // advance theta
                double th_new = w.th[i] + dtheta;
                if (th_new < consts_.th_min) {
                    w.th[i] = consts_.th_min;
                    w.sn[i] = consts_.sin_min;
                    w.cs[i] = consts_.cos_min;
                } else if (th_new > consts_.th_max) {
                    w.th[i] = consts_.th_max;
                    w.sn[i] = consts_.sin_min;
                    w.cs[i] = consts_.cos_max;
                } else {
                    double s1, c1;
                    sincos_small(dtheta, s1, c1);
                    double ns = sn * c1 + cs * s1;
                    double nc = cs * c1 - sn * s1;
                    renorm(ns, nc);
                    w.th[i] = th_new;
                    w.sn[i] = ns;
                    w.cs[i] = nc;
                }

                // advance phi by rotating its trig pair
                double s2c, c2c;
                sincos_small(dphi, s2c, c2c);
                double nsp = sp * c2c + cp * s2c;
                double ncp = cp * c2c - sp * s2c;
                renorm(nsp, ncp);
                w.sp[i] = nsp;
                w.cp[i] = ncp;
            }
        }
    }

    const SystemParams& p_;
    const InitialState& init_;
    const EngineOptions& opt_;
    const Grid& grid_;
    EnsembleAccumulator& ens_;
    AtomConstants consts_;
    std::vector<BlockResult> blocks_;
    std::atomic<int> next_block_{0};
    std::atomic<bool> nonfinite_{false};
};

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CASCADE_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace

RunResult run_ensemble(const SystemParams& params, const InitialState& init,
                       const EngineOptions& options) {
    if (auto err = validate(params, init))
        throw std::invalid_argument(*err);

    const auto t_start = std::chrono::steady_clock::now();
    Grid grid = make_grid(params);

    EnsembleAccumulator ens;
    ens.init(grid.t.size(), params.n_trajectories);

    EnsembleRunner runner(params, init, options, grid, ens);
    runner.run(resolve_workers(options.workers));

    RunResult out;
    out.n_trajectories = params.n_trajectories;
    out.series = estimate_series(grid.t, ens, params.n_atoms,
                                 {options.bootstrap_resamples, params.seed});

    // Per-trajectory emitted energy: trapezoid over the recorded grid.
    {
        const std::size_t m = grid.t.size();
        std::vector<double> wgt(m, 0.0);
        if (m >= 2) {
            wgt[0] = 0.5 * (grid.t[1] - grid.t[0]);
            wgt[m - 1] = 0.5 * (grid.t[m - 1] - grid.t[m - 2]);
            for (std::size_t k = 1; k + 1 < m; ++k)
                wgt[k] = 0.5 * (grid.t[k + 1] - grid.t[k - 1]);
        }
        std::vector<double> energy(ens.n_traj, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double* row = ens.traj_n1.data() + k * ens.n_traj;
            for (std::uint64_t j = 0; j < ens.n_traj; ++j)
                energy[j] += wgt[k] * row[j];
        }
        MeanSem ms = mean_sem(energy);
        out.energy = {ms.mean, ms.sem};
    }

    if (runner.saw_nonfinite())
        out.warnings.push_back("non-finite trajectory observables detected");
    if (out.series.t_limit_window_warning)
        out.warnings.push_back(
            "tail emission below threshold everywhere: t_limit pinned to t_end");
    if (!out.series.P.empty() && out.series.P.front() > 0.0 &&
        out.series.P.back() > 1e-4 * out.series.P.front())
        out.warnings.push_back(
            "P(t_end) exceeds P(0)/1e4: window may cut off late-time emission");

    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return out;
}

}  // namespace cascade
