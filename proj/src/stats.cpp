#include "cascade/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cascade/rng.hpp"

namespace cascade {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Unbiased bounded index via 128-bit multiply; modulo bias O(n/2^64).
inline std::size_t bounded_index(std::uint64_t word, std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(word) * static_cast<unsigned __int128>(n)) >> 64);
}
}  // namespace

MeanSem mean_sem(const double* data, std::size_t n) {
    if (n < 2) return {n == 1 ? data[0] : 0.0, kInf};
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data[i];
    double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = data[i] - mean;
        ss += d * d;
    }
    double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

MeanSem mean_sem(const std::vector<double>& data) {
    return mean_sem(data.data(), data.size());
}

MeanSem finalize_moment(double sum, double sumsq, std::uint64_t n) {
    if (n < 2) return {n == 1 ? sum : 0.0, kInf};
    double nn = static_cast<double>(n);
    double mean = sum / nn;
    double var = (sumsq - nn * mean * mean) / (nn - 1.0);
    if (var < 0.0) var = 0.0;  // rounding guard
    return {mean, std::sqrt(var / nn)};
}

void TimeAccumulator::merge(const TimeAccumulator& o) {
    s_re_a += o.s_re_a;   q_re_a += o.q_re_a;
    s_im_a += o.s_im_a;   q_im_a += o.q_im_a;
    s_re_n1 += o.s_re_n1; q_re_n1 += o.q_re_n1;
    s_im_n1 += o.s_im_n1; q_im_n1 += o.q_im_n1;
    s_re_n2 += o.s_re_n2; q_re_n2 += o.q_re_n2;
    s_im_n2 += o.s_im_n2; q_im_n2 += o.q_im_n2;
    s_s2 += o.s_s2;       q_s2 += o.q_s2;
    n += o.n;
}

RatioBand bootstrap_ratio(const double* num, const double* den, std::size_t n,
                          int resamples, std::uint64_t seed) {
    RatioBand out;
    MeanSem mnum = mean_sem(num, n);
    MeanSem mden = mean_sem(den, n);
    out.ratio = mnum.mean / (mden.mean * mden.mean);
    // Denominator consistent with zero: the ratio has no usable upper bound.
    out.unbounded = !(mden.mean > 0.0) || mden.mean < 5.0 * mden.sem;

    TrajectoryRng rng(seed, 0x626f6f74ULL);  // "boot"
    std::vector<double> ratios(static_cast<std::size_t>(resamples));
    const double nn = static_cast<double>(n);
    for (int b = 0; b < resamples; ++b) {
        double sn = 0.0, sd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = bounded_index(rng.next_u64(), n);
            sn += num[j];
            sd += den[j];
        }
        ratios[static_cast<std::size_t>(b)] = sd > 0.0 ? sn * nn / (sd * sd) : kInf;
    }
    std::sort(ratios.begin(), ratios.end());
    auto quantile = [&](double q) {
        auto idx = static_cast<std::size_t>(
            std::llround(q * static_cast<double>(resamples - 1)));
        return ratios[idx];
    };
    out.lo = quantile(0.1587);
    out.hi = quantile(0.8413);
    if (out.unbounded) {
        out.lo = std::min(out.lo, 0.0);
        out.hi = kInf;
    }
    return out;
}

ConvergenceReport convergence_report(const SeriesForConvergence& a,
                                     const SeriesForConvergence& b) {
    ConvergenceReport rep;
    if (a.t.size() != b.t.size()) {
        rep.detail = "time grids differ in length";
        return rep;
    }
    double worst_t_P = 0.0, worst_t_g2 = 0.0;
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        if (std::abs(a.t[k] - b.t[k]) > 1e-12) {
            rep.detail = "time grids differ";
            return rep;
        }
        double sp = std::hypot(a.sem_P[k], b.sem_P[k]);
        double dp = std::abs(a.P[k] - b.P[k]);
        if (dp > 0.0 || sp > 0.0) {
            double sig = sp > 0.0 ? dp / sp : kInf;
            if (sig > rep.max_sigma_P) {
                rep.max_sigma_P = sig;
                worst_t_P = a.t[k];
            }
        }
        if (a.g2_unbounded[k] || b.g2_unbounded[k]) continue;
        double ea = std::max(a.g2_hi[k] - a.g2[k], a.g2[k] - a.g2_lo[k]);
        double eb = std::max(b.g2_hi[k] - b.g2[k], b.g2[k] - b.g2_lo[k]);
        double se = std::hypot(ea, eb);
        double dg = std::abs(a.g2[k] - b.g2[k]);
        if (dg > 0.0 || se > 0.0) {
            double sig = se > 0.0 ? dg / se : kInf;
            if (sig > rep.max_sigma_g2) {
                rep.max_sigma_g2 = sig;
                worst_t_g2 = a.t[k];
            }
        }
    }
    rep.pass = rep.max_sigma_P < 2.0 && rep.max_sigma_g2 < 2.0;
    std::ostringstream os;
    os << "max |dP| = " << rep.max_sigma_P << " sigma at t = " << worst_t_P
       << "; max |dg2| = " << rep.max_sigma_g2 << " sigma at t = " << worst_t_g2;
    rep.detail = os.str();
    return rep;
}

}  // namespace cascade
