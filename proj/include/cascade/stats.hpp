#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cascade {

struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
};

// Sample mean and standard error (ddof = 1); requires n >= 2.
MeanSem mean_sem(const double* data, std::size_t n);
MeanSem mean_sem(const std::vector<double>& data);

struct RatioBand {
    double ratio = 0.0;   // mean(num) / mean(den)^2 on the full sample
    double lo = 0.0;      // 15.87 / 84.13 percentile band of the resampled ratio
    double hi = 0.0;
    bool unbounded = false;  // denominator consistent with zero
};

// Percentile bootstrap (unit blocks: trajectories are i.i.d.) for the ratio
// statistic mean(num) / mean(den)^2. Deterministic for fixed seed.
RatioBand bootstrap_ratio(const double* num, const double* den, std::size_t n,
                          int resamples, std::uint64_t seed);

// Streaming first/second-moment sums for the per-time observables; merging
// two accumulators is exact, so the block reduction order fixes the result
// bit-for-bit independent of scheduling.
struct TimeAccumulator {
    double s_re_a = 0.0, s_im_a = 0.0;
    double s_re_n1 = 0.0, s_im_n1 = 0.0;
    double s_re_n2 = 0.0, s_im_n2 = 0.0;
    double s_s2 = 0.0;
    double q_re_a = 0.0, q_im_a = 0.0;
    double q_re_n1 = 0.0, q_im_n1 = 0.0;
    double q_re_n2 = 0.0, q_im_n2 = 0.0;
    double q_s2 = 0.0;
    std::uint64_t n = 0;

    void add(double re_a, double im_a, double re_n1, double im_n1,
             double re_n2, double im_n2, double s2) {
        s_re_a += re_a;   q_re_a += re_a * re_a;
        s_im_a += im_a;   q_im_a += im_a * im_a;
        s_re_n1 += re_n1; q_re_n1 += re_n1 * re_n1;
        s_im_n1 += im_n1; q_im_n1 += im_n1 * im_n1;
        s_re_n2 += re_n2; q_re_n2 += re_n2 * re_n2;
        s_im_n2 += im_n2; q_im_n2 += im_n2 * im_n2;
        s_s2 += s2;       q_s2 += s2 * s2;
        ++n;
    }
    void merge(const TimeAccumulator& o);
};

// Mean/SEM from streamed sums (ddof = 1).
MeanSem finalize_moment(double sum, double sumsq, std::uint64_t n);

// Largest discrepancy, in units of the combined SEM, between two runs'
// P and g2 series; the two runs must share a time grid. g2 rows where either
// band is unbounded are skipped.
struct ConvergenceReport {
    double max_sigma_P = 0.0;
    double max_sigma_g2 = 0.0;
    bool pass = false;  // both maxima < 2
    std::string detail;
};

struct SeriesForConvergence {
    std::vector<double> t;
    std::vector<double> P, sem_P;
    std::vector<double> g2, g2_lo, g2_hi;
    std::vector<bool> g2_unbounded;
};

ConvergenceReport convergence_report(const SeriesForConvergence& a,
                                     const SeriesForConvergence& b);

}  // namespace cascade
