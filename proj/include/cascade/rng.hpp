#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace cascade {

// Stateless mixer used to derive independent stream seeds from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace detail {

// 256-layer ziggurat tables for the standard normal (Marsaglia-Tsang layout).
struct ZigguratTables {
    std::array<double, 257> x{};   // layer abscissae, x[256] = 0
    std::array<double, 257> y{};   // pdf values at x[i]
    std::array<std::uint64_t, 256> k{};  // acceptance thresholds on 52-bit mantissas

    ZigguratTables();
};

const ZigguratTables& ziggurat_tables();

}  // namespace detail

// Per-trajectory RNG: a mt19937_64 engine plus a ziggurat normal sampler.
// Seeded deterministically from (run seed, stream index) so trajectories are
// independent of worker scheduling.
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t run_seed, std::uint64_t stream_index)
        : eng_(splitmix64(splitmix64(run_seed) ^ (stream_index + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform01() {
        // 53-bit mantissa in [0,1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        const auto& zt = detail::ziggurat_tables();
        for (;;) {
            std::uint64_t r = eng_();
            int idx = static_cast<int>(r & 0xff);
            std::uint64_t mant = (r >> 8) & ((1ULL << 52) - 1);
            bool neg = (r >> 63) & 1;
            if (mant < zt.k[static_cast<std::size_t>(idx)]) {
                double v = static_cast<double>(mant) * 0x1.0p-52 * zt.x[static_cast<std::size_t>(idx)];
                return neg ? -v : v;
            }
            double v = tail_or_wedge(idx, mant);
            if (v >= 0.0) return neg ? -v : v;
        }
    }

private:
    double tail_or_wedge(int idx, std::uint64_t mant);

    std::mt19937_64 eng_;
};

}  // namespace cascade
