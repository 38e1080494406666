#include "cascade/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace cascade {
namespace detail {

namespace {
constexpr double kR = 3.6541528853610088;  // rightmost layer edge, 256 layers
}

ZigguratTables::ZigguratTables() {
    const double f_r = std::exp(-0.5 * kR * kR);
    // Layer area: rectangle of the base strip plus the Gaussian tail mass.
    const double v = kR * f_r + std::sqrt(1.5707963267948966) * std::erfc(kR / std::sqrt(2.0));
    x[0] = v / f_r;
    x[1] = kR;
    x[256] = 0.0;
    for (int i = 2; i < 256; ++i) {
        double arg = v / x[i - 1] + std::exp(-0.5 * x[i - 1] * x[i - 1]);
        x[i] = std::sqrt(-2.0 * std::log(arg));
        if (!(x[i] > 0.0 && x[i] < x[i - 1])) std::abort();  // table construction broke
    }
    for (int i = 0; i <= 256; ++i) y[i] = std::exp(-0.5 * x[i] * x[i]);
    for (int i = 0; i < 256; ++i)
        k[i] = static_cast<std::uint64_t>(x[i + 1] / x[i] * 0x1.0p52);
}

const ZigguratTables& ziggurat_tables() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace detail

double TrajectoryRng::tail_or_wedge(int idx, std::uint64_t mant) {
    const auto& zt = detail::ziggurat_tables();
    if (idx == 0) {
        // Gaussian tail beyond x = kR (Marsaglia's exponential-majorant scheme).
        const double r = zt.x[1];
        for (;;) {
            double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
            double u2 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
            double x = -std::log(u1) / r;
            double y = -std::log(u2);
            if (y + y >= x * x) return r + x;
        }
    }
    double u = static_cast<double>(mant) * 0x1.0p-52;
    double v = u * zt.x[static_cast<std::size_t>(idx)];
    double f_lo = zt.y[static_cast<std::size_t>(idx)];       // pdf at the wide edge
    double f_hi = zt.y[static_cast<std::size_t>(idx) + 1];   // pdf at the narrow edge
    double d = uniform01();
    if (f_lo + d * (f_hi - f_lo) < std::exp(-0.5 * v * v)) return v;
    return -1.0;  // caller retries with a fresh word
}

}  // namespace cascade
