#include "cascade/model.hpp"

#include <cmath>
#include <sstream>

namespace cascade {

BlochVector bloch_from_pulse_area(double area) {
    return {0.0, std::sin(area), -std::cos(area)};
}

std::optional<std::string> validate(const SystemParams& params, const InitialState& init) {
    if (params.n_atoms < 1) return "n_atoms < 1";
    if (init.bloch.size() != static_cast<std::size_t>(params.n_atoms))
        return "initial state size != n_atoms";
    if (params.beta.size() != static_cast<std::size_t>(params.n_atoms))
        return "beta list size != n_atoms";
    for (std::size_t i = 0; i < params.beta.size(); ++i) {
        if (!(params.beta[i] >= 0.0 && params.beta[i] <= 1.0)) {
            std::ostringstream os;
            os << "beta out of [0,1] at atom " << (i + 1);
            return os.str();
        }
    }
    if (!(params.dt > 0.0)) return "dt <= 0";
    if (!(params.t_end >= params.dt)) return "t_end < dt";
    if (params.output_stride < 1) return "output_stride < 1";
    if (params.n_trajectories < 2) return "fewer than 2 trajectories";
    if (!(params.theta_min > 0.0 && params.theta_min < 0.1)) return "theta_min out of (0,0.1)";
    for (std::size_t i = 0; i < init.bloch.size(); ++i) {
        const auto& b = init.bloch[i];
        double norm2 = b.u * b.u + b.v * b.v + b.w * b.w;
        if (norm2 > 1.0 + 1e-12) {
            std::ostringstream os;
            os << "Bloch norm > 1 at atom " << (i + 1);
            return os.str();
        }
    }
    double prev_stop = -1e300;
    for (const auto& seg : params.drive.segments) {
        if (!(seg.t_stop > seg.t_start)) return "drive segment with t_stop <= t_start";
        if (seg.t_start < prev_stop) return "drive segments overlap or are unordered";
        prev_stop = seg.t_stop;
    }
    return std::nullopt;
}

}  // namespace cascade
