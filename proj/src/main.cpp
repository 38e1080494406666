#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cascade/engine.hpp"
#include "cascade/io.hpp"
#include "cascade/oracle.hpp"
#include "cascade/phase_space.hpp"
#include "cascade/rng.hpp"
#include "cascade/stats.hpp"

namespace {

using namespace cascade;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CliOverrides {
    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t trajectories = 0;
    double dt = 0.0;
    double t_end = 0.0;
    std::string out;
    int workers = -1;
    std::string format;
    bool has_seed = false, has_traj = false, has_dt = false, has_tend = false;
    bool has_out = false, has_workers = false, has_format = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "key=value config file");
    cmd->add_option("--seed", ov.seed, "RNG seed")->each([&](const std::string&) {
        ov.has_seed = true;
    });
    cmd->add_option("--trajectories", ov.trajectories, "trajectory count")
        ->each([&](const std::string&) { ov.has_traj = true; });
    cmd->add_option("--dt", ov.dt, "integrator step")->each([&](const std::string&) {
        ov.has_dt = true;
    });
    cmd->add_option("--t-end", ov.t_end, "simulated horizon")
        ->each([&](const std::string&) { ov.has_tend = true; });
    cmd->add_option("--out", ov.out, "output path (default stdout)")
        ->each([&](const std::string&) { ov.has_out = true; });
    cmd->add_option("--workers", ov.workers, "worker threads (0 = auto)")
        ->each([&](const std::string&) { ov.has_workers = true; });
    cmd->add_option("--format", ov.format, "csv or json")
        ->each([&](const std::string&) { ov.has_format = true; });
}

int load_config(const CliOverrides& ov, const std::string& mode, RunConfig& cfg) {
    if (!ov.config_path.empty()) {
        ConfigParseResult parsed = parse_config_file(ov.config_path);
        if (parsed.error) {
            std::cerr << "config error: " << *parsed.error << "\n";
            return kExitConfig;
        }
        cfg = parsed.config;
    }
    cfg.mode = mode;
    if (ov.has_seed) cfg.params.seed = ov.seed;
    if (ov.has_traj) cfg.params.n_trajectories = ov.trajectories;
    if (ov.has_dt) cfg.params.dt = ov.dt;
    if (ov.has_tend) cfg.params.t_end = ov.t_end;
    if (ov.has_out) cfg.out_path = ov.out;
    if (ov.has_workers) cfg.workers = ov.workers;
    if (ov.has_format) cfg.format = ov.format;
    if (cfg.init.bloch.empty()) cfg.init = InitialState::inverted(cfg.params.n_atoms);
    if (cfg.params.beta.empty())
        cfg.params.beta.assign(static_cast<std::size_t>(cfg.params.n_atoms), 1.0);
    if (auto err = validate(cfg.params, cfg.init)) {
        std::cerr << "config error: " << *err << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

int write_output(const RunConfig& cfg, const std::string& table,
                 const std::string& sidecar) {
    if (cfg.out_path.empty()) {
        std::cout << table;
        return kExitOk;
    }
    std::ofstream f(cfg.out_path);
    if (!f) {
        std::cerr << "cannot write '" << cfg.out_path << "'\n";
        return kExitConfig;
    }
    f << table;
    if (!sidecar.empty()) {
        std::ofstream m(cfg.out_path + ".meta.json");
        if (m) m << sidecar;
    }
    return kExitOk;
}

SeriesForConvergence to_convergence(const CorrelatorSeries& s) {
    SeriesForConvergence c;
    c.t = s.t;
    c.P = s.P;
    c.sem_P = s.sem_P;
    c.g2 = s.g2;
    c.g2_lo = s.g2_lo;
    c.g2_hi = s.g2_hi;
    c.g2_unbounded = s.g2_unbounded;
    return c;
}

int run_simulate(const RunConfig& cfg) {
    EngineOptions opt;
    opt.workers = cfg.workers;
    opt.bootstrap_resamples = cfg.bootstrap_resamples;
    RunResult result = run_ensemble(cfg.params, cfg.init, opt);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::string table = cfg.format == "json" ? series_to_json(result.series)
                                             : series_to_csv(result.series);
    int rc = write_output(cfg, table, sidecar_json(cfg, result));
    if (rc != kExitOk) return rc;
    for (const auto& w : result.warnings)
        if (w.find("non-finite") != std::string::npos) return kExitNumerical;
    return kExitOk;
}

int oracle_invariants_gate(const OracleInvariantReport& inv) {
    if (inv.max_hermiticity_error > 1e-10 || inv.max_trace_error > 1e-10 ||
        inv.min_eigenvalue < -1e-8) {
        std::cerr << "oracle invariant violation: hermiticity "
                  << inv.max_hermiticity_error << ", trace " << inv.max_trace_error
                  << ", min eigenvalue " << inv.min_eigenvalue << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int run_oracle(const RunConfig& cfg) {
    OracleOptions opt;
    opt.dt = cfg.oracle_dt;
    opt.output_stride = cfg.params.output_stride;
    OracleResult result = evolve_cascaded_exact(cfg.params, cfg.init, opt);
    std::string table = cfg.format == "json" ? series_to_json(result.series)
                                             : series_to_csv(result.series);
    int rc = write_output(cfg, table, "");
    if (rc != kExitOk) return rc;
    return oracle_invariants_gate(result.invariants);
}

int run_dicke(const RunConfig& cfg) {
    OracleOptions opt;
    opt.dt = cfg.oracle_dt;
    opt.output_stride = cfg.params.output_stride;
    OracleResult result =
        evolve_dicke(cfg.params.n_atoms, cfg.init.bloch.at(0), cfg.params.t_end, opt);
    std::string table = cfg.format == "json" ? series_to_json(result.series)
                                             : series_to_csv(result.series);
    int rc = write_output(cfg, table, "");
    if (rc != kExitOk) return rc;
    return oracle_invariants_gate(result.invariants);
}

int run_compare(const RunConfig& cfg) {
    if (cfg.params.n_atoms > 8) {
        std::cerr << "config error: compare needs n_atoms <= 8\n";
        return kExitConfig;
    }
    EngineOptions eopt;
    eopt.workers = cfg.workers;
    eopt.bootstrap_resamples = cfg.bootstrap_resamples;
    RunResult twa = run_ensemble(cfg.params, cfg.init, eopt);

    OracleOptions oopt;
    oopt.dt = cfg.oracle_dt;
    double grid_dt = cfg.params.dt * cfg.params.output_stride;
    double stride = grid_dt / cfg.oracle_dt;
    oopt.output_stride = static_cast<int>(std::llround(stride));
    if (oopt.output_stride < 1 ||
        std::abs(oopt.output_stride * cfg.oracle_dt - grid_dt) > 1e-12) {
        std::cerr << "config error: oracle_dt does not divide the record spacing\n";
        return kExitConfig;
    }
    OracleResult exact = evolve_cascaded_exact(cfg.params, cfg.init, oopt);

    ConvergenceReport rep = convergence_report(to_convergence(twa.series),
                                               to_convergence(exact.series));
    json j;
    j["report"] = {{"max_sigma_P", rep.max_sigma_P},
                   {"max_sigma_g2", rep.max_sigma_g2},
                   {"pass", rep.pass},
                   {"detail", rep.detail}};
    j["trajectory"] = json::parse(series_to_json(twa.series));
    j["exact"] = json::parse(series_to_json(exact.series));
    std::string table = j.dump(2) + "\n";
    int rc = write_output(cfg, table, sidecar_json(cfg, twa));
    if (rc != kExitOk) return rc;
    std::cerr << rep.detail << "\n";
    return rep.pass ? kExitOk : kExitNumerical;
}

int run_sample_check(const RunConfig& cfg) {
    const BlochVector b = cfg.init.bloch.at(0);
    const std::uint64_t n = std::max<std::uint64_t>(cfg.params.n_trajectories, 1000);
    TrajectoryRng rng(cfg.params.seed, 0);
    InitialState one = InitialState::uniform(1, b);

    double sx = 0.0, sy = 0.0, sz = 0.0, qx = 0.0, qy = 0.0, qz = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        PhaseConfig c = sample_initial(one, rng);
        SpinSymbols sym = weyl_spin_symbols(c.theta[0], c.phi[0]);
        double x = sym.w_pauli[0], y = sym.w_pauli[1], z = sym.w_pauli[2];
        sx += x; qx += x * x;
        sy += y; qy += y * y;
        sz += z; qz += z * z;
    }
    auto chan = [&](double s, double q, double target, const char* name, json& out) {
        MeanSem ms = finalize_moment(s, q, n);
        double dev = ms.sem > 0.0 ? std::abs(ms.mean - target) / ms.sem : 0.0;
        out[name] = {{"mean", ms.mean}, {"target", target}, {"sem", ms.sem},
                     {"sigma", dev}};
        return dev;
    };
    json j;
    double worst = 0.0;
    worst = std::max(worst, chan(sx, qx, b.u, "pauli_x", j));
    worst = std::max(worst, chan(sy, qy, b.v, "pauli_y", j));
    worst = std::max(worst, chan(sz, qz, b.w, "pauli_z", j));

    // Normalization identity of the azimuthal law and density positivity.
    double amp = phi_mixing_amplitude(b.u, b.v, b.w);
    double m2 = (b.u * b.u + b.v * b.v) / (3.0 - b.w * b.w);
    double identity_residual = std::abs(amp * amp - amp + 0.5 * m2);
    double min_density = 1e300;
    for (int i = 0; i < 10000; ++i) {
        double phi = 6.283185307179586 * i / 10000.0;
        min_density = std::min(min_density, azimuth_density(b.u, b.v, b.w, phi));
    }
    j["samples"] = n;
    j["identity_residual"] = identity_residual;
    j["min_density"] = min_density;
    bool pass = worst < 5.0 && identity_residual < 1e-12 && min_density >= 0.0;
    j["pass"] = pass;
    std::string table = j.dump(2) + "\n";
    int rc = write_output(cfg, table, "");
    if (rc != kExitOk) return rc;
    return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory and exact solvers for chirally coupled emitter chains"};
    app.require_subcommand(1);
    CliOverrides ov;

    CLI::App* c_sim = app.add_subcommand("simulate", "trajectory ensemble");
    CLI::App* c_oracle = app.add_subcommand("oracle", "exact master equation (N <= 8)");
    CLI::App* c_dicke = app.add_subcommand("dicke", "collective-decay reference");
    CLI::App* c_cmp = app.add_subcommand("compare", "trajectories vs exact solver");
    CLI::App* c_chk = app.add_subcommand("sample-check", "initial-state sampler audit");
    for (CLI::App* c : {c_sim, c_oracle, c_dicke, c_cmp, c_chk})
        add_common_options(c, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    std::string mode = app.get_subcommands().at(0)->get_name();
    RunConfig cfg;
    int rc = load_config(ov, mode, cfg);
    if (rc != kExitOk) return rc;

    try {
        if (mode == "simulate") return run_simulate(cfg);
        if (mode == "oracle") return run_oracle(cfg);
        if (mode == "dicke") return run_dicke(cfg);
        if (mode == "compare") return run_compare(cfg);
        if (mode == "sample-check") return run_sample_check(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
