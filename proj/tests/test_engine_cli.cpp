#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/engine.hpp"
#include "cascade/io.hpp"
#include "cascade/oracle.hpp"
#include "cascade/stats.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cascade;

namespace {

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

std::string tmp_path(const std::string& stem) {
    std::ostringstream os;
    os << std::filesystem::temp_directory_path().string() << "/cascade_ut_"
       << ::getpid() << "_" << stem;
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(CASCADE_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("optimized and plain steppers produce the same trajectories") {
    // The trajectories are chaotic: any representation-level difference is
    // amplified exponentially, so strict agreement is only testable on a
    // short horizon. 200 steps cover every code path (drive window edge,
    // all coupling regimes, the shared-noise chain).
    SystemParams p;
    p.n_atoms = 3;
    p.beta = {0.2, 0.7, 1.0};
    p.drive.segments = {{0.0, 0.1, {0.3, 0.1}}};
    p.t_end = 0.2;
    p.output_stride = 10;
    p.n_trajectories = 50;
    p.seed = 21;
    auto init = InitialState::uniform(3, {0.3, 0.2, 0.4});

    EngineOptions fast, ref;
    ref.reference_stepper = true;
    auto a = run_ensemble(p, init, fast);
    auto b = run_ensemble(p, init, ref);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t k = 0; k < a.series.size(); ++k) {
        CHECK(std::abs(a.series.P[k] - b.series.P[k]) < 1e-12);
        CHECK(std::abs(a.series.E[k] - b.series.E[k]) < 1e-12);
        CHECK(std::abs(a.series.G2[k] - b.series.G2[k]) < 1e-12);
        CHECK(std::abs(a.series.S2[k] - b.series.S2[k]) < 1e-12);
        CHECK(std::abs(a.series.g2[k] - b.series.g2[k]) < 1e-10);
    }

    // Past the strict window the ensemble means must still agree far below
    // the sampling error (wiring bugs show up at 1e-4 or worse).
    p.t_end = 1.0;
    auto a1 = run_ensemble(p, init, fast);
    auto b1 = run_ensemble(p, init, ref);
    for (std::size_t k = 0; k < a1.series.size(); ++k) {
        CHECK(std::abs(a1.series.P[k] - b1.series.P[k]) < 1e-4);
        CHECK(std::abs(a1.series.S2[k] - b1.series.S2[k]) < 1e-4);
    }
}

TEST_CASE("results are deterministic and independent of worker count") {
    auto p = SystemParams::homogeneous(2, 0.8);
    p.t_end = 0.5;
    p.n_trajectories = 2000;
    p.seed = 9;
    auto init = InitialState::inverted(2);

    EngineOptions w1, w4;
    w1.workers = 1;
    w4.workers = 4;
    auto a = run_ensemble(p, init, w1);
    auto b = run_ensemble(p, init, w4);
    auto c = run_ensemble(p, init, w1);

    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t k = 0; k < a.series.size(); ++k) {
        // Bit-for-bit: fixed trajectory blocks merged in block order.
        CHECK(a.series.P[k] == b.series.P[k]);
        CHECK(a.series.G2[k] == b.series.G2[k]);
        CHECK(a.series.S2[k] == b.series.S2[k]);
        CHECK(a.series.E[k] == b.series.E[k]);
        CHECK(a.series.g2_lo[k] == b.series.g2_lo[k]);
        CHECK(a.series.g2_hi[k] == b.series.g2_hi[k]);
        CHECK(a.series.P[k] == c.series.P[k]);
    }
    CHECK(a.energy.mean == b.energy.mean);

    SystemParams p2 = p;
    p2.seed = 10;
    auto d = run_ensemble(p2, init, w1);
    bool any_diff = false;
    for (std::size_t k = 0; k < a.series.size(); ++k)
        any_diff = any_diff || (a.series.P[k] != d.series.P[k]);
    CHECK(any_diff);
}

TEST_CASE("halving dt moves nothing beyond statistical resolution") {
    auto p = SystemParams::homogeneous(4, 1.0);
    p.t_end = 1.0;
    p.n_trajectories = 10000;
    p.seed = 31;
    auto init = InitialState::inverted(4);

    auto coarse = run_ensemble(p, init);
    SystemParams ph = p;
    ph.dt = 5e-4;
    ph.output_stride = 100;
    ph.seed = 32;  // independent noise for an honest two-sample comparison
    auto fine = run_ensemble(ph, init);

    auto rep = convergence_report(to_convergence(coarse.series),
                                  to_convergence(fine.series));
    INFO(rep.detail);
    CHECK(rep.pass);
}

TEST_CASE("decoupled atoms produce exactly zero guided signal") {
    auto p = SystemParams::homogeneous(3, 0.0);
    p.t_end = 0.5;
    p.n_trajectories = 500;
    auto r = run_ensemble(p, InitialState::inverted(3));
    for (std::size_t k = 0; k < r.series.size(); ++k) {
        CHECK(r.series.P[k] == 0.0);
        CHECK(r.series.G2[k] == 0.0);
        CHECK(std::abs(r.series.E[k]) == 0.0);
        CHECK(r.series.sem_P[k] == 0.0);
        CHECK(r.series.g2_unbounded[k]);
        // Flux symbols are identically real; the diagnostics must be zero.
        CHECK(r.series.im_n1[k] == 0.0);
        CHECK(r.series.im_n2[k] == 0.0);
    }
    // Fully inverted start: the z-axis symbols are deterministic, so
    // <S^2>(0) = 3N/4 + N(N-1)/4 exactly, up to x/y sampling noise.
    double expect = 3.0 * 3.0 / 4.0 + 3.0 * 2.0 / 4.0;
    CHECK(std::abs(r.series.S2[0] - expect) <
          5.0 * std::max(r.series.sem_S2[0], 1e-12));
}

TEST_CASE("flux stays nonnegative within resolution and energy matches its own series") {
    auto p = SystemParams::homogeneous(2, 0.5);
    p.t_end = 2.0;
    p.n_trajectories = 4000;
    p.seed = 3;
    auto r = run_ensemble(p, InitialState::inverted(2));
    for (std::size_t k = 0; k < r.series.size(); ++k)
        CHECK(r.series.P[k] > -5.0 * r.series.sem_P[k]);

    // The energy estimator is the per-trajectory trapezoid; its mean must
    // equal the trapezoid of the mean flux (same sums, reordered).
    double trapz = 0.0;
    for (std::size_t k = 1; k < r.series.size(); ++k)
        trapz += 0.5 * (r.series.P[k] + r.series.P[k - 1]) *
                 (r.series.t[k] - r.series.t[k - 1]);
    CHECK(r.energy.mean == doctest::Approx(trapz).epsilon(1e-10));
    CHECK(r.energy.sem > 0.0);
    CHECK(r.energy.sem < 0.1 * r.energy.mean);
}

TEST_CASE("a window that cuts off emission is reported") {
    auto p = SystemParams::homogeneous(1, 1.0);
    p.t_end = 1.0;  // e^{-1} of the excitation still pending
    p.n_trajectories = 200;
    auto r = run_ensemble(p, InitialState::inverted(1));
    bool warned = false;
    for (const auto& w : r.warnings)
        warned = warned || w.find("late-time emission") != std::string::npos;
    CHECK(warned);
    CHECK(r.series.t_limit < p.t_end);
}

TEST_CASE("invalid parameters are rejected, not simulated") {
    auto p = SystemParams::homogeneous(2, 2.0);  // beta > 1
    CHECK_THROWS_AS(run_ensemble(p, InitialState::inverted(2)),
                    std::invalid_argument);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("simulate writes the pinned CSV schema plus a metadata sidecar") {
    std::string cfg = tmp_path("sim.cfg");
    std::string out = tmp_path("sim.csv");
    write_file(cfg,
               "mode = simulate\n"
               "n_atoms = 2\n"
               "beta = 0.8\n"
               "init = inverted\n"
               "t_end = 0.5\n"
               "dt = 0.001\n"
               "output_stride = 50\n"
               "trajectories = 400\n"
               "seed = 5\n");
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + out) == 0);

    std::string text = slurp(out);
    REQUIRE(!text.empty());
    std::istringstream is(text);
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "t,E_re,E_im,P,P_sem,G2,G2_sem,g2,g2_lo,g2_hi,S2,S2_sem,beyond_tlimit");
    int rows = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 11);  // 500 steps, stride 50, endpoints inclusive

    auto meta = nlohmann::json::parse(slurp(out + ".meta.json"));
    CHECK(meta["mode"] == "simulate");
    CHECK(meta["seed"] == 5);
    CHECK(meta["trajectories_run"] == 400);
    CHECK(meta["config"]["n_atoms"] == 2);
    CHECK(meta["config"]["beta"][0] == 0.8);
    CHECK(meta["t_limit"].get<double>() > 0.0);
    CHECK(meta["wall_seconds"].get<double>() > 0.0);
}

TEST_CASE("command-line flags override the config file") {
    std::string cfg = tmp_path("ovr.cfg");
    std::string out = tmp_path("ovr.csv");
    write_file(cfg,
               "n_atoms = 1\nbeta = 1.0\ninit = inverted\n"
               "t_end = 1.0\ntrajectories = 100\nseed = 1\n");
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + out +
                    " --t-end 0.2 --trajectories 250 --seed 77") == 0);
    auto meta = nlohmann::json::parse(slurp(out + ".meta.json"));
    CHECK(meta["seed"] == 77);
    CHECK(meta["trajectories_run"] == 250);
    CHECK(meta["config"]["t_end"] == 0.2);
}

TEST_CASE("worker count does not change the output bytes") {
    std::string cfg = tmp_path("wrk.cfg");
    write_file(cfg,
               "n_atoms = 2\nbeta = 0.6\ninit = inverted\n"
               "t_end = 0.4\ntrajectories = 600\nseed = 2\n");
    std::string o1 = tmp_path("wrk1.csv"), o3 = tmp_path("wrk3.csv");
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + o1 + " --workers 1") == 0);
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + o3 + " --workers 3") == 0);
    CHECK(slurp(o1) == slurp(o3));

    // The environment override goes through the same path.
    std::string oe = tmp_path("wrke.csv");
    std::string cmd = std::string("CASCADE_WORKERS=2 ") + CASCADE_CLI_PATH +
                      " simulate --config " + cfg + " --out " + oe + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 0);
    CHECK(slurp(o1) == slurp(oe));
}

TEST_CASE("json output format parses and mirrors the csv columns") {
    std::string cfg = tmp_path("json.cfg");
    std::string out = tmp_path("series.json");
    write_file(cfg,
               "n_atoms = 1\nbeta = 0.5\ninit = pulse_area\npulse_area = 1.5707963\n"
               "t_end = 0.3\ntrajectories = 300\nformat = json\n");
    REQUIRE(run_cli("simulate --config " + cfg + " --out " + out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.contains("t"));
    REQUIRE(j.contains("P"));
    CHECK(j["t"].size() == j["P"].size());
    CHECK(j["t"].size() == j["g2_unbounded"].size());
    CHECK(j.contains("t_limit"));
    // A pi/2 pulse radiates coherently: E(0) = -(sqrt(beta)/2) sin(A) = -0.354.
    double e0 = j["E_re"][0].get<double>();
    CHECK(e0 < -0.25);
    CHECK(e0 > -0.45);
}

TEST_CASE("bad configurations exit with status 2") {
    std::string cfg = tmp_path("bad.cfg");
    write_file(cfg, "n_atoms = 2\nbeta = 1.5\ninit = inverted\n");
    CHECK(run_cli("simulate --config " + cfg) == 2);

    write_file(cfg, "n_atoms = 2\nbeta = 1.0\ninit = inverted\nunknown_key = 3\n");
    CHECK(run_cli("simulate --config " + cfg) == 2);

    CHECK(run_cli("simulate --config " + tmp_path("missing.cfg")) == 2);

    write_file(cfg, "n_atoms = 1\nbeta = 1.0\ninit = bananas\n");
    CHECK(run_cli("simulate --config " + cfg) == 2);
}

TEST_CASE("oracle and collective-reference modes run from the same config") {
    std::string cfg = tmp_path("orc.cfg");
    write_file(cfg,
               "n_atoms = 2\nbeta = 1.0\ninit = inverted\nt_end = 0.5\n"
               "trajectories = 100\n");
    std::string o1 = tmp_path("orc.csv"), o2 = tmp_path("dicke.csv");
    REQUIRE(run_cli("oracle --config " + cfg + " --out " + o1) == 0);
    REQUIRE(run_cli("dicke --config " + cfg + " --out " + o2) == 0);

    // Both start from P(0) = 2 with zero statistical error.
    auto first_row = [](const std::string& path) {
        std::istringstream is(slurp(path));
        std::string line;
        std::getline(is, line);  // header
        std::getline(is, line);
        return line;
    };
    CHECK(first_row(o1).substr(0, 6) == "0,0,0,");
    CHECK(first_row(o1).find(",2,0,4,0,1,1,1,2,0,0") != std::string::npos);
    CHECK(first_row(o2).find(",2,0,4,0,1,1,1,2,0,0") != std::string::npos);
}

TEST_CASE("compare mode separates agreement from disagreement by exit code") {
    // beta = 0: the truncation is exact and both fluxes vanish identically.
    std::string cfg = tmp_path("cmp0.cfg");
    write_file(cfg,
               "n_atoms = 1\nbeta = 0.0\ninit = inverted\nt_end = 0.5\n"
               "trajectories = 500\n");
    std::string out = tmp_path("cmp0.json");
    CHECK(run_cli("compare --config " + cfg + " --out " + out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["report"]["pass"] == true);

    // Two fully coupled atoms: the collective-channel truncation bias is far
    // outside the statistical band, and the tool must say so.
    std::string cfg2 = tmp_path("cmp2.cfg");
    write_file(cfg2,
               "n_atoms = 2\nbeta = 1.0\ninit = inverted\nt_end = 1.0\n"
               "trajectories = 30000\nseed = 3\n");
    std::string out2 = tmp_path("cmp2.json");
    CHECK(run_cli("compare --config " + cfg2 + " --out " + out2) == 3);
    auto j2 = nlohmann::json::parse(slurp(out2));
    CHECK(j2["report"]["pass"] == false);
    CHECK(j2["report"]["max_sigma_P"].get<double>() > 2.0);
}

TEST_CASE("sample-check validates the initial-state sampler end to end") {
    std::string cfg = tmp_path("sc.cfg");
    write_file(cfg,
               "n_atoms = 1\nbeta = 1.0\ninit = bloch\n"
               "bloch_u = 0.3\nbloch_v = -0.4\nbloch_w = 0.5\n"
               "trajectories = 50000\n");
    std::string out = tmp_path("sc.json");
    REQUIRE(run_cli("sample-check --config " + cfg + " --out " + out) == 0);
    auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["pass"] == true);
    CHECK(j["identity_residual"].get<double>() < 1e-12);
    CHECK(j["min_density"].get<double>() >= 0.0);
    CHECK(std::abs(j["pauli_x"]["target"].get<double>() - 0.3) < 1e-12);
}

TEST_CASE("missing subcommand or unknown flag is a usage error") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("simulate --no-such-flag") == 2);
    CHECK(run_cli("--help") == 0);
}

}  // TEST_SUITE
