#include <cmath>

#include "cascade/model.hpp"
#include "doctest.h"

using namespace cascade;

TEST_SUITE("model") {

TEST_CASE("pulse-area Bloch vector hits the poles and the equator") {
    const double pi = std::acos(-1.0);

    auto g = bloch_from_pulse_area(0.0);
    CHECK(g.u == doctest::Approx(0.0));
    CHECK(g.v == doctest::Approx(0.0));
    CHECK(g.w == doctest::Approx(-1.0));

    auto e = bloch_from_pulse_area(pi);
    CHECK(e.u == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(e.v) < 1e-12);
    CHECK(e.w == doctest::Approx(1.0));

    // A = pi/2 lands on the +y axis: v = +sin(A). The sign is pinned by the
    // exact-solver cross checks in the oracle suite (E(0) = -sin A).
    auto h = bloch_from_pulse_area(pi / 2.0);
    CHECK(h.u == doctest::Approx(0.0));
    CHECK(h.v == doctest::Approx(1.0));
    CHECK(h.w == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pulse-area Bloch vector stays on the unit sphere") {
    for (double a : {0.1, 0.7, 1.3, 2.2, 3.0, 4.5, 6.0}) {
        auto b = bloch_from_pulse_area(a);
        double n2 = b.u * b.u + b.v * b.v + b.w * b.w;
        CHECK(n2 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(b.w == doctest::Approx(-std::cos(a)).epsilon(1e-14));
        CHECK(b.v == doctest::Approx(std::sin(a)).epsilon(1e-14));
    }
}

TEST_CASE("drive schedule evaluates segments half-open in time") {
    DriveSchedule d;
    d.segments = {{0.0, 1.0, {2.0, 0.0}}, {1.5, 2.0, {0.0, -1.0}}};
    CHECK(d.alpha_at(0.0) == complexd(2.0, 0.0));
    CHECK(d.alpha_at(0.999) == complexd(2.0, 0.0));
    CHECK(d.alpha_at(1.0) == complexd(0.0, 0.0));    // t_stop excluded
    CHECK(d.alpha_at(1.2) == complexd(0.0, 0.0));    // gap
    CHECK(d.alpha_at(1.5) == complexd(0.0, -1.0));
    CHECK(d.alpha_at(5.0) == complexd(0.0, 0.0));
    CHECK(!d.is_zero());
    CHECK(DriveSchedule{}.is_zero());
}

TEST_CASE("homogeneous helper broadcasts beta") {
    auto p = SystemParams::homogeneous(5, 0.25);
    REQUIRE(p.beta.size() == 5);
    for (double b : p.beta) CHECK(b == 0.25);
    CHECK(p.n_atoms == 5);
}

TEST_CASE("validate accepts a sane configuration") {
    auto p = SystemParams::homogeneous(3, 0.5);
    auto init = InitialState::inverted(3);
    CHECK(!validate(p, init).has_value());

    p.drive.segments = {{0.0, 0.5, {1.0, 0.0}}, {0.5, 1.0, {0.5, 0.0}}};
    CHECK(!validate(p, init).has_value());  // touching segments are fine
}

TEST_CASE("validate names the first violated invariant") {
    auto base = SystemParams::homogeneous(2, 0.5);
    auto init = InitialState::inverted(2);

    auto msg = [&](const SystemParams& p, const InitialState& s) {
        auto err = validate(p, s);
        REQUIRE(err.has_value());
        return *err;
    };

    {
        auto p = base;
        p.n_atoms = 0;
        CHECK(msg(p, init) == "n_atoms < 1");
    }
    {
        auto p = base;
        CHECK(msg(p, InitialState::inverted(3)) == "initial state size != n_atoms");
    }
    {
        auto p = base;
        p.beta = {0.5};
        CHECK(msg(p, init) == "beta list size != n_atoms");
    }
    {
        auto p = base;
        p.beta[1] = 1.2;
        CHECK(msg(p, init) == "beta out of [0,1] at atom 2");
    }
    {
        auto p = base;
        p.beta[0] = -0.01;
        CHECK(msg(p, init) == "beta out of [0,1] at atom 1");
    }
    {
        auto p = base;
        p.dt = 0.0;
        CHECK(msg(p, init) == "dt <= 0");
    }
    {
        auto p = base;
        p.t_end = 0.5 * p.dt;
        CHECK(msg(p, init) == "t_end < dt");
    }
    {
        auto p = base;
        p.output_stride = 0;
        CHECK(msg(p, init) == "output_stride < 1");
    }
    {
        auto p = base;
        p.n_trajectories = 1;
        CHECK(msg(p, init) == "fewer than 2 trajectories");
    }
    {
        auto p = base;
        p.theta_min = 0.0;
        CHECK(msg(p, init) == "theta_min out of (0,0.1)");
        p.theta_min = 0.2;
        CHECK(msg(p, init) == "theta_min out of (0,0.1)");
    }
    {
        auto s = init;
        s.bloch[1] = {0.8, 0.8, 0.8};
        CHECK(msg(base, s) == "Bloch norm > 1 at atom 2");
    }
    {
        auto p = base;
        p.drive.segments = {{0.0, 0.0, {1.0, 0.0}}};
        CHECK(msg(p, init) == "drive segment with t_stop <= t_start");
    }
    {
        auto p = base;
        p.drive.segments = {{0.0, 1.0, {1.0, 0.0}}, {0.5, 2.0, {1.0, 0.0}}};
        CHECK(msg(p, init) == "drive segments overlap or are unordered");
    }
}

TEST_CASE("mixed single-atom states inside the Bloch ball validate") {
    auto p = SystemParams::homogeneous(1, 1.0);
    InitialState s = InitialState::uniform(1, {0.1, -0.2, 0.3});
    CHECK(!validate(p, s).has_value());
    s.bloch[0] = {0.0, 0.0, 0.0};  // maximally mixed
    CHECK(!validate(p, s).has_value());
}

}  // TEST_SUITE
