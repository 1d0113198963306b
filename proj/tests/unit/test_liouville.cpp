#include <doctest.h>

#include <cmath>

#include "mcf/liouville.hpp"
#include "support.hpp"

using namespace mcf;
using namespace mcf::testing;

namespace {
const DomainSpec stadium = DomainSpec::stadium(0.5, 1.5, 0.25);
}

TEST_CASE("ramp problem data") {
    const CylinderProblem p = ramp_problem(stadium, 0.5, 1.0, 0.5, 0.125);
    CHECK(p.lipschitz == doctest::Approx(2.0));
    CHECK(p.data({0.1, 0.7, 0}) == doctest::Approx(1.0));
    CHECK(p.data({0.1, 0.25, 0}) == doctest::Approx(0.5));
    CHECK(p.data({0.1, -0.5, 0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(ramp_problem(DomainSpec::ball(1.0, 2), 0.5, 1.0, 0.5, 0.125), Error);
    CHECK_THROWS_AS(ramp_problem(stadium, 0.5, 1.0, 0.0, 0.125), Error);
}

TEST_CASE("envelopes bracket the section maximum") {
    const CylinderProblem p = ramp_problem(stadium, 0.5, 1.0, 0.5, 0.125);
    const EnvelopePair e = build_envelopes(p);
    CHECK(e.eps_tilde > 0.0);
    for (int i = 0; i <= 400; ++i) {
        const double tau = -1.75 + 3.5 * i / 400;
        CHECK(e.lower(tau) <= p.section_max(tau) + 1e-12);
        CHECK(p.section_max(tau) <= e.upper(tau));
        CHECK(e.lower(tau) <= e.upper(tau));
        if (tau >= e.m + e.delta) CHECK(e.lower(tau) == e.lambda);
    }
}

TEST_CASE("lower envelope is smooth at the blend ends") {
    const EnvelopePair e = build_envelopes(ramp_problem(stadium, 0.5, 1.0, 0.5, 0.125));
    const double a = e.m + e.delta - e.delta / 4, b = e.m + e.delta, h = 1e-7;
    for (double tau : {a, b}) {
        CHECK(e.lower(tau - h) == doctest::Approx(e.lower(tau + h)).epsilon(1e-6));
        CHECK(e.lower_slope(tau - h) == doctest::Approx(e.lower_slope(tau + h)).epsilon(1e-5));
    }
    // Finite-difference oracle for slope and curvature inside the blend.
    const double mid = 0.5 * (a + b), d = 1e-5;
    CHECK(e.lower_slope(mid) == doctest::Approx((e.lower(mid + d) - e.lower(mid - d)) / (2 * d)).epsilon(1e-6));
    CHECK(e.lower_curvature(mid) ==
          doctest::Approx((e.lower_slope(mid + d) - e.lower_slope(mid - d)) / (2 * d)).epsilon(1e-5));
    for (int i = 0; i <= 100; ++i) CHECK(e.lower_slope(-1.5 + 3.0 * i / 100) >= 0.0);
}

TEST_CASE("plateau data give constant envelopes") {
    const EnvelopePair e = build_envelopes(plateau_problem(stadium, 0.5, 0.8, 0.125));
    CHECK(e.eps_tilde == 0.0);
    CHECK(e.lower(-1.0) == 0.8);
    CHECK(e.lower_slope(-1.0) == 0.0);
}

TEST_CASE("envelope preconditions") {
    CHECK_THROWS_AS(build_envelopes(ramp_problem(stadium, 1.45, 1.0, 0.5, 0.125)), Error);
    CHECK_THROWS_AS(build_envelopes(ramp_problem(stadium, 0.5, 1.0, 0.5, 0.0)), Error);
}

TEST_CASE("constant data stay flat") {
    const CylinderProblem p = plateau_problem(stadium, 0.5, 1.0, 0.125);
    const LiouvilleReport r = flatness_and_sandwich(p, params_with(1.0 / 16), 0.05);
    CHECK(r.sup_flatness == 0.0);
    CHECK(r.max_lower_violation == 0.0);
    CHECK(r.max_upper_violation == 0.0);
    CHECK(r.max_monotonicity_violation == 0.0);
}

TEST_CASE("constant data drift at rate eps nu") {
    const FlowParams fp = params_with(1.0 / 16, 0.05, 0.2);
    const LiouvilleReport r = flatness_and_sandwich(plateau_problem(stadium, 0.5, 1.0, 0.125), fp, 0.05);
    const double t = r.rows.back().t;
    // Interior nodes rise at most at the flat rate; the boundary holds lambda.
    CHECK(r.sup_flatness <= 0.05 * 0.2 * t * (1.0 + 1e-12));
    CHECK(r.sup_flatness >= 0.5 * 0.05 * 0.2 * t);
    CHECK(r.sup_flatness <= r.flatness_bound);
}

TEST_CASE("negative speed is rejected") {
    CHECK_THROWS_AS(flatness_and_sandwich(ramp_problem(stadium, 0.5, 1.0, 0.5, 0.125), params_with(1.0 / 16, 0.05, -0.1), 0.05),
                    Error);
}

TEST_CASE("envelope fields") {
    const Grid g = build_grid(stadium, 1.0 / 16);
    const EnvelopePair e = build_envelopes(ramp_problem(stadium, 0.5, 1.0, 0.5, 0.125));
    const auto up = envelope_fields(g, e, 0.2, true, 0.0, 0.01);
    const auto lo = envelope_fields(g, e, 0.2, false, 0.0, 0.01);
    REQUIRE(up.size() == 3);
    CHECK(up[2].t == doctest::Approx(0.02));
    for (std::int32_t n : g.active_nodes()) {
        CHECK(up[1].values[n] == 1.0);
        CHECK(lo[0].values[n] == doctest::Approx(e.lower(g.position(n)[1])));
        CHECK(lo[0].values[n] == lo[2].values[n]);
    }
}
