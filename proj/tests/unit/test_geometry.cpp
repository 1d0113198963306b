#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/geometry.hpp"

using namespace mcf;

namespace {

// Distance from x to the ellipse by dense parametric sampling.
double sampled_ellipse_distance(double a, double b, const Point& x, int samples) {
    double best = 1e300;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * std::numbers::pi * i / samples;
        best = std::min(best, std::hypot(a * std::cos(t) - x[0], b * std::sin(t) - x[1]));
    }
    return best;
}

// Minimum planar curvature of the ellipse by sampling the closed-form
// curvature of the parametrization.
double sampled_ellipse_min_curvature(double a, double b, int samples) {
    double best = 1e300;
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * std::numbers::pi * i / samples;
        const double xp = -a * std::sin(t), yp = b * std::cos(t);
        const double xpp = -a * std::cos(t), ypp = -b * std::sin(t);
        best = std::min(best, std::abs(xp * ypp - yp * xpp) / std::pow(xp * xp + yp * yp, 1.5));
    }
    return best;
}

}  // namespace

TEST_CASE("ball signed distance") {
    const auto ball = DomainSpec::ball(1.0, 2);
    CHECK(signed_distance(ball, {0, 0, 0}) == doctest::Approx(1.0));
    CHECK(signed_distance(ball, {1, 0, 0}) == doctest::Approx(0.0));
    CHECK(signed_distance(ball, {2, 0, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("ellipse signed distance against dense sampling") {
    const auto e = DomainSpec::ellipse(2.0, 1.0);
    CHECK(signed_distance(e, {0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
    const double oracle = sampled_ellipse_distance(2.0, 1.0, {1, 0, 0}, 2'000'000);
    CHECK(std::abs(signed_distance(e, {1, 0, 0}) - oracle) < 1e-9);
    for (const Point x : {Point{0.3, -0.4, 0}, Point{-1.7, 0.2, 0}, Point{2.5, 1.0, 0}, Point{0.0, 0.99, 0}}) {
        const double d = signed_distance(e, x);
        const bool inside = x[0] * x[0] / 4 + x[1] * x[1] < 1;
        CHECK(std::abs(std::abs(d) - sampled_ellipse_distance(2.0, 1.0, x, 2'000'000)) < 1e-8);
        CHECK((d > 0) == inside);
    }
}

TEST_CASE("projection lands on the boundary") {
    const auto e = DomainSpec::ellipse(2.0, 1.0);
    const Point p = project_to_boundary(e, {0.7, 0.3, 0});
    CHECK(p[0] * p[0] / 4 + p[1] * p[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stadium signed distance") {
    const auto s = DomainSpec::stadium(0.5, 1.5, 0.25);
    CHECK(signed_distance(s, {0, 0, 0}) == doctest::Approx(0.5));
    CHECK(signed_distance(s, {0.5, 0.0, 0}) == doctest::Approx(0.0));
    CHECK(signed_distance(s, {0.0, 1.75, 0}) == doctest::Approx(0.0));
    CHECK(signed_distance(s, {0.0, 1.5, 0}) == doctest::Approx(0.25));
    // Corner arc centred at (0.25, 1.5).
    CHECK(signed_distance(s, {0.25 + 0.25 / std::sqrt(2.0), 1.5 + 0.25 / std::sqrt(2.0), 0}) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mean curvature bounds") {
    CHECK(boundary_mean_curvature_bound(DomainSpec::ball(1.0, 2)) == doctest::Approx(1.0));
    CHECK(boundary_mean_curvature_bound(DomainSpec::ball(2.0, 3)) == doctest::Approx(0.5));
    const double h0 = boundary_mean_curvature_bound(DomainSpec::ellipse(2.0, 1.0));
    CHECK(h0 == doctest::Approx(0.25));
    CHECK(h0 == doctest::Approx(sampled_ellipse_min_curvature(2.0, 1.0, 100000)).epsilon(1e-9));
    CHECK(boundary_mean_curvature_bound(DomainSpec::stadium(0.5, 1.5, 0.25)) < 1e-3);
}

TEST_CASE("admissible speed interval") {
    const auto i2 = admissible_nu_interval(DomainSpec::ball(1.0, 2));
    CHECK(i2.lo == doctest::Approx(-0.5));
    CHECK(i2.hi == doctest::Approx(0.5));
    const auto i3 = admissible_nu_interval(DomainSpec::ball(2.0, 3));
    CHECK(i3.hi == doctest::Approx(1.0 / 3.0));
    CHECK(i3.lo == doctest::Approx(-1.0 / 3.0));
    const auto is = admissible_nu_interval(DomainSpec::stadium(0.5, 1.5, 0.25));
    CHECK(is.hi < 1e-3);
    CHECK_FALSE(is.contains(0.01));
    // Shrinks as H0 decreases.
    CHECK(admissible_nu_interval(DomainSpec::ball(3.0, 2)).hi < i2.hi);
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(DomainSpec::ball(-1.0, 2).validate(), Error);
    CHECK_THROWS_AS(DomainSpec::ellipse(1.0, 2.0).validate(), Error);
    CHECK_THROWS_AS(DomainSpec::stadium(0.5, 1.0, 0.6).validate(), Error);
    CHECK_THROWS_AS(DomainSpec::ball(1.0, 4).validate(), Error);
}

TEST_CASE("coarse unit-disc grid") {
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), 0.5);
    CHECK(g.counts()[0] == 5);
    CHECK(g.counts()[1] == 5);
    CHECK(g.node_count() == 25);
    // Oracle: enumerate the 5x5 lattice and count |x| < 1.
    int inside = 0;
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j) inside += (0.25 * (i * i + j * j) < 1.0);
    CHECK(inside == 9);
    CHECK(g.inside_count() == inside);
    CHECK(g.lower()[0] == doctest::Approx(-1.0));
    CHECK(g.upper()[1] == doctest::Approx(1.0));
}

TEST_CASE("spacing limit") {
    CHECK_THROWS_AS(build_grid(DomainSpec::ball(1.0, 2), 2.0), Error);
    CHECK_THROWS_AS(build_grid(DomainSpec::ball(1.0, 2), 0.0), Error);
    CHECK(max_grid_spacing(DomainSpec::ball(1.0, 2)) == doctest::Approx(0.5));
}

TEST_CASE("cut fraction at a neighbour on the boundary") {
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), 0.5);
    const std::int32_t node = g.index({3, 2, 0});  // (0.5, 0)
    REQUIRE(node >= 0);
    CHECK(g.position(node)[0] == doctest::Approx(0.5));
    bool found = false;
    for (const auto& c : g.cuts())
        if (c.node == node && c.axis == 0 && c.side == 1) {
            CHECK(c.theta == doctest::Approx(1.0));
            found = true;
        }
    CHECK(found);
}

TEST_CASE("grid classification matches the signed distance") {
    for (const auto& dom : {DomainSpec::ball(1.0, 2), DomainSpec::ellipse(2.0, 1.0),
                            DomainSpec::stadium(0.5, 1.5, 0.25), DomainSpec::ball(1.0, 3)}) {
        const Grid g = build_grid(dom, dom.dim == 3 ? 1.0 / 8 : 1.0 / 16);
        for (std::int32_t n = 0; n < g.node_count(); ++n) {
            const double d = signed_distance(dom, g.position(n));
            CHECK((g.kind(n) != NodeKind::Exterior) == (d > 0.0));
        }
        for (std::int32_t n : g.active_nodes())
            if (g.kind(n) == NodeKind::Interior) {
                const auto ijk = g.multi_index(n);
                for (int k = 0; k < g.dim(); ++k)
                    for (int s : {-1, 1}) {
                        auto o = ijk;
                        o[k] += s;
                        CHECK(g.active(g.index(o)));
                    }
            }
        for (const auto& c : g.cuts()) {
            CHECK(c.theta > 0.0);
            CHECK(c.theta <= 1.0);
            CHECK(std::abs(signed_distance(dom, c.point)) < 1e-10);
        }
    }
}

TEST_CASE("grid is deterministic") {
    const Grid a = build_grid(DomainSpec::ellipse(2.0, 1.0), 1.0 / 16);
    const Grid b = build_grid(DomainSpec::ellipse(2.0, 1.0), 1.0 / 16);
    REQUIRE(a.cut_count() == b.cut_count());
    for (std::int32_t c = 0; c < a.cut_count(); ++c) CHECK(a.cuts()[c].theta == b.cuts()[c].theta);
}

TEST_CASE("distance gradient has unit norm on the ball") {
    const auto ball = DomainSpec::ball(1.0, 2);
    const Grid g = build_grid(ball, 1.0 / 32);
    const double e = 1e-5;
    for (std::int32_t n : g.active_nodes()) {
        const Point x = g.position(n);
        const double r = std::hypot(x[0], x[1]);
        if (r < 0.1) continue;
        double norm2 = 0.0;
        for (int k = 0; k < 2; ++k) {
            Point a = x, b = x;
            a[k] += e;
            b[k] -= e;
            const double d = (signed_distance(ball, a) - signed_distance(ball, b)) / (2 * e);
            norm2 += d * d;
        }
        CHECK(std::abs(std::sqrt(norm2) - 1.0) < 1e-6);
    }
}

TEST_CASE("discrete Laplacian of d on the ball collar") {
    const auto ball = DomainSpec::ball(1.0, 2);
    const double h = 1.0 / 32, rho = 0.5;
    const Grid g = build_grid(ball, h);
    for (std::int32_t n : g.active_nodes()) {
        if (g.kind(n) != NodeKind::Interior || g.distance(n) >= rho) continue;
        const auto ijk = g.multi_index(n);
        double lap = -4.0 * g.distance(n);
        for (int k = 0; k < 2; ++k)
            for (int s : {-1, 1}) {
                auto o = ijk;
                o[k] += s;
                lap += signed_distance(ball, g.position(g.index(o)));
            }
        lap /= h * h;
        CHECK(lap <= -1.0 + 10 * h * h);
    }
}

TEST_CASE("quadrature volume approximates the area") {
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), 1.0 / 64);
    double area = 0.0;
    for (std::size_t p = 0; p < g.active_nodes().size(); ++p) area += g.cell_volume(p);
    CHECK(area == doctest::Approx(std::numbers::pi).epsilon(0.01));
}

TEST_CASE("boundary samples lie on the boundary") {
    for (const auto& dom : {DomainSpec::ball(1.0, 3), DomainSpec::ellipse(2.0, 1.0), DomainSpec::stadium(0.5, 1.5, 0.25)})
        for (const auto& p : sample_boundary(dom, 200)) CHECK(std::abs(signed_distance(dom, p)) < 1e-10);
}
