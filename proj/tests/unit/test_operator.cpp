#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "mcf/operator.hpp"
#include "support.hpp"

using namespace mcf;
using mcf::testing::params_with;

namespace {

std::int32_t node_at(const Grid& g, double x, double y) {
    for (std::int32_t n : g.active_nodes()) {
        const Point p = g.position(n);
        if (std::abs(p[0] - x) < 1e-12 && std::abs(p[1] - y) < 1e-12) return n;
    }
    return -1;
}

const auto square = [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; };

}  // namespace

TEST_CASE("gradient of constant, linear and quadratic fields") {
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), 1.0 / 32);
    const auto c = [](const Point&) { return 3.0; };
    for (const auto& v : gradient(make_state(g, c, c), g, c)) {
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
    }
    const auto lin = [](const Point& x) { return 0.3 * x[0] - 1.2 * x[1]; };
    for (const auto& v : gradient(make_state(g, lin, lin), g, lin)) {
        CHECK(v[0] == doctest::Approx(0.3).epsilon(1e-10));
        CHECK(v[1] == doctest::Approx(-1.2).epsilon(1e-10));
    }
    const auto grads = gradient(make_state(g, square, square), g, square);
    const std::int32_t n = node_at(g, 0.25, 0.25);
    REQUIRE(n >= 0);
    const Point v = grads[g.active_position(n)];
    CHECK(std::abs(v[0] - 0.5) < 1e-12);
    CHECK(std::abs(v[1] - 0.5) < 1e-12);
}

TEST_CASE("rate of a linear field is the flat source term") {
    const double h = 1.0 / 16;
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), h);
    const auto lin = [](const Point& x) { return 0.6 * x[0] + 0.8 * x[1]; };
    for (double eps : {0.05, 0.3}) {
        const FlowParams p = params_with(h, eps, 0.3);
        const auto rate = regularized_rhs(make_state(g, lin, lin), g, p, lin);
        for (std::int32_t n : g.stepped_nodes())
            CHECK(rate[g.active_position(n)] == doctest::Approx(0.3 * std::sqrt(eps * eps + 1.0)).epsilon(1e-9));
    }
}

TEST_CASE("rate of |x|^2 matches the closed form") {
    const double h = 1.0 / 32;
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), h);
    const FlowParams p = params_with(h, 0.1, 0.0);
    const auto rate = regularized_rhs(make_state(g, square, square), g, p, square);
    const std::int32_t n = node_at(g, 0.5, 0.0);
    REQUIRE(n >= 0);
    // 4 - 8 r^2 / (eps^2 + 4 r^2) at r = 0.5, eps = 0.1.
    CHECK(rate[g.active_position(n)] == doctest::Approx(4.0 - 2.0 / 1.01).epsilon(1e-12));
    CHECK(rate[g.active_position(n)] == doctest::Approx(2.0198).epsilon(1e-4));
}

TEST_CASE("rate of |x|^2 tends to the shrinking-circle speed") {
    Derivatives d;
    d.grad = {1.0, 0.0, 0.0};
    d.hess[0][0] = d.hess[1][1] = 2.0;
    FlowParams p;
    p.epsilon = 1e-6;
    CHECK(regularized_rate(d, 2, p) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("stable time step") {
    FlowParams p = params_with(1.0 / 32);
    const Grid g2 = build_grid(DomainSpec::ball(1.0, 2), 1.0 / 32);
    CHECK(stable_dt(p, g2).dt == doctest::Approx(0.25 / (2.0 * 32 * 32)));
    CHECK(stable_dt(p, g2).dt == doctest::Approx(1.22e-4).epsilon(1e-3));
    CHECK_FALSE(stable_dt(p, g2).warning);
    const Grid g3 = build_grid(DomainSpec::ball(1.0, 3), 1.0 / 16);
    CHECK(stable_dt(params_with(1.0 / 16), g3).dt == doctest::Approx(3.26e-4).epsilon(1e-3));
    p.dt_override = 1.0 / (32.0 * 32.0);
    CHECK(stable_dt(p, g2).warning);
}

TEST_CASE("parameter validation") {
    FlowParams p;
    p.epsilon = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = FlowParams{};
    p.sigma = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
    p = FlowParams{};
    p.cfl_factor = 0.6;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("one step on simple fields") {
    const double h = 1.0 / 32;
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), h);
    const auto c = [](const Point&) { return 0.4; };

    FlowParams p = params_with(h, 0.05, 0.0);
    FieldState s = step(make_state(g, c, c), g, p, c);
    for (std::int32_t n : g.active_nodes()) CHECK(s.values[n] == 0.4);

    p.nu = 0.3;
    const double dt = stable_dt(p, g).dt;
    s = step(make_state(g, c, c), g, p, c);
    CHECK(s.t == doctest::Approx(dt));
    for (std::int32_t n : g.active_nodes())
        if (g.kind(n) == NodeKind::Interior) CHECK(s.values[n] == doctest::Approx(0.4 + dt * 0.05 * 0.3).epsilon(1e-14));

    p.nu = 0.0;
    s = step(make_state(g, square, square), g, p, square);
    const std::int32_t n = node_at(g, 0.5, 0.0);
    CHECK(s.values[n] == doctest::Approx(0.25 + dt * (4.0 - 8.0 * 0.25 / (0.0025 + 1.0))).epsilon(1e-13));
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    for (int dim : {2, 3}) {
        const double h = dim == 2 ? 1.0 / 64 : 1.0 / 16;
        const Grid g = build_grid(DomainSpec::ball(1.0, dim), h);
        const auto f = [](const Point& x) { return x[0] + 0.5 * std::sin(3 * x[1]) * std::cos(2 * x[2] + x[0]); };
        const FieldState s = make_state(g, f, f);
        const FlowParams p = params_with(h, 0.05, 0.3);
        const auto n = g.active_nodes().size();
        std::vector<double> r1(n), g1(n), r2(n), g2(n);
        evaluate_rates(g, s.values, p, r1, g1, Execution::Serial);
        evaluate_rates(g, s.values, p, r2, g2, Execution::Parallel);
        CHECK(std::memcmp(r1.data(), r2.data(), n * sizeof(double)) == 0);
        CHECK(std::memcmp(g1.data(), g2.data(), n * sizeof(double)) == 0);
    }
}

TEST_CASE("diffusion tensor eigenvalues lie in (0, 1]") {
    const double h = 1.0 / 32;
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), h);
    const auto f = [](const Point& x) { return 3 * x[0] + mcf::testing::bump_profile(x) * 4; };
    for (double sigma : {0.3, 1.0}) {
        FlowParams p = params_with(h, 0.05, 0.0);
        p.sigma = sigma;
        for (const auto& v : gradient(make_state(g, f, f), g, f)) {
            Eigen::Vector2d q(v[0], v[1]);
            const double s = p.epsilon * p.epsilon + sigma * sigma * q.squaredNorm();
            const Eigen::Matrix2d a = Eigen::Matrix2d::Identity() - sigma * sigma * q * q.transpose() / s;
            const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a).eigenvalues();
            CHECK(ev.minCoeff() > 0.0);
            CHECK(ev.maxCoeff() <= 1.0 + 1e-14);
            CHECK(ev.minCoeff() == doctest::Approx(p.epsilon * p.epsilon / s).epsilon(1e-9));
        }
    }
}

TEST_CASE("boundary trace stays exact under stepping") {
    const double h = 1.0 / 32;
    for (const auto& dom : {DomainSpec::ball(1.0, 2), DomainSpec::ellipse(2.0, 1.0), DomainSpec::stadium(0.5, 1.5, 0.25)}) {
        const Grid g = build_grid(dom, h);
        const auto hd = [](const Point& x) { return std::sin(x[0]) + x[1]; };
        const auto gd = [&](const Point& x) { return hd(x) + 0.3 * std::max(0.0, signed_distance(dom, x)); };
        const FlowParams p = params_with(h, 0.05, 0.3);
        Stepper st(g, p);
        FieldState s = make_state(g, gd, hd);
        for (int k = 0; k < 20; ++k) {
            st.evaluate(s);
            st.advance(s);
            CHECK(boundary_trace_error(s, g, hd) <= 1e-12);
        }
    }
}

TEST_CASE("non-finite values are reported with node and step") {
    const double h = 1.0 / 8;
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), h);
    FlowParams p = params_with(h, 0.05, 0.0);
    p.dt_override = 5.0;
    const auto x1 = [](const Point& x) { return x[0]; };
    const auto gd = [](const Point& x) { return x[0] + mcf::testing::bump_profile(x); };
    Stepper st(g, p);
    CHECK(st.dt_warning());
    FieldState s = make_state(g, gd, x1);
    bool thrown = false;
    try {
        for (int k = 0; k < 5000; ++k) {
            st.evaluate(s);
            st.advance(s);
        }
    } catch (const NonFiniteError& e) {
        thrown = true;
        CHECK(e.node >= 0);
        CHECK(e.step >= 0);
    }
    CHECK(thrown);
}
