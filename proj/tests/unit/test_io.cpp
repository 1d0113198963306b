#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcf/config.hpp"
#include "mcf/expression.hpp"
#include "mcf/io.hpp"
#include "support.hpp"

using namespace mcf;
using namespace mcf::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mcf_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("series csv header and row count") {
    const fs::path dir = scratch("csv");
    const FlowReport r = solve_ibvp(bump_problem(), params_with(1.0 / 16), 0.01);
    write_series_csv(dir / "series.csv", r.series, {});
    std::ifstream in(dir / "series.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,sup_u,sup_grad,sup_ut,J,diss,src,resid");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == r.series.size());
    CHECK_THROWS_AS(write_series_csv(dir / "bad.csv", r.series, {1.0}), Error);
}

TEST_CASE("snapshot size and round trip") {
    CHECK(snapshot_size({5, 5}) == 264);
    const fs::path dir = scratch("snap");
    const Grid g = build_grid(DomainSpec::ball(1.0, 2), 0.5);
    const auto f = [](const Point& x) { return 1.0 + x[0] - 0.25 * x[1]; };
    const FieldState s = make_state(g, f, f);
    write_snapshot(dir / "s.bin", g, s);
    CHECK(fs::file_size(dir / "s.bin") == 264);
    const SnapshotData d = read_snapshot(dir / "s.bin");
    CHECK(d.dim == 2);
    CHECK(d.counts == std::vector<std::uint64_t>{5, 5});
    CHECK(d.lower[0] == doctest::Approx(-1.0));
    REQUIRE(d.values.size() == 25);
    for (std::int32_t n = 0; n < g.node_count(); ++n) {
        if (g.active(n)) CHECK(d.values[n] == s.values[n]);
        else CHECK(std::isnan(d.values[n]));
    }
    std::ofstream(dir / "junk.bin") << "NOTAGRID";
    CHECK_THROWS_AS(read_snapshot(dir / "junk.bin"), Error);
}

TEST_CASE("output bundle writes the manifest") {
    const fs::path dir = scratch("bundle");
    SolveOptions o;
    o.snapshot_times = {0.0, 0.01};
    const FlowParams p = params_with(1.0 / 16);
    const FlowReport r = solve_ibvp(bump_problem(), p, 0.01, o);
    const EnergyTrace e = energy_series(r, p);
    RunSummary s;
    s.kind = "flow";
    s.check("energy", "J is non-increasing", e.max_energy_increase(), 1e-8);
    OutputBundle b;
    b.flow = &r;
    b.trace = &e;
    b.tables.push_back({"extra.csv", {"a", "b"}, {{1.0, 2.0}}});
    const auto files = write_outputs(dir, b, s);
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(fs::exists(dir / "snapshot_0.bin"));
    CHECK(fs::exists(dir / ("snapshot_" + std::to_string(r.snapshots.back().step) + ".bin")));
    CHECK(fs::exists(dir / "extra.csv"));
    CHECK(fs::exists(dir / "summary.txt"));
    CHECK(files.size() >= 4);
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("experiment: flow") != std::string::npos);
    CHECK(summary.find("J is non-increasing") != std::string::npos);
    CHECK(slurp(dir / "extra.csv").rfind("a,b\n", 0) == 0);
}

TEST_CASE("summary pass logic") {
    RunSummary s;
    s.check("a", "x <= 1", 0.5, 1.0);
    CHECK(s.all_passed());
    s.check("b", "y >= 2", 1.5, 2.0, ">=");
    CHECK_FALSE(s.all_passed());
    CHECK_FALSE(s.properties.back().passed);
}

TEST_CASE("expression parser") {
    const Point x{0.5, -2.0, 3.0};
    CHECK(Expression::parse("1 + 2 * 3")(x) == 7.0);
    CHECK(Expression::parse("-2^2")(x) == -4.0);
    CHECK(Expression::parse("2^3^2")(x) == 512.0);
    CHECK(Expression::parse("x1 - x2 / 4")(x) == 1.0);
    CHECK(Expression::parse("|x2| + abs(x1)")(x) == 2.5);
    CHECK(Expression::parse("min(x1, x2, x3)")(x) == -2.0);
    CHECK(Expression::parse("max(x1, 0.75)")(x) == 0.75);
    CHECK(Expression::parse("sqrt(x3^2 + 16)")(x) == doctest::Approx(5.0));
    CHECK(Expression::parse("sin(pi / 2) + cos(0) + exp(0) + log(1) + tanh(0)")(x) == doctest::Approx(3.0));
    CHECK(Expression::parse("1e-3 * 2")(x) == doctest::Approx(2e-3));
    CHECK(Expression::parse("(1 - x1^2 - x2^2)^3")(Point{0.5, 0.5, 0}) == doctest::Approx(0.125));
    CHECK(Expression::parse(" x1 ").source() == " x1 ");
    for (const char* bad : {"", "1 +", "foo(1)", "(1", "|x1", "x4", "1 2", "min()"}) CHECK_THROWS_AS(Expression::parse(bad), Error);
    try {
        Expression::parse("1 + * 2");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
}

TEST_CASE("experiment kinds round trip") {
    for (auto k : {ExperimentKind::Flow, ExperimentKind::Steady, ExperimentKind::Continuation, ExperimentKind::Barrier,
                   ExperimentKind::Comparison, ExperimentKind::Viscosity, ExperimentKind::Liouville})
        CHECK(parse_experiment_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_experiment_kind("nope"), Error);
}

TEST_CASE("config parsing and validation") {
    const std::string text = R"(# unit disc bump
experiment = flow
domain.kind = ball
domain.dim = 2
domain.radius = 1
data.h = x1
data.g = x1 + 0.5*(1 - x1^2 - x2^2)^3
params.epsilon = 0.05
params.nu = 0.3
grid.spacing = 0.0625
run.horizon = 0.5
run.snapshot_times = 0, 0.25, 0.5
continuation.eps_list = 0.4, 0.2, 0.1
)";
    const RunConfig c = parse_config(text, "test.cfg");
    CHECK(c.kind == ExperimentKind::Flow);
    CHECK(c.params.nu == 0.3);
    CHECK(c.params.spacing == 0.0625);
    CHECK(c.snapshot_times.size() == 3);
    CHECK(c.eps_list[0] == 0.4);
    CHECK(c.g({0, 0, 0}) == doctest::Approx(0.5));
    CHECK_NOTHROW(validate_config(c));

    try {
        parse_config("experiment = flow\nbogus.key = 1\n", "f.cfg");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
    }

    RunConfig zero_eps = c;
    zero_eps.params.epsilon = 0.0;
    CHECK_THROWS_AS(validate_config(zero_eps), Error);

    const RunConfig mismatch = parse_config(text + "data.g = x1 + 1\n");
    CHECK_THROWS_AS(validate_config(mismatch), Error);

    CHECK_THROWS_AS(parse_config("params.epsilon = abc\n"), Error);
}

TEST_CASE("config files on disk") {
    const fs::path dir = scratch("cfg");
    std::ofstream(dir / "a.cfg") << "experiment = steady\ndomain.kind = ball\ndata.h = x1\ndata.g = x1\ngrid.spacing = 0.125\n";
    const RunConfig c = load_config(dir / "a.cfg");
    CHECK(c.kind == ExperimentKind::Steady);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), Error);
}
