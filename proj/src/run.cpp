#include "mcf/run.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "mcf/barriers.hpp"
#include "mcf/liouville.hpp"
#include "mcf/verify.hpp"

namespace mcf {

namespace {

double grid_limit_of_data(const Grid& grid, const ScalarFunction& f, bool want_max) {
    double v = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    auto take = [&](double x) { v = want_max ? std::max(v, x) : std::min(v, x); };
    for (std::int32_t node : grid.active_nodes()) take(f(grid.position(node)));
    for (const auto& cut : grid.cuts()) take(f(cut.point));
    return v;
}

// sup |grad f| over the active nodes by central differences of the expression.
double data_gradient_sup(const Grid& grid, const ScalarFunction& f) {
    const double step = 1e-6;
    double best = 0.0;
    for (std::int32_t node : grid.active_nodes()) {
        const Point x = grid.position(node);
        double g2 = 0.0;
        for (int k = 0; k < grid.dim(); ++k) {
            Point a = x, b = x;
            a[k] += step;
            b[k] -= step;
            const double d = (f(a) - f(b)) / (2.0 * step);
            g2 += d * d;
        }
        best = std::max(best, std::sqrt(g2));
    }
    return best;
}

std::string status_line(const FlowReport& r) {
    std::string s = to_string(r.status);
    if (!r.message.empty()) s += " (" + r.message + ")";
    return s;
}

void flow_scalars(RunSummary& s, const FlowReport& r) {
    s.scalar("dt", r.dt);
    s.scalar("steps", static_cast<double>(r.steps));
    s.scalar("status", status_line(r));
    s.scalar("dt_warning", r.dt_warning ? "yes" : "no");
    s.scalar("nu_outside_admissible_interval", r.nu_outside_admissible ? "yes" : "no");
}

void check_finite(RunSummary& s, const FlowReport& r) {
    s.check("finite", "the regularized flow stays finite on [0, T]",
            r.status == RunStatus::BlowUp ? 1.0 : 0.0, 0.0);
}

RunSummary run_flow(const RunConfig& c, const std::filesystem::path& out) {
    RunSummary s;
    s.kind = "flow";
    const IBVP problem = c.problem();
    const FlowParams& params = c.params;

    double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min, trace_error = 0.0;
    SolveOptions opts;
    opts.snapshot_times = c.snapshot_times;
    opts.observer = [&](const Grid& grid, const FieldState& state, std::span<const double>, std::int64_t) {
        for (std::int32_t node : grid.active_nodes()) {
            u_min = std::min(u_min, state.values[node]);
            u_max = std::max(u_max, state.values[node]);
        }
        trace_error = std::max(trace_error, boundary_trace_error(state, grid, problem.boundary));
    };
    const FlowReport report = solve_ibvp(problem, params, c.horizon, opts);
    const Grid& grid = *report.grid;
    const double h = grid.spacing();
    const EnergyTrace trace = energy_series(report, params);
    flow_scalars(s, report);
    check_finite(s, report);

    if (params.nu == 0.0) {
        const double lo = std::min(grid_limit_of_data(grid, problem.initial, false),
                                   grid_limit_of_data(grid, problem.boundary, false));
        const double hi = std::max(grid_limit_of_data(grid, problem.initial, true),
                                   grid_limit_of_data(grid, problem.boundary, true));
        s.check("maximum_principle", "min(g, h) <= u <= max(g, h) when nu = 0",
                std::max({0.0, lo - u_min, u_max - hi}), 1e-8);
        s.check("energy_descent", "J(t) is non-increasing when nu = 0", trace.max_energy_increase(), 1e-8);
    } else {
        const SupNormBound b = sup_norm_bound(problem, params, std::min(c.tol, 1e-6));
        s.scalar("sup_norm_bound", b.bound);
        s.scalar("sup_norm_bound_available", b.available ? "yes" : "no");
        double sup_u = 0.0;
        for (const auto& row : report.series) sup_u = std::max(sup_u, row.sup_u);
        s.check("sup_norm_bound", "|u| <= max v + kappa with v the steady unit-data comparison field",
                b.available ? sup_u - b.bound : std::numeric_limits<double>::infinity(), 0.0);
    }

    const GradientCheck gc = gradient_interior_max_check(report);
    s.check("gradient_interior_max", "|grad u| is maximal on the parabolic boundary",
            gc.interior_max - gc.boundary_max, gc.tolerance);

    const double b0 = ut_initial_slice_bound(problem, grid, params);
    double sup_ut = 0.0;
    for (const auto& row : report.series) sup_ut = std::max(sup_ut, row.sup_ut);
    s.scalar("ut_initial_slice_bound", b0);
    s.check("ut_bound", "sup |u_t| is attained on the initial slice", sup_ut - b0, 10.0 * h);

    s.check("boundary_trace", "u = h on the lateral boundary after every step", trace_error, 1e-12);

    const DissipationBudget db = dissipation_budget(trace, report, params);
    s.scalar("dissipation_total", db.total);
    s.scalar("dissipation_bound", db.bound);
    s.check("dissipation_bound", "int int u_t^2 <= (sup|grad u| + eps)(J(0) + |nu| |D| 2 sup|u|)",
            db.total - db.bound, 0.0);
    s.scalar("energy_identity_max_residual", trace.max_abs_residual());
    s.scalar("max_sup_ut", sup_ut);

    OutputBundle bundle;
    bundle.flow = &report;
    bundle.trace = &trace;
    write_outputs(out, bundle, s);
    return s;
}

std::int32_t node_nearest(const Grid& grid, const Point& x) {
    std::int32_t best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (std::int32_t node : grid.active_nodes()) {
        const Point p = grid.position(node);
        double d = 0.0;
        for (int k = 0; k < grid.dim(); ++k) d += (p[k] - x[k]) * (p[k] - x[k]);
        if (d < bd) bd = d, best = node;
    }
    return best;
}

void viscosity_checks(RunSummary& s, std::span<const FieldState> slices, const Grid& grid,
                      const FlowParams& params, int radius, const std::string& prefix) {
    ViscosityOptions opts;
    opts.radius = radius;
    for (ViscosityMode mode : {ViscosityMode::Sub, ViscosityMode::Super}) {
        const ViscosityResult r = viscosity_spot_check(slices, grid, params, mode, opts);
        const std::string name = prefix + "viscosity_" + to_string(mode);
        s.scalar(name + "_touches", static_cast<double>(r.touches));
        s.check(name, mode == ViscosityMode::Sub ? "touching from above gives phi_t <= F(D phi, D^2 phi)"
                                                 : "touching from below gives phi_t >= F(D phi, D^2 phi)",
                static_cast<double>(r.violations.size()), 0.0);
    }
}

RunSummary run_steady(const RunConfig& c, const std::filesystem::path& out) {
    RunSummary s;
    s.kind = "steady";
    const SteadyResult r = relax_to_steady(c.problem(), c.params, c.tol, c.max_steps);
    const Grid& grid = *r.grid;
    s.scalar("steps", static_cast<double>(r.steps));
    s.scalar("final_rate", r.final_rate);
    s.scalar("center_value", r.state.values[node_nearest(grid, c.domain.center)]);
    s.check("converged", "sup |rate| falls below run.tol within the step budget",
            r.converged ? r.final_rate : std::numeric_limits<double>::infinity(), c.tol);
    const double gap = stable_dt(c.params, grid).dt;
    std::vector<FieldState> slices(3, r.state);
    for (int k = 0; k < 3; ++k) slices[k].t = k * gap;
    viscosity_checks(s, slices, grid, c.params, c.viscosity_radius, "");

    OutputBundle bundle;
    bundle.grid = r.grid;
    bundle.fields.emplace_back("steady.bin", r.state);
    write_outputs(out, bundle, s);
    return s;
}

RunSummary run_continuation(const RunConfig& c, const std::filesystem::path& out, int concurrency) {
    RunSummary s;
    s.kind = "continuation";
    const ContinuationTable t = epsilon_continuation(c.problem(), c.eps_list, c.params, c.horizon, concurrency);
    CsvTable table{"continuation.csv", {"eps_coarse", "eps_fine", "sup_difference"}, {}};
    for (const auto& row : t.rows) {
        table.rows.push_back({row.eps_coarse, row.eps_fine, row.sup_difference});
        std::ostringstream key;
        key << "difference[" << row.eps_coarse << "->" << row.eps_fine << "]";
        s.scalar(key.str(), row.sup_difference);
    }
    if (!t.failure.empty()) s.scalar("failure", t.failure);
    s.check("all_runs_completed", "every epsilon run reaches the horizon", t.failure.empty() ? 0.0 : 1.0, 0.0);
    s.scalar("strictly_decreasing", t.strictly_decreasing ? "yes" : "no");
    s.check("differences_decrease", "u^eps is Cauchy as eps -> 0: consecutive differences shrink",
            t.strictly_decreasing ? 1.0 : 0.0, 1.0, ">=");
    OutputBundle bundle;
    bundle.tables.push_back(std::move(table));
    write_outputs(out, bundle, s);
    return s;
}

RunSummary run_barrier(const RunConfig& c, const std::filesystem::path& out) {
    RunSummary s;
    s.kind = "barrier";
    const IBVP problem = c.problem();
    auto grid = std::make_shared<const Grid>(build_grid(c.domain, c.params.spacing));
    const Barrier up = build_upper_barrier(c.domain, problem.boundary, problem.initial, c.params, grid);
    const Barrier lo = build_lower_barrier(c.domain, problem.boundary, problem.initial, c.params, grid);
    const double h = grid->spacing();
    for (const auto* b : {&up, &lo}) {
        const std::string p = b == &up ? "upper." : "lower.";
        s.scalar(p + "lambda", b->lambda);
        s.scalar(p + "rho", b->rho);
        s.scalar(p + "beta", b->beta);
        s.scalar(p + "c_res", b->c_res);
        s.scalar(p + "collar_nodes", static_cast<double>(b->collar.size()));
    }
    s.scalar("nu_outside_intro_interval", up.nu_flag ? "yes" : "no");
    s.check("upper_residual", "L psi_plus >= 0 on the collar",
            barrier_supersolution_residual(up, problem.boundary, c.params), 0.0, ">=");
    s.check("lower_residual", "L psi_minus <= 0 on the collar",
            barrier_supersolution_residual(lo, problem.boundary, c.params), 0.0, ">=");

    const BarrierRun run = barrier_flow_check(problem, up, lo, c.params, c.horizon);
    flow_scalars(s, run.flow);
    check_finite(s, run.flow);
    s.check("upper_collar", "u <= h + psi_plus on the collar", run.upper_excess, 10.0 * h);
    s.check("lower_collar", "u >= h + psi_minus on the collar", run.lower_excess, 10.0 * h);
    double ring = 0.0;
    for (const auto& row : run.flow.series) ring = std::max(ring, row.sup_grad_ring);
    const double grad_h = data_gradient_sup(*grid, problem.boundary);
    s.scalar("ring_gradient_max", ring);
    s.check("boundary_gradient", "|grad u| <= |grad psi_plus| + |grad psi_minus| + |grad h| near the boundary",
            ring - (up.lambda + lo.lambda + grad_h), 10.0 * h);

    OutputBundle bundle;
    bundle.flow = &run.flow;
    write_outputs(out, bundle, s);
    return s;
}

RunSummary run_comparison(const RunConfig& c, const std::filesystem::path& out, int concurrency) {
    RunSummary s;
    s.kind = "comparison";
    if (c.domain.kind != DomainKind::Ball) throw Error("comparison pairs are generated on a ball domain");
    const auto n = static_cast<std::size_t>(c.comparison_pairs);
    std::vector<ComparisonReport> reports(n);
    std::vector<OrderedPair> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.push_back(random_ordered_pair(c.domain, c.seed, static_cast<int>(i)));
    const std::size_t width = static_cast<std::size_t>(std::max(1, concurrency));
    for (std::size_t begin = 0; begin < n; begin += width) {
        std::vector<std::future<ComparisonReport>> batch;
        for (std::size_t i = begin; i < std::min(n, begin + width); ++i)
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, [&, i] {
                return comparison_experiment(pairs[i].low, pairs[i].high, c.params, c.horizon);
            }));
        for (std::size_t i = begin; i < std::min(n, begin + width); ++i) reports[i] = batch[i - begin].get();
    }
    CsvTable table{"comparison.csv", {"pair", "shift", "bump", "power", "max_violation", "worst_step"}, {}};
    double worst = 0.0;
    bool blow_up = false;
    for (std::size_t i = 0; i < n; ++i) {
        table.rows.push_back({static_cast<double>(i), pairs[i].shift, pairs[i].bump,
                              static_cast<double>(pairs[i].power), reports[i].max_violation,
                              static_cast<double>(reports[i].worst_step)});
        worst = std::max(worst, reports[i].max_violation);
        blow_up = blow_up || reports[i].blow_up;
    }
    s.scalar("pairs", static_cast<double>(n));
    s.scalar("seed", static_cast<double>(c.seed));
    s.check("finite", "all co-evolved runs stay finite", blow_up ? 1.0 : 0.0, 0.0);
    s.check("ordering", "ordered data give ordered solutions", worst, 1e-10);
    OutputBundle bundle;
    bundle.tables.push_back(std::move(table));
    write_outputs(out, bundle, s);
    return s;
}

RunSummary run_viscosity(const RunConfig& c, const std::filesystem::path& out) {
    RunSummary s;
    s.kind = "viscosity";
    const IBVP problem = c.problem();
    auto grid = std::make_shared<const Grid>(build_grid(c.domain, c.params.spacing));
    const double dt = stable_dt(c.params, *grid).dt;
    const auto total = static_cast<std::int64_t>(std::ceil(c.horizon / dt - 1e-9));
    const std::int64_t gap = std::max<std::int64_t>(1, total / 10);
    const std::int64_t first = std::max<std::int64_t>(0, total - 2 * gap);
    SolveOptions opts;
    for (int k = 0; k < 3; ++k) opts.snapshot_times.push_back(static_cast<double>(first + k * gap) * dt);
    FlowReport report = solve_ibvp(problem, grid, c.params, static_cast<double>(first + 2 * gap) * dt, opts);
    flow_scalars(s, report);
    check_finite(s, report);
    std::vector<FieldState> slices;
    for (const auto& snap : report.snapshots) slices.push_back(snap.state);
    if (slices.size() == 3) viscosity_checks(s, slices, *grid, c.params, c.viscosity_radius, "");
    else s.check("snapshots", "three evenly spaced slices are available", 1.0, 0.0);
    OutputBundle bundle;
    bundle.flow = &report;
    write_outputs(out, bundle, s);
    return s;
}

RunSummary run_liouville(const RunConfig& c, const std::filesystem::path& out) {
    RunSummary s;
    s.kind = "liouville";
    const double delta = c.liouville_delta > 0.0 ? c.liouville_delta : 4.0 * c.params.spacing;
    const CylinderProblem problem =
        ramp_problem(c.domain, c.liouville_m, c.liouville_lambda, c.liouville_ramp_width, delta);
    const LiouvilleReport r = flatness_and_sandwich(problem, c.params, c.horizon);
    const Grid& grid = *r.flow.grid;
    flow_scalars(s, r.flow);
    check_finite(s, r.flow);
    s.scalar("delta", delta);
    s.scalar("eps_tilde", r.envelopes.eps_tilde);
    s.scalar("sup_flatness", r.sup_flatness);
    s.check("flatness", "u stays lambda on {x2 >= m + delta} up to eps |nu| T + 10 h Lip(g)",
            r.sup_flatness, r.flatness_bound);
    s.check("sandwich_lower", "g_minus(x2) <= u", r.max_lower_violation, 1e-8);
    s.check("sandwich_upper", "u <= g_plus(x2 + nu t) + eps nu t", r.max_upper_violation, 1e-8);
    s.check("axial_monotonicity", "u stays non-decreasing in x2", r.max_monotonicity_violation,
            1e-8 * static_cast<double>(std::max<std::int64_t>(1, r.flow.steps)));

    const double gap = r.flow.dt;
    const auto upper = envelope_fields(grid, r.envelopes, c.params.nu, true, 0.0, gap);
    const auto lower = envelope_fields(grid, r.envelopes, c.params.nu, false, 0.0, gap);
    ViscosityOptions opts;
    opts.radius = c.viscosity_radius;
    const auto sup = viscosity_spot_check(upper, grid, c.params, ViscosityMode::Super, opts);
    const auto sub = viscosity_spot_check(lower, grid, c.params, ViscosityMode::Sub, opts);
    s.check("envelope_upper_super", "u_plus = g_plus(x2 + nu t) is a super-solution",
            static_cast<double>(sup.violations.size()), 0.0);
    s.check("envelope_lower_sub", "u_minus = g_minus(x2) is a sub-solution",
            static_cast<double>(sub.violations.size()), 0.0);

    CsvTable table{"liouville.csv", {"t", "F", "lower_violation", "upper_violation", "monotonicity_violation"}, {}};
    for (const auto& row : r.rows)
        table.rows.push_back({row.t, row.flatness, row.lower_violation, row.upper_violation,
                              row.monotonicity_violation});
    OutputBundle bundle;
    bundle.flow = &r.flow;
    bundle.tables.push_back(std::move(table));
    write_outputs(out, bundle, s);
    return s;
}

}  // namespace

OrderedPair random_ordered_pair(const DomainSpec& ball, std::uint64_t seed, int index) {
    if (ball.kind != DomainKind::Ball) throw Error("ordered pairs are generated on a ball");
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(index));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int dim = ball.dim;
    std::array<double, 4> a{};
    for (auto& v : a) v = unit(rng);
    std::array<double, 3> k{};
    for (auto& v : k) v = 3.0 * unit(rng);
    const double amp = 0.25 * (1.0 + unit(rng));
    const double phase = 3.14159 * unit(rng);

    OrderedPair pair;
    pair.shift = index % 2 == 0 ? 0.25 * (1.0 + unit(rng)) : 0.0;
    pair.bump = 0.55 + 0.45 * unit(rng);
    pair.power = 2 + index % 2;
    const Point c = ball.center;
    const double r2 = ball.radius * ball.radius;
    auto low = [=](const Point& x) {
        double lin = a[0], arg = phase;
        for (int d = 0; d < dim; ++d) {
            lin += a[d + 1] * (x[d] - c[d]);
            arg += k[d] * (x[d] - c[d]);
        }
        return lin + amp * std::sin(arg);
    };
    auto bump = [=, b = pair.bump, p = pair.power](const Point& x) {
        double q = 0.0;
        for (int d = 0; d < dim; ++d) q += (x[d] - c[d]) * (x[d] - c[d]);
        return b * std::pow(std::max(0.0, 1.0 - q / r2), p);
    };
    const double s = pair.shift;
    pair.low = IBVP{ball, low, low};
    pair.high = IBVP{ball, [=](const Point& x) { return low(x) + s; },
                     [=](const Point& x) { return low(x) + s + bump(x); }};
    return pair;
}

RunSummary run(const RunConfig& config, const std::filesystem::path& out_dir, int concurrency) {
    try {
        switch (config.kind) {
            case ExperimentKind::Flow: return run_flow(config, out_dir);
            case ExperimentKind::Steady: return run_steady(config, out_dir);
            case ExperimentKind::Continuation: return run_continuation(config, out_dir, concurrency);
            case ExperimentKind::Barrier: return run_barrier(config, out_dir);
            case ExperimentKind::Comparison: return run_comparison(config, out_dir, concurrency);
            case ExperimentKind::Viscosity: return run_viscosity(config, out_dir);
            case ExperimentKind::Liouville: return run_liouville(config, out_dir);
        }
    } catch (const Error& e) {
        throw Error(std::string(to_string(config.kind)) + " experiment: " + e.what());
    }
    throw Error("unknown experiment kind");
}

}  // namespace mcf
