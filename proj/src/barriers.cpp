#include "mcf/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mcf {

namespace {

constexpr double kMinMeanCurvature = 1e-3;
constexpr double kBetaSafety = 1.5;
constexpr double kMaxLambda = 1e8;

double sign_of(BarrierSign s) { return s == BarrierSign::Upper ? 1.0 : -1.0; }

std::vector<double> exact_values(const Grid& grid, const ScalarFunction& f) {
    std::vector<double> v(static_cast<std::size_t>(grid.extended_size()),
                          std::numeric_limits<double>::quiet_NaN());
    for (std::int32_t node : grid.active_nodes()) v[node] = f(grid.position(node));
    const auto n = static_cast<std::size_t>(grid.node_count());
    const auto cuts = grid.cuts();
    for (std::size_t c = 0; c < cuts.size(); ++c) v[n + c] = f(cuts[c].point);
    return v;
}

// h + s * lambda * d sampled at the active nodes; the trace is h since d = 0 there.
std::vector<double> shifted_field(const Grid& grid, const std::vector<double>& h_values, double s,
                                  double lambda) {
    std::vector<double> v = h_values;
    for (std::int32_t node : grid.active_nodes()) v[node] += s * lambda * grid.distance(node);
    return v;
}

struct ResidualScan {
    double min_residual = std::numeric_limits<double>::infinity();
    double c_res = -std::numeric_limits<double>::infinity();
};

// Upper-barrier residual -rate(h + lambda d) and the lower-order part
// -lambda lap_h d - lambda |nu| - residual at every collar node.
ResidualScan scan_upper(const Grid& grid, std::span<const std::int32_t> collar,
                        const std::vector<double>& h_values, const std::vector<double>& d_values,
                        double lambda, const FlowParams& params) {
    ResidualScan scan;
    const auto v = shifted_field(grid, h_values, 1.0, lambda);
    for (std::int32_t pos : collar) {
        const auto p = static_cast<std::size_t>(pos);
        const double residual = -regularized_rate(derivatives_at(grid, v, p), grid.dim(), params);
        const auto dd = derivatives_at(grid, d_values, p);
        double lap = 0.0;
        for (int k = 0; k < grid.dim(); ++k) lap += dd.hess[k][k];
        scan.min_residual = std::min(scan.min_residual, residual);
        scan.c_res = std::max(scan.c_res, -lambda * lap - lambda * std::abs(params.nu) - residual);
    }
    return scan;
}

}  // namespace

double Barrier::value(const Point& x) const {
    return sign_of(sign) * lambda * signed_distance(grid->domain(), x);
}

double Barrier::at(std::size_t pos) const {
    return sign_of(sign) * lambda * grid->distance(grid->active_nodes()[pos]);
}

double collar_lipschitz(const Grid& grid, std::span<const std::int32_t> collar,
                        const ScalarFunction& h, const ScalarFunction& g) {
    const auto active = grid.active_nodes();
    std::vector<double> f(active.size());
    std::vector<std::uint8_t> in_collar(active.size(), 0);
    for (std::int32_t pos : collar) in_collar[pos] = 1;
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
        const Point x = grid.position(active[pos]);
        f[pos] = g(x) - h(x);
    }
    std::vector<std::vector<std::int32_t>> owned(static_cast<std::size_t>(grid.node_count()));
    const auto cuts = grid.cuts();
    std::vector<double> cut_f(cuts.size());
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        owned[cuts[c].node].push_back(static_cast<std::int32_t>(c));
        cut_f[c] = g(cuts[c].point) - h(cuts[c].point);
    }

    const int reach = 3;
    const double hs = grid.spacing();
    const double max_dist = reach * hs * (1.0 + 1e-12);
    const int dim = grid.dim();
    double best = 0.0;
    auto consider = [&](const Point& x, double fx, const Point& y, double fy) {
        double dist2 = 0.0;
        for (int k = 0; k < dim; ++k) dist2 += (x[k] - y[k]) * (x[k] - y[k]);
        const double dist = std::sqrt(dist2);
        if (dist > 0.0 && dist <= max_dist) best = std::max(best, std::abs(fx - fy) / dist);
    };

    for (std::int32_t pos : collar) {
        const std::int32_t node = active[pos];
        const Point x = grid.position(node);
        const auto ijk = grid.multi_index(node);
        const int zr = dim == 3 ? reach : 0;
        for (int dz = -zr; dz <= zr; ++dz)
            for (int dy = -reach; dy <= reach; ++dy)
                for (int dx = -reach; dx <= reach; ++dx) {
                    const std::int32_t other = grid.index({ijk[0] + dx, ijk[1] + dy, ijk[2] + dz});
                    if (other < 0 || !grid.active(other)) continue;
                    const std::int32_t opos = grid.active_position(other);
                    if (in_collar[opos] && other > node)
                        consider(x, f[pos], grid.position(other), f[opos]);
                    for (std::int32_t c : owned[other]) consider(x, f[pos], cuts[c].point, cut_f[c]);
                }
    }
    return best;
}

Barrier build_upper_barrier(const DomainSpec& domain, const ScalarFunction& h,
                            const ScalarFunction& g, const FlowParams& params,
                            std::shared_ptr<const Grid> grid) {
    params.validate();
    const double h0 = boundary_mean_curvature_bound(domain);
    if (h0 < kMinMeanCurvature) {
        std::ostringstream os;
        os << "barrier needs a boundary mean curvature bound H0 >= " << kMinMeanCurvature
           << ", got " << h0;
        throw Error(os.str());
    }
    const int n = domain.dim - 1;
    const double nu = std::abs(params.nu);
    if (nu >= n * h0) {
        std::ostringstream os;
        os << "barrier needs |nu| < n H0 = " << n * h0 << ", got |nu| = " << nu;
        throw Error(os.str());
    }
    if (!grid) grid = std::make_shared<const Grid>(build_grid(domain, params.spacing));

    Barrier b;
    b.sign = BarrierSign::Upper;
    b.grid = grid;
    b.nu_flag = !admissible_nu_interval(domain).contains(params.nu);
    b.rho = std::min(1.0 / (2.0 * h0), 1.0 / boundary_max_curvature(domain));
    for (std::int32_t node : grid->stepped_nodes())
        if (grid->distance(node) < b.rho) b.collar.push_back(grid->active_position(node));
    std::sort(b.collar.begin(), b.collar.end());

    b.beta = kBetaSafety * collar_lipschitz(*grid, b.collar, h, g);
    double lambda = std::max({1.0, b.beta, b.beta * domain.diameter() / b.rho});

    const auto h_values = exact_values(*grid, h);
    const auto d_values = exact_values(*grid, [&](const Point& x) {
        return std::max(0.0, signed_distance(domain, x));
    });
    const double margin = n * h0 - nu;
    for (int iter = 0;; ++iter) {
        const auto scan = scan_upper(*grid, b.collar, h_values, d_values, lambda, params);
        b.c_res = scan.c_res;
        const double target = (scan.c_res + 1.0) / margin;
        if (scan.min_residual >= 0.0 && target <= lambda * 1.01) break;
        if (iter >= 200 || lambda > kMaxLambda) {
            std::ostringstream os;
            os << "no barrier slope found up to lambda = " << lambda
               << " (min residual " << scan.min_residual << ")";
            throw Error(os.str());
        }
        lambda = scan.min_residual < 0.0 ? std::max(2.0 * lambda, target) : std::max(lambda, target);
    }
    b.lambda = lambda;
    return b;
}

Barrier build_lower_barrier(const DomainSpec& domain, const ScalarFunction& h,
                            const ScalarFunction& g, const FlowParams& params,
                            std::shared_ptr<const Grid> grid) {
    FlowParams mirrored = params;
    mirrored.nu = -params.nu;
    Barrier b = build_upper_barrier(
        domain, [&](const Point& x) { return -h(x); }, [&](const Point& x) { return -g(x); },
        mirrored, std::move(grid));
    b.sign = BarrierSign::Lower;
    return b;
}

Barrier with_lambda(Barrier barrier, double lambda) {
    barrier.lambda = lambda;
    return barrier;
}

double barrier_supersolution_residual(const Barrier& barrier, const ScalarFunction& h,
                                      const FlowParams& params) {
    const Grid& grid = *barrier.grid;
    const double s = sign_of(barrier.sign);
    const auto v = shifted_field(grid, exact_values(grid, h), s, barrier.lambda);
    double worst = std::numeric_limits<double>::infinity();
    for (std::int32_t pos : barrier.collar) {
        const double rate =
            regularized_rate(derivatives_at(grid, v, static_cast<std::size_t>(pos)), grid.dim(), params);
        worst = std::min(worst, -s * rate);
    }
    return worst;
}

SupNormBound sup_norm_bound(const IBVP& problem, const FlowParams& params, double tol,
                            std::int64_t max_steps) {
    const double h0 = boundary_mean_curvature_bound(problem.domain);
    if (!(h0 > 0.0)) throw Error("sup_norm_bound needs a boundary mean curvature bound H0 > 0");
    SupNormBound out;
    IBVP unit{problem.domain, [](const Point&) { return 1.0; }, [](const Point&) { return 1.0; }};
    FlowParams p = params;
    p.nu = std::abs(params.nu);
    const SteadyResult v = relax_to_steady(unit, p, tol, max_steps);
    out.steps = v.steps;
    out.available = v.converged;
    out.v_max = -std::numeric_limits<double>::infinity();
    for (std::int32_t node : v.grid->active_nodes()) out.v_max = std::max(out.v_max, v.state.values[node]);

    const Grid& grid = *v.grid;
    for (std::int32_t node : grid.active_nodes()) {
        const Point x = grid.position(node);
        out.kappa = std::max({out.kappa, std::abs(problem.initial(x)), std::abs(problem.boundary(x))});
    }
    for (const auto& x : sample_boundary(problem.domain, 1000))
        out.kappa = std::max({out.kappa, std::abs(problem.initial(x)), std::abs(problem.boundary(x))});
    out.bound = out.v_max + out.kappa;
    return out;
}

ComparisonReport comparison_experiment(const IBVP& low, const IBVP& high, const FlowParams& params,
                                       double horizon) {
    params.validate();
    low.check_compatible();
    high.check_compatible();
    const Grid grid = build_grid(low.domain, params.spacing);

    for (std::int32_t node : grid.active_nodes()) {
        const Point x = grid.position(node);
        if (low.initial(x) > high.initial(x)) {
            std::ostringstream os;
            os << "comparison data not ordered: g_low > g_high at (" << x[0] << ", " << x[1] << ")";
            throw Error(os.str());
        }
    }
    for (const auto& x : sample_boundary(low.domain, 1000))
        if (low.boundary(x) > high.boundary(x)) {
            std::ostringstream os;
            os << "comparison data not ordered: h_low > h_high at (" << x[0] << ", " << x[1] << ")";
            throw Error(os.str());
        }

    Stepper s_low(grid, params), s_high(grid, params);
    FieldState u_low = make_state(grid, low.initial, low.boundary);
    FieldState u_high = make_state(grid, high.initial, high.boundary);
    const auto total = static_cast<std::int64_t>(std::ceil(horizon / s_low.dt() - 1e-9));

    ComparisonReport report;
    for (std::int64_t k = 0;; ++k) {
        for (std::int32_t node : grid.active_nodes()) {
            const double excess = u_low.values[node] - u_high.values[node];
            if (excess > report.max_violation) {
                report.max_violation = excess;
                report.worst_step = k;
            }
        }
        if (k == total) break;
        s_low.evaluate(u_low);
        s_high.evaluate(u_high);
        try {
            s_low.advance(u_low);
            s_high.advance(u_high);
        } catch (const NonFiniteError&) {
            report.blow_up = true;
            break;
        }
        report.steps = k + 1;
    }
    return report;
}

BarrierRun barrier_flow_check(const IBVP& problem, const Barrier& upper, const Barrier& lower,
                              const FlowParams& params, double horizon) {
    const Grid& grid = *upper.grid;
    if (lower.grid != upper.grid) throw Error("upper and lower barriers must share one grid");
    std::vector<double> h_at(grid.active_nodes().size());
    for (std::size_t pos = 0; pos < h_at.size(); ++pos)
        h_at[pos] = problem.boundary(grid.position(grid.active_nodes()[pos]));

    BarrierRun run;
    SolveOptions opts;
    opts.observer = [&](const Grid& g, const FieldState& state, std::span<const double>, std::int64_t) {
        const auto active = g.active_nodes();
        for (std::int32_t pos : upper.collar) {
            const double u = state.values[active[pos]];
            run.upper_excess = std::max(run.upper_excess, u - h_at[pos] - upper.at(pos));
        }
        for (std::int32_t pos : lower.collar) {
            const double u = state.values[active[pos]];
            run.lower_excess = std::max(run.lower_excess, h_at[pos] + lower.at(pos) - u);
        }
    };
    run.flow = solve_ibvp(problem, upper.grid, params, horizon, opts);
    return run;
}

}  // namespace mcf
