#include "mcf/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace mcf {

double IBVP::compatibility_mismatch(int samples) const {
    double worst = 0.0;
    for (const auto& p : sample_boundary(domain, samples))
        worst = std::max(worst, std::abs(boundary(p) - initial(p)));
    return worst;
}

void IBVP::check_compatible() const {
    const double mismatch = compatibility_mismatch();
    if (!(mismatch <= compatibility_tol)) {
        std::ostringstream os;
        os << "boundary data and initial data differ on the boundary: max |h - g| = " << mismatch;
        throw Error(os.str());
    }
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return "completed";
        case RunStatus::BlowUp: return "blow-up";
        case RunStatus::Converged: return "converged";
        case RunStatus::BudgetExhausted: return "budget-exhausted";
    }
    return "unknown";
}

SeriesRow measure(const Grid& grid, const FieldState& state, std::span<const double> rate,
                  std::span<const double> grad_norm, const FlowParams& params) {
    SeriesRow row;
    row.t = state.t;
    const double eps2 = params.epsilon * params.epsilon;
    const auto active = grid.active_nodes();
    double src = 0.0;
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
        const std::int32_t node = active[pos];
        const double vol = grid.cell_volume(pos);
        const double g = grad_norm[pos];
        const double r = rate[pos];
        const double root = std::sqrt(g * g + eps2);
        row.sup_u = std::max(row.sup_u, std::abs(state.values[node]));
        row.sup_grad = std::max(row.sup_grad, g);
        if (grid.kind(node) == NodeKind::Interior)
            row.sup_grad_interior = std::max(row.sup_grad_interior, g);
        else
            row.sup_grad_ring = std::max(row.sup_grad_ring, g);
        row.sup_ut = std::max(row.sup_ut, std::abs(r));
        row.energy += vol * root;
        row.ut_squared += vol * r * r;
        row.dissipation += vol * r * r / root;
        src += vol * r;
    }
    row.source = params.nu * src;
    return row;
}

FlowReport solve_ibvp(const IBVP& problem, const FlowParams& params, double horizon,
                      const SolveOptions& options) {
    params.validate();
    auto grid = std::make_shared<const Grid>(build_grid(problem.domain, params.spacing));
    return solve_ibvp(problem, std::move(grid), params, horizon, options);
}

FlowReport solve_ibvp(const IBVP& problem, std::shared_ptr<const Grid> grid,
                      const FlowParams& params, double horizon, const SolveOptions& options) {
    params.validate();
    problem.check_compatible();
    if (!(horizon >= 0.0)) throw Error("horizon must be non-negative");

    const auto start = std::chrono::steady_clock::now();
    FlowReport report;
    report.grid = grid;
    report.nu_outside_admissible = !admissible_nu_interval(problem.domain).contains(params.nu);

    Stepper stepper(*grid, params, options.exec);
    report.dt = stepper.dt();
    report.dt_warning = stepper.dt_warning();
    const auto total = static_cast<std::int64_t>(std::ceil(horizon / stepper.dt() - 1e-9));

    std::vector<std::int64_t> snap_steps;
    for (double ts : options.snapshot_times) {
        auto k = static_cast<std::int64_t>(std::floor(ts / stepper.dt() + 1e-9));
        snap_steps.push_back(std::clamp<std::int64_t>(k, 0, total));
    }
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());
    std::size_t next_snap = 0;

    FieldState state = make_state(*grid, problem.initial, problem.boundary);
    report.series.reserve(static_cast<std::size_t>(total + 1));
    for (std::int64_t k = 0;; ++k) {
        stepper.evaluate(state);
        report.series.push_back(measure(*grid, state, stepper.rate(), stepper.grad_norm(), params));
        if (options.observer) options.observer(*grid, state, stepper.rate(), k);
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == k)
            report.snapshots.push_back({k, state}), ++next_snap;
        if (k == total) break;
        try {
            stepper.advance(state);
        } catch (const NonFiniteError& e) {
            report.status = RunStatus::BlowUp;
            report.message = e.what();
            break;
        }
    }
    report.steps = stepper.steps_taken();
    report.final_state = std::move(state);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

SteadyResult relax_to_steady(const IBVP& problem, const FlowParams& params, double tol,
                             std::int64_t max_steps, Execution exec) {
    params.validate();
    problem.check_compatible();
    if (!(tol > 0.0)) throw Error("steady tolerance must be positive");
    SteadyResult result;
    result.grid = std::make_shared<const Grid>(build_grid(problem.domain, params.spacing));
    const Grid& grid = *result.grid;
    Stepper stepper(grid, params, exec);
    FieldState state = make_state(grid, problem.initial, problem.boundary);
    for (;;) {
        stepper.evaluate(state);
        double sup = 0.0;
        for (double r : stepper.rate()) sup = std::max(sup, std::abs(r));
        result.final_rate = sup;
        if (sup < tol) {
            result.converged = true;
            break;
        }
        if (stepper.steps_taken() >= max_steps) break;
        stepper.advance(state);
    }
    result.steps = stepper.steps_taken();
    result.state = std::move(state);
    return result;
}

double sup_difference(const Grid& grid, const FieldState& a, const FieldState& b) {
    double d = 0.0;
    for (std::int32_t node : grid.active_nodes())
        d = std::max(d, std::abs(a.values[node] - b.values[node]));
    return d;
}

ContinuationTable epsilon_continuation(const IBVP& problem, std::span<const double> eps_list,
                                       const FlowParams& params, double horizon, int concurrency) {
    if (eps_list.size() < 3) throw Error("epsilon continuation needs at least 3 epsilon values");
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw Error("epsilon continuation list must be strictly decreasing");

    ContinuationTable table;
    table.eps.assign(eps_list.begin(), eps_list.end());
    auto grid = std::make_shared<const Grid>(build_grid(problem.domain, params.spacing));

    auto run_one = [&](double eps) {
        FlowParams p = params;
        p.epsilon = eps;
        SolveOptions opts;
        opts.exec = concurrency > 1 ? Execution::Serial : Execution::Parallel;
        return solve_ibvp(problem, grid, p, horizon, opts);
    };

    std::vector<FlowReport> runs(eps_list.size());
    const std::size_t width = static_cast<std::size_t>(std::max(1, concurrency));
    for (std::size_t begin = 0; begin < eps_list.size(); begin += width) {
        std::vector<std::future<FlowReport>> batch;
        const std::size_t end = std::min(eps_list.size(), begin + width);
        for (std::size_t i = begin; i < end; ++i)
            batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                       run_one, eps_list[i]));
        for (std::size_t i = begin; i < end; ++i) runs[i] = batch[i - begin].get();
    }

    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        for (std::size_t j : {i, i + 1})
            if (runs[j].status != RunStatus::Completed) {
                std::ostringstream os;
                os << "run with eps = " << eps_list[j] << " failed: " << runs[j].message;
                table.failure = os.str();
                break;
            }
        if (!table.failure.empty()) break;
        table.rows.push_back({eps_list[i], eps_list[i + 1],
                              sup_difference(*grid, runs[i].final_state, runs[i + 1].final_state)});
    }
    table.strictly_decreasing = table.failure.empty() && table.rows.size() + 1 == eps_list.size();
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (!(table.rows[i].sup_difference < table.rows[i - 1].sup_difference))
            table.strictly_decreasing = false;
    return table;
}

}  // namespace mcf
