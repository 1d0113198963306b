#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mcf/geometry.hpp"
#include "mcf/operator.hpp"

namespace mcf {

/// Initial-boundary value problem: u = h on the lateral boundary, u = g at t = 0.
struct IBVP {
    DomainSpec domain;
    ScalarFunction boundary;  ///< h, evaluable on the closure of the domain
    ScalarFunction initial;   ///< g
    double compatibility_tol = 1e-10;

    /// Largest |h - g| over `samples` boundary points.
    double compatibility_mismatch(int samples = 1000) const;
    /// Throws mcf::Error with the mismatch when h != g on the boundary.
    void check_compatible() const;
};

/// One row of the per-step diagnostics. Integrals are node sums weighted by
/// the grid cell volumes.
struct SeriesRow {
    double t = 0.0;
    double sup_u = 0.0;
    double sup_grad = 0.0;
    double sup_grad_interior = 0.0;  ///< over Interior-class nodes
    double sup_grad_ring = 0.0;      ///< over NearBoundary-class nodes
    double sup_ut = 0.0;
    double energy = 0.0;       ///< J = int sqrt(|grad u|^2 + eps^2)
    double ut_squared = 0.0;   ///< int u_t^2
    double dissipation = 0.0;  ///< int u_t^2 / sqrt(|grad u|^2 + eps^2)
    double source = 0.0;       ///< nu int u_t
};

struct Snapshot {
    std::int64_t step;
    FieldState state;
};

enum class RunStatus { Completed, BlowUp, Converged, BudgetExhausted };

const char* to_string(RunStatus status);

struct FlowReport {
    std::shared_ptr<const Grid> grid;
    std::vector<SeriesRow> series;
    std::vector<Snapshot> snapshots;
    FieldState final_state;
    double dt = 0.0;
    std::int64_t steps = 0;
    double wall_seconds = 0.0;
    bool dt_warning = false;
    bool nu_outside_admissible = false;
    RunStatus status = RunStatus::Completed;
    std::string message;
};

/// Called once per evaluated state (steps 0..K) with the rate that is about
/// to be applied, indexed like grid.active_nodes().
using StepObserver =
    std::function<void(const Grid&, const FieldState&, std::span<const double> rate, std::int64_t step)>;

struct SolveOptions {
    std::vector<double> snapshot_times;
    Execution exec = Execution::Parallel;
    StepObserver observer;
};

/// Per-step diagnostics of `state` given its evaluated rate and |grad u|.
SeriesRow measure(const Grid& grid, const FieldState& state, std::span<const double> rate,
                  std::span<const double> grad_norm, const FlowParams& params);

/// Evolves g to time `horizon` (ceil(horizon / dt) steps). Snapshot times are
/// rounded down to the nearest completed step. A non-finite value stops the
/// run with status BlowUp and the partial report.
FlowReport solve_ibvp(const IBVP& problem, const FlowParams& params, double horizon,
                      const SolveOptions& options = {});
FlowReport solve_ibvp(const IBVP& problem, std::shared_ptr<const Grid> grid,
                      const FlowParams& params, double horizon, const SolveOptions& options = {});

struct SteadyResult {
    std::shared_ptr<const Grid> grid;
    FieldState state;
    std::int64_t steps = 0;
    double final_rate = 0.0;  ///< sup |rate| at the returned state
    bool converged = false;
};

constexpr std::int64_t kDefaultStepBudget = 10'000'000;

/// Steps until sup |rate| < tol or the budget is exhausted.
SteadyResult relax_to_steady(const IBVP& problem, const FlowParams& params, double tol,
                             std::int64_t max_steps = kDefaultStepBudget,
                             Execution exec = Execution::Parallel);

struct ContinuationRow {
    double eps_coarse;
    double eps_fine;
    double sup_difference;
};

struct ContinuationTable {
    std::vector<double> eps;
    std::vector<ContinuationRow> rows;
    bool strictly_decreasing = false;
    /// Non-empty when a run failed; rows stop before the failing one.
    std::string failure;
};

/// Solves the problem for each epsilon to `horizon` and tabulates sup-norm
/// differences of consecutive solutions. Independent runs use up to
/// `concurrency` threads.
ContinuationTable epsilon_continuation(const IBVP& problem, std::span<const double> eps_list,
                                       const FlowParams& params, double horizon,
                                       int concurrency = 1);

/// Max over active nodes of |a - b|.
double sup_difference(const Grid& grid, const FieldState& a, const FieldState& b);

}  // namespace mcf
