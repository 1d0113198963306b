#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mcf/geometry.hpp"

namespace mcf {

/// Scalar data on the closure of the domain (boundary data h, initial data g).
using ScalarFunction = std::function<double(const Point&)>;

/// Knobs of the regularized operator
///   u_t = (delta_kl - s^2 u_k u_l / (eps^2 + s^2 |grad u|^2)) u_kl
///         + s nu sqrt(eps^2 + s^2 |grad u|^2)
/// with s = sigma. Only sigma = 1 is the flow equation proper; smaller sigma
/// is exposed as an operator parameter.
struct FlowParams {
    double epsilon = 0.05;
    double nu = 0.0;
    double sigma = 1.0;
    double cfl_factor = 0.25;
    double spacing = 1.0 / 32.0;
    std::optional<double> dt_override;

    void validate() const;
};

/// Field on a grid. `values` is the extended vector of the grid: one entry per
/// box node (NaN on exterior nodes) followed by the boundary trace at every cut.
struct FieldState {
    std::vector<double> values;
    double t = 0.0;

    double node(std::int32_t i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Samples `initial` on the active nodes, `boundary` on the cuts, then
/// refreshes pinned nodes.
FieldState make_state(const Grid& grid, const ScalarFunction& initial,
                      const ScalarFunction& boundary, double t = 0.0);

/// Resets the boundary trace to `boundary` and refreshes pinned nodes.
void impose_boundary(FieldState& state, const Grid& grid, const ScalarFunction& boundary);

/// Pinned node values from their interpolation sources.
void refresh_pinned(std::span<double> values, const Grid& grid);

/// Largest deviation of the boundary trace from `boundary`: direct trace
/// slots plus the linear extrapolation through every pinned node.
double boundary_trace_error(const FieldState& state, const Grid& grid,
                            const ScalarFunction& boundary);

struct Derivatives {
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    std::array<std::array<double, 3>, 3> hess{};
};

/// Finite-difference gradient and Hessian at an active node (by position in
/// grid.active_nodes()). Central differences where the stencil is complete,
/// Shortley-Weller spacings toward boundary cuts.
Derivatives derivatives_at(const Grid& grid, std::span<const double> values, std::size_t active_pos);

/// Rate of the regularized operator for given first and second derivatives.
double regularized_rate(const Derivatives& d, int dim, const FlowParams& params);

/// Per-active-node gradient after imposing `boundary` on a copy of the trace.
std::vector<Point> gradient(const FieldState& state, const Grid& grid, const ScalarFunction& boundary);

/// Per-active-node rate u_t; pinned nodes carry the interpolated rate of their
/// source (the boundary trace does not move).
std::vector<double> regularized_rhs(const FieldState& state, const Grid& grid,
                                    const FlowParams& params, const ScalarFunction& boundary);

enum class Execution { Serial, Parallel };

/// Rate and |grad u| at every active node; the serial loop is the reference,
/// the parallel loop must agree with it bit for bit.
void evaluate_rates(const Grid& grid, std::span<const double> values, const FlowParams& params,
                    std::span<double> rate, std::span<double> grad_norm, Execution exec);

struct TimeStep {
    double dt;
    bool warning;  ///< dt_override exceeds 0.5 h^2 / (n+1)
};

/// dt = cfl_factor * h^2 / (n+1) unless overridden.
TimeStep stable_dt(const FlowParams& params, const Grid& grid);

class NonFiniteError : public Error {
public:
    NonFiniteError(std::int32_t node, std::int64_t step);
    std::int32_t node;
    std::int64_t step;
};

/// Forward-Euler stepper with reusable buffers.
class Stepper {
public:
    Stepper(const Grid& grid, const FlowParams& params, Execution exec = Execution::Parallel);

    double dt() const { return dt_; }
    bool dt_warning() const { return dt_warning_; }
    std::int64_t steps_taken() const { return steps_; }

    /// Evaluates rate and gradient norm at `state`.
    void evaluate(const FieldState& state);
    std::span<const double> rate() const { return rate_; }
    std::span<const double> grad_norm() const { return grad_norm_; }

    /// u += dt * rate on stepped nodes using the last evaluation; pinned nodes
    /// follow; the trace is untouched. Throws NonFiniteError.
    void advance(FieldState& state);

private:
    const Grid* grid_;
    FlowParams params_;
    Execution exec_;
    double dt_;
    bool dt_warning_;
    std::int64_t steps_ = 0;
    std::vector<double> rate_;
    std::vector<double> grad_norm_;
};

/// One forward-Euler step; the returned state has its trace re-imposed.
FieldState step(const FieldState& state, const Grid& grid, const FlowParams& params,
                const ScalarFunction& boundary);

}  // namespace mcf
