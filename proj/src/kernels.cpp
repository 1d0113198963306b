// Per-node rate kernels. The serial loop is the reference implementation;
// the OpenMP loop performs the identical per-node arithmetic.

#include <cmath>

#include "mcf/operator.hpp"

namespace mcf {

namespace {

inline void node_rate(const Grid& grid, std::span<const double> values, const FlowParams& params,
                      std::size_t pos, double& rate, double& grad_norm) {
    const Derivatives d = derivatives_at(grid, values, pos);
    double g2 = 0.0;
    for (int k = 0; k < grid.dim(); ++k) g2 += d.grad[k] * d.grad[k];
    grad_norm = std::sqrt(g2);
    rate = regularized_rate(d, grid.dim(), params);
}

void fix_pinned_rates(const Grid& grid, std::span<double> rate) {
    for (const auto& p : grid.pinned_nodes()) {
        const auto pos = static_cast<std::size_t>(grid.active_position(p.node));
        rate[pos] = p.source == p.node
                        ? 0.0
                        : p.weight * rate[static_cast<std::size_t>(grid.active_position(p.source))];
    }
}

void rates_serial(const Grid& grid, std::span<const double> values, const FlowParams& params,
                  std::span<double> rate, std::span<double> grad_norm) {
    const std::size_t count = grid.active_nodes().size();
    for (std::size_t pos = 0; pos < count; ++pos)
        node_rate(grid, values, params, pos, rate[pos], grad_norm[pos]);
}

void rates_parallel(const Grid& grid, std::span<const double> values, const FlowParams& params,
                    std::span<double> rate, std::span<double> grad_norm) {
    const auto count = static_cast<std::int64_t>(grid.active_nodes().size());
#pragma omp parallel for schedule(static)
    for (std::int64_t pos = 0; pos < count; ++pos) {
        const auto p = static_cast<std::size_t>(pos);
        node_rate(grid, values, params, p, rate[p], grad_norm[p]);
    }
}

}  // namespace

void evaluate_rates(const Grid& grid, std::span<const double> values, const FlowParams& params,
                    std::span<double> rate, std::span<double> grad_norm, Execution exec) {
    if (exec == Execution::Parallel)
        rates_parallel(grid, values, params, rate, grad_norm);
    else
        rates_serial(grid, values, params, rate, grad_norm);
    fix_pinned_rates(grid, rate);
}

}  // namespace mcf
