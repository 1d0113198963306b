#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mcf/flow.hpp"

namespace mcf {

enum class BarrierSign { Upper, Lower };

/// psi = +lambda d (upper) or -lambda d (lower) on the collar {d < rho}.
struct Barrier {
    BarrierSign sign = BarrierSign::Upper;
    double lambda = 1.0;
    double rho = 0.0;
    double beta = 0.0;
    double c_res = 0.0;  ///< sampled lower-order residual at the returned lambda
    /// |nu| lies outside (-n H0/(n+1), n H0/(n+1)) although below n H0.
    bool nu_flag = false;
    std::shared_ptr<const Grid> grid;
    /// Positions (in grid->active_nodes()) of the stepped nodes with d < rho.
    std::vector<std::int32_t> collar;

    double value(const Point& x) const;
    /// psi at the active node at position `pos`.
    double at(std::size_t pos) const;
};

/// Upper barrier for the data (h, g). Throws when H0 < 1e-3 or |nu| >= n H0.
/// A grid may be supplied to share the embedding with a flow run.
Barrier build_upper_barrier(const DomainSpec& domain, const ScalarFunction& h,
                            const ScalarFunction& g, const FlowParams& params,
                            std::shared_ptr<const Grid> grid = nullptr);

/// psi_minus = -(upper barrier for (-h, -g, -nu)).
Barrier build_lower_barrier(const DomainSpec& domain, const ScalarFunction& h,
                            const ScalarFunction& g, const FlowParams& params,
                            std::shared_ptr<const Grid> grid = nullptr);

/// Same barrier with a different slope (collar and rho unchanged).
Barrier with_lambda(Barrier barrier, double lambda);

/// Minimum over the collar of the discrete residual. Upper: -rate(h + psi),
/// lower: rate(h + psi). Non-negative values certify the barrier.
double barrier_supersolution_residual(const Barrier& barrier, const ScalarFunction& h,
                                      const FlowParams& params);

/// Max over collar pairs within 3h (cut points included) of |f(x) - f(y)| / |x - y|
/// for f = g - h, before the safety factor.
double collar_lipschitz(const Grid& grid, std::span<const std::int32_t> collar,
                        const ScalarFunction& h, const ScalarFunction& g);

struct SupNormBound {
    double bound = 0.0;   ///< C = max v + kappa
    double kappa = 0.0;   ///< max(|g|_inf, |h|_inf)
    double v_max = 0.0;
    bool available = false;
    std::int64_t steps = 0;
};

/// Relaxes the steady problem with unit data and speed |nu| and shifts it by
/// kappa; `tol` is the relaxation tolerance.
SupNormBound sup_norm_bound(const IBVP& problem, const FlowParams& params, double tol = 1e-7,
                            std::int64_t max_steps = kDefaultStepBudget);

struct ComparisonReport {
    double max_violation = 0.0;  ///< max over steps and nodes of (u_low - u_high)_+
    std::int64_t worst_step = 0;
    std::int64_t steps = 0;
    bool blow_up = false;
};

/// Co-evolves both problems on one grid. Throws when the data are not ordered
/// at the sampled nodes and boundary points.
ComparisonReport comparison_experiment(const IBVP& low, const IBVP& high, const FlowParams& params,
                                       double horizon);

/// Runs the flow and measures how far u leaves the band h + psi_lower <= u <= h + psi_upper
/// on the collars, together with the largest gradient on the near-boundary ring.
struct BarrierRun {
    FlowReport flow;
    double upper_excess = 0.0;
    double lower_excess = 0.0;
};
BarrierRun barrier_flow_check(const IBVP& problem, const Barrier& upper, const Barrier& lower,
                              const FlowParams& params, double horizon);

}  // namespace mcf
