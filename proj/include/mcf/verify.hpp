#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mcf/flow.hpp"

namespace mcf {

/// Per-step terms of the energy identity J' + D - S = 0.
struct EnergyTrace {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<double> energy;       ///< J
    std::vector<double> dissipation;  ///< D
    std::vector<double> source;       ///< S
    std::vector<double> ut_squared;   ///< int u_t^2
    std::vector<double> residual;     ///< R = J' + D - S

    /// max |R| over the steps with a centred J' (endpoints excluded).
    double max_abs_residual() const;
    /// Largest one-step increase of J.
    double max_energy_increase() const;
};

EnergyTrace energy_series(const FlowReport& report, const FlowParams& params);

struct DissipationBudget {
    double total = 0.0;             ///< sum dt * int u_t^2 over all applied steps
    double dissipated = 0.0;        ///< sum dt * D
    double energy_drop = 0.0;       ///< J(0) - J(T)
    double bound = 0.0;             ///< (sup|grad u| + eps)(J(0) + |nu| |D| 2 sup|u|)
    bool within_bound = false;
};

/// `report` supplies the sup norms and the domain volume.
DissipationBudget dissipation_budget(const EnergyTrace& trace, const FlowReport& report,
                                     const FlowParams& params);

/// sum dt * int u_t^2 over the steps starting in [t0, t1).
double integrated_ut_squared(const EnergyTrace& trace, double t0, double t1);

/// max |rate(g)| over the active nodes with trace h.
double ut_initial_slice_bound(const IBVP& problem, const FlowParams& params);
double ut_initial_slice_bound(const IBVP& problem, const Grid& grid, const FlowParams& params);

struct GradientCheck {
    double interior_max = 0.0;
    double boundary_max = 0.0;  ///< over the t = 0 slice and the near-boundary ring
    double tolerance = 0.0;
    bool passed = false;
};

GradientCheck gradient_interior_max_check(const FlowReport& report);

enum class ViscosityMode { Sub, Super };

const char* to_string(ViscosityMode mode);

using SymMatrix = std::array<std::array<double, 3>, 3>;

/// Quadratic test function data at a touching point.
struct ViscosityProbe {
    Point x0{};
    double t0 = 0.0;
    std::array<double, 3> p{};
    SymMatrix m{};
    double q = 0.0;
    bool degenerate = false;
};

struct Violation {
    std::int32_t node = -1;
    std::size_t slice = 0;
    ViscosityProbe probe;
    double margin = 0.0;  ///< amount by which the inequality fails
};

struct ViscosityOptions {
    int radius = 2;
    /// Upper bound on probed nodes per slice (0: all).
    std::size_t probe_budget = 0;
    /// Defaults to 10 h when negative.
    double tolerance = -1.0;
};

struct ViscosityResult {
    std::vector<Violation> violations;
    std::size_t probes = 0;   ///< candidate points examined
    std::size_t touches = 0;  ///< points where u - phi had a strict local extremum
    double worst_margin = -std::numeric_limits<double>::infinity();
};

/// Discrete check of the viscosity sub- or super-solution inequalities on
/// evenly spaced snapshots (at least 3).
ViscosityResult viscosity_spot_check(std::span<const FieldState> snapshots, const Grid& grid,
                                     const FlowParams& params, ViscosityMode mode,
                                     const ViscosityOptions& options = {});

/// sup over |eta| <= 1 (sub) or inf (super) of (delta - eta eta) : M.
double degenerate_branch_bound(const SymMatrix& m, int dim, ViscosityMode mode);

/// (delta - p p / |p|^2) : M + nu |p|.
double level_set_operator(const std::array<double, 3>& p, const SymMatrix& m, int dim, double nu);

}  // namespace mcf
