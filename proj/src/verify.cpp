#include "mcf/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mcf {

double EnergyTrace::max_abs_residual() const {
    const std::size_t n = residual.size();
    double worst = 0.0;
    const std::size_t lo = n > 2 ? 1 : 0;
    const std::size_t hi = n > 2 ? n - 1 : n;
    for (std::size_t k = lo; k < hi; ++k) worst = std::max(worst, std::abs(residual[k]));
    return worst;
}

double EnergyTrace::max_energy_increase() const {
    double worst = 0.0;
    for (std::size_t k = 1; k < energy.size(); ++k) worst = std::max(worst, energy[k] - energy[k - 1]);
    return worst;
}

EnergyTrace energy_series(const FlowReport& report, const FlowParams&) {
    EnergyTrace tr;
    tr.dt = report.dt;
    const std::size_t n = report.series.size();
    for (const auto& row : report.series) {
        tr.t.push_back(row.t);
        tr.energy.push_back(row.energy);
        tr.dissipation.push_back(row.dissipation);
        tr.source.push_back(row.source);
        tr.ut_squared.push_back(row.ut_squared);
    }
    tr.residual.assign(n, 0.0);
    if (n < 2) return tr;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == n ? k : k + 1;
        const double slope = (tr.energy[b] - tr.energy[a]) / (tr.t[b] - tr.t[a]);
        tr.residual[k] = slope + tr.dissipation[k] - tr.source[k];
    }
    return tr;
}

double integrated_ut_squared(const EnergyTrace& trace, double t0, double t1) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < trace.t.size(); ++k)
        if (trace.t[k] >= t0 - 1e-12 && trace.t[k] < t1 - 1e-12)
            total += (trace.t[k + 1] - trace.t[k]) * trace.ut_squared[k];
    return total;
}

DissipationBudget dissipation_budget(const EnergyTrace& trace, const FlowReport& report,
                                     const FlowParams& params) {
    DissipationBudget b;
    for (std::size_t k = 0; k + 1 < trace.t.size(); ++k) {
        const double step = trace.t[k + 1] - trace.t[k];
        b.total += step * trace.ut_squared[k];
        b.dissipated += step * trace.dissipation[k];
    }
    if (!trace.energy.empty()) b.energy_drop = trace.energy.front() - trace.energy.back();

    double sup_grad = 0.0, sup_u = 0.0;
    for (const auto& row : report.series) {
        sup_grad = std::max(sup_grad, row.sup_grad);
        sup_u = std::max(sup_u, row.sup_u);
    }
    double volume = 0.0;
    if (report.grid)
        for (std::size_t pos = 0; pos < report.grid->active_nodes().size(); ++pos)
            volume += report.grid->cell_volume(pos);
    const double j0 = trace.energy.empty() ? 0.0 : trace.energy.front();
    b.bound = (sup_grad + params.epsilon) * (j0 + std::abs(params.nu) * volume * 2.0 * sup_u);
    b.within_bound = std::isfinite(b.total) && b.total <= b.bound + 1e-12;
    return b;
}

double ut_initial_slice_bound(const IBVP& problem, const Grid& grid, const FlowParams& params) {
    Stepper stepper(grid, params, Execution::Serial);
    stepper.evaluate(make_state(grid, problem.initial, problem.boundary));
    double b = 0.0;
    for (double r : stepper.rate()) b = std::max(b, std::abs(r));
    return b;
}

double ut_initial_slice_bound(const IBVP& problem, const FlowParams& params) {
    params.validate();
    return ut_initial_slice_bound(problem, build_grid(problem.domain, params.spacing), params);
}

GradientCheck gradient_interior_max_check(const FlowReport& report) {
    GradientCheck c;
    if (report.series.empty() || !report.grid) return c;
    c.boundary_max = report.series.front().sup_grad;
    for (const auto& row : report.series) {
        c.interior_max = std::max(c.interior_max, row.sup_grad_interior);
        c.boundary_max = std::max(c.boundary_max, row.sup_grad_ring);
    }
    c.tolerance = 10.0 * report.grid->spacing();
    c.passed = c.interior_max <= c.boundary_max + c.tolerance;
    return c;
}

const char* to_string(ViscosityMode mode) { return mode == ViscosityMode::Sub ? "sub" : "super"; }

namespace {

template <int N>
std::pair<double, double> eigen_extremes(const SymMatrix& m, double& trace) {
    Eigen::Matrix<double, N, N> a;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) a(i, j) = m[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(a, Eigen::EigenvaluesOnly);
    trace = es.eigenvalues().sum();
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

double degenerate_branch_bound(const SymMatrix& m, int dim, ViscosityMode mode) {
    double trace = 0.0;
    const auto [lo, hi] = dim == 3 ? eigen_extremes<3>(m, trace) : eigen_extremes<2>(m, trace);
    if (mode == ViscosityMode::Sub) return trace - std::min(lo, 0.0);
    return trace - std::max(hi, 0.0);
}

double level_set_operator(const std::array<double, 3>& p, const SymMatrix& m, int dim, double nu) {
    double p2 = 0.0, trace = 0.0, directional = 0.0;
    for (int k = 0; k < dim; ++k) {
        p2 += p[k] * p[k];
        trace += m[k][k];
        for (int l = 0; l < dim; ++l) directional += p[k] * p[l] * m[k][l];
    }
    return trace - directional / p2 + nu * std::sqrt(p2);
}

ViscosityResult viscosity_spot_check(std::span<const FieldState> snapshots, const Grid& grid,
                                     const FlowParams& params, ViscosityMode mode,
                                     const ViscosityOptions& options) {
    if (snapshots.size() < 3) throw Error("viscosity check needs at least 3 snapshots");
    const double gap = snapshots[1].t - snapshots[0].t;
    if (!(gap > 0.0)) throw Error("viscosity check needs increasing snapshot times");
    for (std::size_t s = 1; s < snapshots.size(); ++s) {
        const double g = snapshots[s].t - snapshots[s - 1].t;
        if (std::abs(g - gap) > 1e-9 * std::max(1.0, gap) + 1e-6 * gap) {
            std::ostringstream os;
            os << "snapshot times are not evenly spaced (gap " << g << " vs " << gap
               << "); the time-difference stencil needs a uniform spacing";
            throw Error(os.str());
        }
    }

    const int dim = grid.dim();
    const int r = std::max(1, options.radius);
    const double h = grid.spacing();
    const double tau = options.tolerance >= 0.0 ? options.tolerance : 10.0 * h;
    const double delta = h;
    const double time_scale = h / gap;
    const double floor = std::max(10.0 * h * h, params.epsilon * params.epsilon);
    const double sgn = mode == ViscosityMode::Sub ? 1.0 : -1.0;

    // Nodes whose whole (2r+1)^dim box is active.
    std::vector<std::int32_t> eligible;
    const int zr = dim == 3 ? r : 0;
    for (std::int32_t node : grid.active_nodes()) {
        const auto ijk = grid.multi_index(node);
        bool ok = true;
        for (int dz = -zr; dz <= zr && ok; ++dz)
            for (int dy = -r; dy <= r && ok; ++dy)
                for (int dx = -r; dx <= r && ok; ++dx) {
                    const std::int32_t o = grid.index({ijk[0] + dx, ijk[1] + dy, ijk[2] + dz});
                    ok = o >= 0 && grid.active(o);
                }
        if (ok) eligible.push_back(node);
    }
    if (options.probe_budget > 0 && eligible.size() > options.probe_budget) {
        std::vector<std::int32_t> picked;
        const double stride = static_cast<double>(eligible.size()) / options.probe_budget;
        for (std::size_t i = 0; i < options.probe_budget; ++i)
            picked.push_back(eligible[static_cast<std::size_t>(i * stride)]);
        eligible = std::move(picked);
    }

    ViscosityResult result;
    for (std::size_t s = 1; s + 1 < snapshots.size(); ++s) {
        const auto& prev = snapshots[s - 1].values;
        const auto& cur = snapshots[s].values;
        const auto& next = snapshots[s + 1].values;
        for (std::int32_t node : eligible) {
            ++result.probes;
            const auto ijk = grid.multi_index(node);
            auto at = [&](const std::vector<double>& v, int dx, int dy, int dz) {
                return v[grid.index({ijk[0] + dx, ijk[1] + dy, ijk[2] + dz})];
            };
            auto offset = [](int k, int sgn_) {
                std::array<int, 3> o{0, 0, 0};
                o[k] = sgn_;
                return o;
            };
            ViscosityProbe probe;
            probe.x0 = grid.position(node);
            probe.t0 = snapshots[s].t;
            const double u0 = cur[node];
            for (int k = 0; k < dim; ++k) {
                const auto e = offset(k, 1);
                const double up = at(cur, e[0], e[1], e[2]);
                const double um = at(cur, -e[0], -e[1], -e[2]);
                probe.p[k] = (up - um) / (2.0 * h);
                probe.m[k][k] = (up - 2.0 * u0 + um) / (h * h);
                for (int l = k + 1; l < dim; ++l) {
                    std::array<int, 3> pp{0, 0, 0}, pm{0, 0, 0};
                    pp[k] = 1, pp[l] = 1;
                    pm[k] = 1, pm[l] = -1;
                    const double v = (at(cur, pp[0], pp[1], pp[2]) - at(cur, pm[0], pm[1], pm[2]) -
                                      at(cur, -pm[0], -pm[1], -pm[2]) + at(cur, -pp[0], -pp[1], -pp[2])) /
                                     (4.0 * h * h);
                    probe.m[k][l] = probe.m[l][k] = v;
                }
            }
            probe.q = (next[node] - prev[node]) / (2.0 * gap);

            bool strict = true;
            for (int dt = -1; dt <= 1 && strict; ++dt) {
                const auto& slice = dt < 0 ? prev : (dt > 0 ? next : cur);
                const double ts = dt * gap;
                for (int dz = -zr; dz <= zr && strict; ++dz)
                    for (int dy = -r; dy <= r && strict; ++dy)
                        for (int dx = -r; dx <= r && strict; ++dx) {
                            if (dt == 0 && dx == 0 && dy == 0 && dz == 0) continue;
                            const std::array<double, 3> y{dx * h, dy * h, dz * h};
                            double model = probe.q * ts;
                            double y2 = 0.0;
                            for (int k = 0; k < dim; ++k) {
                                model += probe.p[k] * y[k];
                                y2 += y[k] * y[k];
                                for (int l = 0; l < dim; ++l) model += 0.5 * y[k] * probe.m[k][l] * y[l];
                            }
                            model += sgn * delta * (y2 + time_scale * time_scale * ts * ts);
                            const double diff = at(slice, dx, dy, dz) - u0 - model;
                            strict = sgn * diff < 0.0;
                        }
            }
            if (!strict) continue;
            ++result.touches;

            SymMatrix m = probe.m;
            for (int k = 0; k < dim; ++k) m[k][k] += sgn * 2.0 * delta;
            double pnorm = 0.0;
            for (int k = 0; k < dim; ++k) pnorm += probe.p[k] * probe.p[k];
            pnorm = std::sqrt(pnorm);
            probe.degenerate = pnorm <= floor;
            const double bound = probe.degenerate ? degenerate_branch_bound(m, dim, mode)
                                                  : level_set_operator(probe.p, m, dim, params.nu);
            const double margin = sgn * (probe.q - bound);
            result.worst_margin = std::max(result.worst_margin, margin);
            if (margin > tau) result.violations.push_back({node, s, probe, margin});
        }
    }
    return result;
}

}  // namespace mcf
