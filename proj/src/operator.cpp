#include "mcf/operator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mcf {

void FlowParams::validate() const {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw Error("params.epsilon must lie in (0, 1)");
    if (!std::isfinite(nu)) throw Error("params.nu must be finite");
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw Error("params.sigma must lie in [0, 1]");
    if (!(cfl_factor > 0.0 && cfl_factor <= 0.5)) throw Error("params.cfl_factor must lie in (0, 0.5]");
    if (!(spacing > 0.0)) throw Error("params.spacing must be positive");
    if (dt_override && !(*dt_override > 0.0)) throw Error("params.dt must be positive");
}

FieldState make_state(const Grid& grid, const ScalarFunction& initial,
                      const ScalarFunction& boundary, double t) {
    FieldState s;
    s.t = t;
    s.values.assign(static_cast<std::size_t>(grid.extended_size()),
                    std::numeric_limits<double>::quiet_NaN());
    for (std::int32_t node : grid.active_nodes()) s.values[node] = initial(grid.position(node));
    impose_boundary(s, grid, boundary);
    return s;
}

void impose_boundary(FieldState& state, const Grid& grid, const ScalarFunction& boundary) {
    const auto n = static_cast<std::size_t>(grid.node_count());
    const auto cuts = grid.cuts();
    for (std::size_t c = 0; c < cuts.size(); ++c) state.values[n + c] = boundary(cuts[c].point);
    refresh_pinned(state.values, grid);
}

void refresh_pinned(std::span<double> values, const Grid& grid) {
    const auto n = static_cast<std::size_t>(grid.node_count());
    for (const auto& p : grid.pinned_nodes()) {
        const double trace = values[n + static_cast<std::size_t>(p.cut)];
        values[p.node] = trace + p.weight * (values[p.source] - trace);
    }
}

double boundary_trace_error(const FieldState& state, const Grid& grid, const ScalarFunction& boundary) {
    const auto n = static_cast<std::size_t>(grid.node_count());
    const auto cuts = grid.cuts();
    double err = 0.0;
    for (std::size_t c = 0; c < cuts.size(); ++c)
        err = std::max(err, std::abs(state.values[n + c] - boundary(cuts[c].point)));
    for (const auto& p : grid.pinned_nodes()) {
        if (p.source == p.node) continue;
        // Extrapolate source -> pinned node on to the cut point.
        const double theta = cuts[p.cut].theta;
        const double us = state.values[p.source];
        const double up = state.values[p.node];
        const double at_cut = us + (up - us) * (1.0 + theta);
        err = std::max(err, std::abs(at_cut - boundary(cuts[p.cut].point)));
    }
    return err;
}

Derivatives derivatives_at(const Grid& grid, std::span<const double> values, std::size_t pos) {
    Derivatives d;
    const std::int32_t node = grid.active_nodes()[pos];
    const double u0 = values[node];
    const auto& st = grid.axis_stencil(pos);
    const int dim = grid.dim();
    for (int k = 0; k < dim; ++k) {
        const double hm = st.h_minus[k], hp = st.h_plus[k];
        const double um = values[st.minus[k]], up = values[st.plus[k]];
        d.grad[k] = (hm * hm * (up - u0) + hp * hp * (u0 - um)) / (hp * hm * (hp + hm));
        d.hess[k][k] = 2.0 / (hp + hm) * ((up - u0) / hp - (u0 - um) / hm);
    }
    for (int pair = 0; pair < 3; ++pair) {
        static constexpr int kK[3] = {0, 0, 1};
        static constexpr int kL[3] = {1, 2, 2};
        if (kL[pair] >= dim) continue;
        double m = 0.0;
        for (const auto& term : grid.mixed_terms(pos, pair)) m += term.weight * values[term.index];
        d.hess[kK[pair]][kL[pair]] = m;
        d.hess[kL[pair]][kK[pair]] = m;
    }
    return d;
}

double regularized_rate(const Derivatives& d, int dim, const FlowParams& params) {
    const double s2 = params.sigma * params.sigma;
    double grad2 = 0.0;
    for (int k = 0; k < dim; ++k) grad2 += d.grad[k] * d.grad[k];
    const double s = params.epsilon * params.epsilon + s2 * grad2;
    double trace = 0.0, directional = 0.0;
    for (int k = 0; k < dim; ++k) {
        trace += d.hess[k][k];
        for (int l = 0; l < dim; ++l) directional += d.grad[k] * d.grad[l] * d.hess[k][l];
    }
    return trace - s2 * directional / s + params.sigma * params.nu * std::sqrt(s);
}

std::vector<Point> gradient(const FieldState& state, const Grid& grid, const ScalarFunction& boundary) {
    FieldState copy = state;
    impose_boundary(copy, grid, boundary);
    std::vector<Point> out(grid.active_nodes().size());
    for (std::size_t pos = 0; pos < out.size(); ++pos) {
        const auto d = derivatives_at(grid, copy.values, pos);
        out[pos] = d.grad;
    }
    return out;
}

std::vector<double> regularized_rhs(const FieldState& state, const Grid& grid,
                                    const FlowParams& params, const ScalarFunction& boundary) {
    FieldState copy = state;
    impose_boundary(copy, grid, boundary);
    const auto count = grid.active_nodes().size();
    std::vector<double> rate(count), grad_norm(count);
    evaluate_rates(grid, copy.values, params, rate, grad_norm, Execution::Serial);
    return rate;
}

TimeStep stable_dt(const FlowParams& params, const Grid& grid) {
    const double h2 = grid.spacing() * grid.spacing();
    const double limit = 0.5 * h2 / grid.dim();
    if (params.dt_override) return {*params.dt_override, *params.dt_override > limit};
    return {params.cfl_factor * h2 / grid.dim(), false};
}

NonFiniteError::NonFiniteError(std::int32_t node, std::int64_t step)
    : Error([&] {
          std::ostringstream os;
          os << "non-finite value at node " << node << " in step " << step;
          return os.str();
      }()),
      node(node),
      step(step) {}

Stepper::Stepper(const Grid& grid, const FlowParams& params, Execution exec)
    : grid_(&grid), params_(params), exec_(exec) {
    const auto ts = stable_dt(params, grid);
    dt_ = ts.dt;
    dt_warning_ = ts.warning;
    rate_.resize(grid.active_nodes().size());
    grad_norm_.resize(grid.active_nodes().size());
}

void Stepper::evaluate(const FieldState& state) {
    evaluate_rates(*grid_, state.values, params_, rate_, grad_norm_, exec_);
}

void Stepper::advance(FieldState& state) {
    const auto active = grid_->active_nodes();
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
        const std::int32_t node = active[pos];
        if (grid_->pinned(node)) continue;
        double& u = state.values[node];
        u += dt_ * rate_[pos];
        if (!std::isfinite(u)) throw NonFiniteError(node, steps_ + 1);
    }
    refresh_pinned(state.values, *grid_);
    state.t += dt_;
    ++steps_;
}

FieldState step(const FieldState& state, const Grid& grid, const FlowParams& params,
                const ScalarFunction& boundary) {
    FieldState next = state;
    impose_boundary(next, grid, boundary);
    Stepper stepper(grid, params, Execution::Serial);
    stepper.evaluate(next);
    stepper.advance(next);
    return next;
}

}  // namespace mcf
