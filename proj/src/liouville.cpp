#include "mcf/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mcf {

namespace {

void require_stadium(const DomainSpec& domain) {
    domain.validate();
    if (domain.kind != DomainKind::Stadium)
        throw Error("the cylinder problem needs a stadium domain (domain.kind = stadium)");
}

double sampled_section_max(const CylinderProblem& p, double tau) {
    const double a = p.domain.half_width;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 64; ++i) {
        const Point x{p.domain.center[0] - a + 2.0 * a * i / 64.0, tau, 0.0};
        if (signed_distance(p.domain, x) >= 0.0) best = std::max(best, p.data(x));
    }
    return best;
}

// (1-u)^3 (1 + 2u + 3u^2): quintic with q(0)=1, q'(0)=-1, q''(0)=0 and a
// triple zero at u = 1.
double blend(double u) { return (1 - u) * (1 - u) * (1 - u) * (1 + 2 * u + 3 * u * u); }
double blend_d1(double u) { return -(1 - u) * (1 - u) * (1 + 2 * u + 15 * u * u); }
double blend_d2(double u) { return (1 - u) * (60 * u * u - 24 * u); }

}  // namespace

CylinderProblem ramp_problem(const DomainSpec& domain, double m, double lambda, double ramp_width,
                             double delta) {
    require_stadium(domain);
    if (!(ramp_width > 0.0)) throw Error("ramp width must be positive");
    CylinderProblem p;
    p.domain = domain;
    p.m = m;
    p.lambda = lambda;
    p.delta = delta;
    const double c = domain.center[1];
    auto ramp = [=](double tau) {
        return std::min(lambda, std::max(0.0, lambda * (tau - c - m + ramp_width) / ramp_width));
    };
    p.data = [=](const Point& x) { return ramp(x[1]); };
    p.section_max = ramp;
    p.lipschitz = std::abs(lambda) / ramp_width;
    return p;
}

CylinderProblem plateau_problem(const DomainSpec& domain, double m, double lambda, double delta) {
    require_stadium(domain);
    CylinderProblem p;
    p.domain = domain;
    p.m = m;
    p.lambda = lambda;
    p.delta = delta;
    p.data = [=](const Point&) { return lambda; };
    p.section_max = [=](double) { return lambda; };
    return p;
}

double EnvelopePair::lower(double tau) const {
    if (eps_tilde <= 0.0) return lambda;
    const double t1 = m + delta, width = delta / 4.0, t0 = t1 - width;
    const double s = lambda / eps_tilde;
    if (tau >= t1) return lambda;
    if (tau <= t0) return lambda + s * (tau - t1);
    return lambda - s * width * blend((tau - t0) / width);
}

double EnvelopePair::lower_slope(double tau) const {
    if (eps_tilde <= 0.0) return 0.0;
    const double t1 = m + delta, width = delta / 4.0, t0 = t1 - width;
    const double s = lambda / eps_tilde;
    if (tau >= t1) return 0.0;
    if (tau <= t0) return s;
    return -s * blend_d1((tau - t0) / width);
}

double EnvelopePair::lower_curvature(double tau) const {
    if (eps_tilde <= 0.0) return 0.0;
    const double t1 = m + delta, width = delta / 4.0, t0 = t1 - width;
    const double s = lambda / eps_tilde;
    if (tau >= t1 || tau <= t0) return 0.0;
    return -s * blend_d2((tau - t0) / width) / width;
}

EnvelopePair build_envelopes(const CylinderProblem& problem, int samples) {
    require_stadium(problem.domain);
    const DomainSpec& d = problem.domain;
    if (!(problem.delta > 0.0)) throw Error("envelope shift delta must be positive");
    if (problem.m + problem.delta >= d.straight_half_length) {
        std::ostringstream os;
        os << "m + delta = " << problem.m + problem.delta
           << " must stay inside the straight section (half-length " << d.straight_half_length << ")";
        throw Error(os.str());
    }
    auto section = [&](double tau) {
        return problem.section_max ? problem.section_max(tau) : sampled_section_max(problem, tau - d.center[1]);
    };

    // Data plateau on {x2 >= m}.
    const double top = d.straight_half_length + d.corner_radius;
    for (int i = 0; i <= 100; ++i) {
        const double tau = problem.m + (top - problem.m) * i / 100.0;
        for (int j = 0; j <= 8; ++j) {
            const Point x{d.center[0] - d.half_width + 2.0 * d.half_width * j / 8.0, d.center[1] + tau, 0.0};
            if (signed_distance(d, x) < 0.0) continue;
            if (problem.data(x) != problem.lambda) {
                std::ostringstream os;
                os << "data are not equal to lambda = " << problem.lambda << " at x2 = " << tau;
                throw Error(os.str());
            }
        }
    }

    EnvelopePair env;
    env.m = problem.m;
    env.delta = problem.delta;
    env.lambda = problem.lambda;

    const double lo = -top, hi = problem.m + problem.delta;
    std::vector<double> taus(static_cast<std::size_t>(samples));
    std::vector<double> bound(taus.size());
    bool flat = true;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        taus[i] = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
        bound[i] = section(taus[i]);
        flat = flat && bound[i] >= problem.lambda;
    }
    if (flat) return env;

    double worst_tau = lo;
    for (env.eps_tilde = hi - lo; env.eps_tilde > 1e-12; env.eps_tilde *= 0.5) {
        bool ok = true;
        for (std::size_t i = 0; i < taus.size() && ok; ++i)
            if (env.lower(taus[i]) > bound[i] + 1e-14) {
                ok = false;
                worst_tau = taus[i];
            }
        if (ok) return env;
    }
    std::ostringstream os;
    os << "no ramp width makes g_minus lie below the data; violation at x2 = " << worst_tau;
    throw Error(os.str());
}

LiouvilleReport flatness_and_sandwich(const CylinderProblem& problem, const FlowParams& params,
                                      double horizon) {
    if (params.nu < 0.0) throw Error("the flatness experiment needs nu >= 0");
    params.validate();
    LiouvilleReport report;
    report.envelopes = build_envelopes(problem);
    const EnvelopePair& env = report.envelopes;

    auto grid = std::make_shared<const Grid>(build_grid(problem.domain, params.spacing));
    const auto active = grid->active_nodes();
    const double c2 = problem.domain.center[1];
    std::vector<double> axial(active.size());
    std::vector<std::uint8_t> plateau(active.size());
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for (std::size_t pos = 0; pos < active.size(); ++pos) {
        axial[pos] = grid->position(active[pos])[1] - c2;
        plateau[pos] = axial[pos] >= problem.m + problem.delta - 1e-12;
        auto ijk = grid->multi_index(active[pos]);
        ++ijk[1];
        const std::int32_t up = grid->index(ijk);
        if (up >= 0 && grid->active(up)) pairs.emplace_back(active[pos], up);
    }

    SolveOptions opts;
    opts.observer = [&](const Grid&, const FieldState& state, std::span<const double>, std::int64_t) {
        LiouvilleRow row;
        row.t = state.t;
        const double drift = params.epsilon * params.nu * state.t;
        for (std::size_t pos = 0; pos < active.size(); ++pos) {
            const double u = state.values[active[pos]];
            if (plateau[pos]) row.flatness = std::max(row.flatness, std::abs(u - problem.lambda));
            row.lower_violation = std::max(row.lower_violation, env.lower(axial[pos]) - u);
            row.upper_violation =
                std::max(row.upper_violation, u - env.upper(axial[pos] + params.nu * state.t) - drift);
        }
        for (const auto& [a, b] : pairs)
            row.monotonicity_violation =
                std::max(row.monotonicity_violation, state.values[a] - state.values[b]);
        report.rows.push_back(row);
    };
    IBVP ibvp{problem.domain, problem.data, problem.data};
    report.flow = solve_ibvp(ibvp, grid, params, horizon, opts);

    for (const auto& row : report.rows) {
        report.sup_flatness = std::max(report.sup_flatness, row.flatness);
        report.max_lower_violation = std::max(report.max_lower_violation, row.lower_violation);
        report.max_upper_violation = std::max(report.max_upper_violation, row.upper_violation);
        report.max_monotonicity_violation =
            std::max(report.max_monotonicity_violation, row.monotonicity_violation);
    }
    report.flatness_bound = params.epsilon * std::abs(params.nu) * horizon +
                            10.0 * grid->spacing() * problem.lipschitz;
    return report;
}

std::vector<FieldState> envelope_fields(const Grid& grid, const EnvelopePair& env, double nu,
                                        bool upper, double t0, double dt, int slices) {
    const double c2 = grid.domain().center[1];
    std::vector<FieldState> out;
    for (int k = 0; k < slices; ++k) {
        const double t = t0 + k * dt;
        auto f = [&](const Point& x) {
            const double tau = x[1] - c2;
            return upper ? env.upper(tau + nu * t) : env.lower(tau);
        };
        FieldState s;
        s.t = t;
        s.values.assign(static_cast<std::size_t>(grid.extended_size()),
                        std::numeric_limits<double>::quiet_NaN());
        for (std::int32_t node : grid.active_nodes()) s.values[node] = f(grid.position(node));
        const auto n = static_cast<std::size_t>(grid.node_count());
        const auto cuts = grid.cuts();
        for (std::size_t c = 0; c < cuts.size(); ++c) s.values[n + c] = f(cuts[c].point);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace mcf
