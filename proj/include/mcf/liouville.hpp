#pragma once

#include <vector>

#include "mcf/flow.hpp"
#include "mcf/verify.hpp"

namespace mcf {

/// Flow on a stadium whose straight section plays the role of a cylinder
/// D' x (-L, L) with axis x2. The data are monotone in x2 and equal to
/// `lambda` on {x2 >= m}.
struct CylinderProblem {
    DomainSpec domain;
    double m = 0.5;
    double lambda = 1.0;
    double delta = 0.125;
    ScalarFunction data;          ///< g, also used as the boundary data
    double lipschitz = 0.0;       ///< Lipschitz constant of g
    /// max over x' of g(x', tau); defaults to sampling `data` across the section.
    std::function<double(double)> section_max;
};

/// Ramp data g = min(lambda, max(0, lambda (x2 - m + w) / w)).
CylinderProblem ramp_problem(const DomainSpec& domain, double m, double lambda, double ramp_width,
                             double delta);

/// Constant data g = lambda.
CylinderProblem plateau_problem(const DomainSpec& domain, double m, double lambda, double delta);

/// Axial envelopes g_minus <= max_{x'} g <= g_plus, both equal to lambda from m + delta on.
struct EnvelopePair {
    double m = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    /// Width of the steep ramp of g_minus; 0 when g_minus is the constant lambda.
    double eps_tilde = 0.0;

    double upper(double) const { return lambda; }
    double lower(double tau) const;
    double lower_slope(double tau) const;
    double lower_curvature(double tau) const;
};

/// Halves the ramp width of g_minus until it is dominated at `samples` points.
EnvelopePair build_envelopes(const CylinderProblem& problem, int samples = 1000);

struct LiouvilleRow {
    double t = 0.0;
    double flatness = 0.0;             ///< F(t) = sup_{x2 >= m + delta} |u - lambda|
    double lower_violation = 0.0;      ///< max (g_minus(x2) - u)_+
    double upper_violation = 0.0;      ///< max (u - g_plus(x2 + nu t) - eps nu t)_+
    double monotonicity_violation = 0.0;  ///< largest decrease of u along x2
};

struct LiouvilleReport {
    FlowReport flow;
    EnvelopePair envelopes;
    std::vector<LiouvilleRow> rows;
    double sup_flatness = 0.0;
    double max_lower_violation = 0.0;
    double max_upper_violation = 0.0;
    double max_monotonicity_violation = 0.0;
    double flatness_bound = 0.0;  ///< eps |nu| T + 10 h Lip(g)
};

/// Requires nu >= 0.
LiouvilleReport flatness_and_sandwich(const CylinderProblem& problem, const FlowParams& params,
                                      double horizon);

/// Three evenly spaced slices of u_plus = g_plus(x2 + nu t) (upper) or
/// u_minus = g_minus(x2) (lower) starting at t0 with spacing dt.
std::vector<FieldState> envelope_fields(const Grid& grid, const EnvelopePair& env, double nu,
                                        bool upper, double t0, double dt, int slices = 3);

}  // namespace mcf
