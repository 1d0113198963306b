#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mcf/flow.hpp"

namespace mcf::testing {

inline double bump_profile(const Point& x) {
    const double q = 1.0 - x[0] * x[0] - x[1] * x[1] - x[2] * x[2];
    return 0.5 * q * q * q;
}

/// The standard test problems on the unit disc.
struct NamedProblem {
    std::string name;
    IBVP problem;
    double nu;
};

inline IBVP zero_problem() {
    const auto zero = [](const Point&) { return 0.0; };
    return IBVP{DomainSpec::ball(1.0, 2), zero, zero};
}

inline IBVP linear_problem() {
    const auto x1 = [](const Point& x) { return x[0]; };
    return IBVP{DomainSpec::ball(1.0, 2), x1, x1};
}

inline IBVP bump_problem() {
    return IBVP{DomainSpec::ball(1.0, 2), [](const Point& x) { return x[0]; },
                [](const Point& x) { return x[0] + bump_profile(x); }};
}

inline std::vector<NamedProblem> standard_problems() {
    std::vector<NamedProblem> out;
    for (double nu : {0.0, 0.3}) {
        out.push_back({"zero", zero_problem(), nu});
        out.push_back({"linear", linear_problem(), nu});
        out.push_back({"bump", bump_problem(), nu});
    }
    return out;
}

inline FlowParams params_with(double spacing, double epsilon = 0.05, double nu = 0.0) {
    FlowParams p;
    p.spacing = spacing;
    p.epsilon = epsilon;
    p.nu = nu;
    return p;
}

}  // namespace mcf::testing
