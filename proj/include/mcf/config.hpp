#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcf/expression.hpp"
#include "mcf/flow.hpp"

namespace mcf {

enum class ExperimentKind { Flow, Steady, Continuation, Barrier, Comparison, Viscosity, Liouville };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct RunConfig {
    ExperimentKind kind = ExperimentKind::Flow;
    DomainSpec domain;
    Expression h = Expression::parse("0");
    Expression g = Expression::parse("0");
    FlowParams params;
    double horizon = 1.0;
    std::vector<double> snapshot_times;
    double tol = 1e-6;
    std::int64_t max_steps = kDefaultStepBudget;
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    int comparison_pairs = 20;
    std::uint64_t seed = 1;
    double liouville_m = 0.5;
    double liouville_lambda = 1.0;
    double liouville_ramp_width = 0.5;
    double liouville_delta = 0.0;  ///< <= 0 selects 4 h
    int viscosity_radius = 2;

    IBVP problem() const;
};

/// Parses flat `key = value` text; '#' starts a comment. Errors name the line
/// and key. The result is not validated.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Checks domain and parameter invariants, evaluates h and g at 10 random
/// domain points and rejects data with h != g on the boundary.
void validate_config(const RunConfig& config);

/// parse_config + validate_config on a file.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mcf
