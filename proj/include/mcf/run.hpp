#pragma once

#include <cstdint>
#include <filesystem>

#include "mcf/config.hpp"
#include "mcf/io.hpp"

namespace mcf {

/// Ordered pair of problems on a ball: high = low + s + c (1 - |x - x0|^2 / R^2)^k
/// initially and low + s on the boundary. Odd indices use s = 0.
struct OrderedPair {
    IBVP low;
    IBVP high;
    double shift = 0.0;
    double bump = 0.0;
    int power = 2;
};

OrderedPair random_ordered_pair(const DomainSpec& ball, std::uint64_t seed, int index);

/// Runs the experiment, writes its outputs under `out_dir` and returns the
/// summary. `concurrency` bounds the threads used for independent sub-runs.
RunSummary run(const RunConfig& config, const std::filesystem::path& out_dir, int concurrency = 1);

}  // namespace mcf
