#include <benchmark/benchmark.h>

#include <cmath>

#include "mcf/operator.hpp"

namespace {

struct Setup {
    mcf::Grid grid;
    mcf::FieldState state;
    mcf::FlowParams params;

    Setup(int dim, double h)
        : grid(mcf::build_grid(mcf::DomainSpec::ball(1.0, dim), h)),
          state(mcf::make_state(
              grid, [](const mcf::Point& x) { return x[0] + 0.5 * std::sin(3.0 * x[1]) * (1.0 - x[0] * x[0] - x[1] * x[1]); },
              [](const mcf::Point& x) { return x[0]; })) {
        params.spacing = h;
    }
};

void rates(benchmark::State& st, mcf::Execution exec) {
    const int dim = static_cast<int>(st.range(0));
    const double h = 1.0 / static_cast<double>(st.range(1));
    Setup s(dim, h);
    const auto n = s.grid.active_nodes().size();
    std::vector<double> rate(n), grad(n);
    for (auto _ : st) {
        mcf::evaluate_rates(s.grid, s.state.values, s.params, rate, grad, exec);
        benchmark::DoNotOptimize(rate.data());
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations()) * static_cast<std::int64_t>(n));
}

void BM_RatesSerial(benchmark::State& st) { rates(st, mcf::Execution::Serial); }
void BM_RatesParallel(benchmark::State& st) { rates(st, mcf::Execution::Parallel); }

}  // namespace

BENCHMARK(BM_RatesSerial)->Args({2, 64})->Args({2, 256})->Args({3, 32});
BENCHMARK(BM_RatesParallel)->Args({2, 64})->Args({2, 256})->Args({3, 32});

BENCHMARK_MAIN();
