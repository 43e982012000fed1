// Trainer inner loops: OpenMP kernels against the serial reference.

#include <vector>

#include <benchmark/benchmark.h>

#include "gamtalk/kernels.hpp"
#include "gamtalk/random.hpp"

namespace {

using namespace gamtalk;

constexpr std::size_t kBins = 257;

struct Data {
    std::vector<double> margin, w, g, h, sg, sh, sw, update;
    std::vector<std::uint8_t> y;
    std::vector<std::uint32_t> codes;

    explicit Data(std::size_t n)
        : margin(n), w(n), g(n), h(n), sg(kBins), sh(kBins), sw(kBins), update(kBins), y(n), codes(n)
    {
        SplitMix64 rng(n);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] = rng.uniform() * 4.0 - 2.0;
            w[i] = static_cast<double>(rng.below(3));
            y[i] = static_cast<std::uint8_t>(rng.below(2));
            codes[i] = static_cast<std::uint32_t>(rng.below(kBins));
        }
        for (auto& u : update)
            u = rng.uniform() * 0.01;
    }
};

template <bool Parallel>
void BM_Gradients(benchmark::State& state)
{
    Data d(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::gradients(d.margin, d.y, d.w, d.g, d.h);
        else
            kernels::reference::gradients(d.margin, d.y, d.w, d.g, d.h);
        benchmark::DoNotOptimize(d.g.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Histogram(benchmark::State& state)
{
    Data d(static_cast<std::size_t>(state.range(0)));
    kernels::reference::gradients(d.margin, d.y, d.w, d.g, d.h);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::histogram(d.codes, d.g, d.h, d.w, d.sg, d.sh, d.sw);
        else
            kernels::reference::histogram(d.codes, d.g, d.h, d.w, d.sg, d.sh, d.sw);
        benchmark::DoNotOptimize(d.sg.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_AddUpdate(benchmark::State& state)
{
    Data d(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::add_update(d.codes, d.update, d.margin);
        else
            kernels::reference::add_update(d.codes, d.update, d.margin);
        benchmark::DoNotOptimize(d.margin.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LogLoss(benchmark::State& state)
{
    Data d(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        double l = Parallel ? kernels::log_loss(d.margin, d.y, d.w) : kernels::reference::log_loss(d.margin, d.y, d.w);
        benchmark::DoNotOptimize(l);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_Gradients<true>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_Gradients<false>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_Histogram<true>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_Histogram<false>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_AddUpdate<true>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_AddUpdate<false>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_LogLoss<true>)->Arg(5000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_LogLoss<false>)->Arg(5000)->Arg(100000)->Arg(1000000);

BENCHMARK_MAIN();
