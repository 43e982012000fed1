#include "gamtalk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gamtalk::kernels {

namespace {

// Below this many rows the parallel region costs more than it saves.
constexpr std::size_t kParallelMin = 2 * kChunk;

std::size_t chunk_count(std::size_t n)
{
    return (n + kChunk - 1) / kChunk;
}

double sigmoid(double m)
{
    if (m >= 0.0)
        return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

} // namespace

double row_loss(double margin, std::uint8_t y)
{
    // softplus(-m) for y = 1, softplus(m) for y = 0
    const double x = y ? -margin : margin;
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void gradients(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w,
               std::span<double> g, std::span<double> h)
{
    const auto n = static_cast<std::ptrdiff_t>(margin.size());
#pragma omp parallel for schedule(static) if (margin.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double p = sigmoid(margin[i]);
        g[i] = w[i] * (p - static_cast<double>(y[i]));
        h[i] = w[i] * p * (1.0 - p);
    }
}

void histogram(std::span<const std::uint32_t> codes, std::span<const double> g, std::span<const double> h,
               std::span<const double> w, std::span<double> sum_g, std::span<double> sum_h, std::span<double> sum_w)
{
    const std::size_t n = codes.size();
    const std::size_t bins = sum_g.size();
    const std::size_t chunks = chunk_count(n);
    std::vector<double> local(chunks * bins * 3, 0.0);

#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        double* lg = local.data() + static_cast<std::size_t>(c) * bins * 3;
        double* lh = lg + bins;
        double* lw = lh + bins;
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint32_t b = codes[i];
            lg[b] += g[i];
            lh[b] += h[i];
            lw[b] += w[i];
        }
    }

    std::fill(sum_g.begin(), sum_g.end(), 0.0);
    std::fill(sum_h.begin(), sum_h.end(), 0.0);
    std::fill(sum_w.begin(), sum_w.end(), 0.0);
    for (std::size_t c = 0; c < chunks; ++c) {
        const double* lg = local.data() + c * bins * 3;
        const double* lh = lg + bins;
        const double* lw = lh + bins;
        for (std::size_t b = 0; b < bins; ++b) {
            sum_g[b] += lg[b];
            sum_h[b] += lh[b];
            sum_w[b] += lw[b];
        }
    }
}

void add_update(std::span<const std::uint32_t> codes, std::span<const double> update, std::span<double> margin)
{
    const auto n = static_cast<std::ptrdiff_t>(codes.size());
#pragma omp parallel for schedule(static) if (codes.size() >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        margin[i] += update[codes[i]];
}

double log_loss(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w)
{
    const std::size_t n = margin.size();
    const std::size_t chunks = chunk_count(n);
    std::vector<double> loss(chunks, 0.0), weight(chunks, 0.0);

#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
        const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
        const std::size_t end = std::min(n, begin + kChunk);
        double l = 0.0, s = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            if (w[i] == 0.0)
                continue;
            l += w[i] * row_loss(margin[i], y[i]);
            s += w[i];
        }
        loss[static_cast<std::size_t>(c)] = l;
        weight[static_cast<std::size_t>(c)] = s;
    }

    double l = 0.0, s = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        l += loss[c];
        s += weight[c];
    }
    return s > 0.0 ? l / s : 0.0;
}

} // namespace gamtalk::kernels
