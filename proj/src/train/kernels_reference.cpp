#include <cmath>

#include "gamtalk/kernels.hpp"

namespace gamtalk::kernels::reference {

void gradients(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w,
               std::span<double> g, std::span<double> h)
{
    for (std::size_t i = 0; i < margin.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-margin[i]));
        g[i] = w[i] * (p - y[i]);
        h[i] = w[i] * p * (1.0 - p);
    }
}

void histogram(std::span<const std::uint32_t> codes, std::span<const double> g, std::span<const double> h,
               std::span<const double> w, std::span<double> sum_g, std::span<double> sum_h, std::span<double> sum_w)
{
    for (std::size_t b = 0; b < sum_g.size(); ++b)
        sum_g[b] = sum_h[b] = sum_w[b] = 0.0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        sum_g[codes[i]] += g[i];
        sum_h[codes[i]] += h[i];
        sum_w[codes[i]] += w[i];
    }
}

void add_update(std::span<const std::uint32_t> codes, std::span<const double> update, std::span<double> margin)
{
    for (std::size_t i = 0; i < codes.size(); ++i)
        margin[i] += update[codes[i]];
}

double log_loss(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w)
{
    double l = 0.0, s = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        if (w[i] == 0.0)
            continue;
        const double p = 1.0 / (1.0 + std::exp(-margin[i]));
        l -= w[i] * (y[i] ? std::log(p) : std::log1p(-p));
        s += w[i];
    }
    return s > 0.0 ? l / s : 0.0;
}

} // namespace gamtalk::kernels::reference
