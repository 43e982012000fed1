#pragma once

// Inner loops of the boosting trainer. The default versions use OpenMP when
// available; `reference` holds plain serial loops kept as the test oracle.
//
// Reductions go through fixed-size row chunks combined in chunk order, so the
// result is bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace gamtalk::kernels {

inline constexpr std::size_t kChunk = 4096;

/// Logistic loss derivatives: g = w (p - y), h = w p (1 - p), p = sigma(margin).
void gradients(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w,
               std::span<double> g, std::span<double> h);

/// Per-bin sums of g, h and w. Output spans have one slot per code.
void histogram(std::span<const std::uint32_t> codes, std::span<const double> g, std::span<const double> h,
               std::span<const double> w, std::span<double> sum_g, std::span<double> sum_h, std::span<double> sum_w);

/// margin[i] += update[codes[i]].
void add_update(std::span<const std::uint32_t> codes, std::span<const double> update, std::span<double> margin);

/// Weighted mean negative log-likelihood. Returns 0 when the weights sum to 0.
double log_loss(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w);

/// Number of threads the parallel kernels may use (1 without OpenMP).
int max_threads();

namespace reference {

void gradients(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w,
               std::span<double> g, std::span<double> h);
void histogram(std::span<const std::uint32_t> codes, std::span<const double> g, std::span<const double> h,
               std::span<const double> w, std::span<double> sum_g, std::span<double> sum_h, std::span<double> sum_w);
void add_update(std::span<const std::uint32_t> codes, std::span<const double> update, std::span<double> margin);
double log_loss(std::span<const double> margin, std::span<const std::uint8_t> y, std::span<const double> w);

} // namespace reference

/// Per-row loss for one example, shared by both versions.
double row_loss(double margin, std::uint8_t y);

} // namespace gamtalk::kernels
