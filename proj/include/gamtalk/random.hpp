#pragma once

#include <cstdint>

namespace gamtalk {

/// splitmix64. Small, fast, and trivially reproducible in other languages,
/// which lets test generators and reference scripts share data bit-for-bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// [0, n). Plain modulo; the bias is irrelevant at the sizes used here.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

/// Independent stream for sub-task `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    SplitMix64 a(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
    return a.next();
}

} // namespace gamtalk
