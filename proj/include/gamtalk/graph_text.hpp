#pragma once

// Compact JSON rendering of a term graph, the form handed to language models:
//
//   {"feature": "age", "kind": "continuous",
//    "scores": {"(18, 25.5)": -0.85, ..., "(88.5, 106)": 0.52},
//    "confidence_intervals": {"(18, 25.5)": [-0.9, -0.8], ...},
//    "missing": 0.12}
//
// Emitted on a single line with ", " and ": " separators. Keys follow bin order.

#include <optional>
#include <string>
#include <string_view>

#include "gamtalk/gam.hpp"

namespace gamtalk {

struct EncodeOptions {
    int sig_digits = 4;
    /// nullopt: include confidence intervals when every bin has them.
    std::optional<bool> include_ci;
    bool include_density = false;
};

/// Round to `digits` significant digits and print without trailing zeros.
/// Plain decimal notation for magnitudes in [1e-6, 1e15), exponent form outside.
std::string format_sig(double value, int digits);

/// "(lo, hi)" with each edge rendered by format_sig.
std::string format_interval(double lower, double upper, int digits);

/// Bin keys as they appear in the encoding (interval text or category label),
/// including the local digit increase that keeps adjacent edges distinct.
std::vector<std::string> bin_keys(const TermGraph& graph, int sig_digits = 4);

std::string encode_graph(const TermGraph& graph, const EncodeOptions& options = {});

/// Inverse of encode_graph. Densities absent from the text come back as 0.
/// Throws ParseError (with "byte" in details when the JSON itself is
/// malformed) or NonContiguousBins.
TermGraph parse_graph(std::string_view text);

} // namespace gamtalk
