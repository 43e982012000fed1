#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace gamtalk {

/// Deterministic stand-in for a BPE tokenizer. Text is cut into maximal runs
/// of letters, digits and whitespace, plus single punctuation marks:
///   letters     ceil(len / 4)   (ASCII letters and any byte >= 0x80)
///   digits      ceil(len / 3)
///   punctuation 1 each
///   whitespace  0
struct TokenEstimate {
    std::size_t tokens = 0;
    std::string method_version;
};

inline constexpr std::string_view kTokenEstimatorVersion = "runs-v1";

TokenEstimate estimate_tokens(std::string_view text);

/// Pluggable counter used wherever a budget is enforced. A real tokenizer can
/// be dropped in here; budgets are then in its units.
using TokenCounter = std::function<std::size_t(std::string_view)>;

TokenCounter default_token_counter();

} // namespace gamtalk
