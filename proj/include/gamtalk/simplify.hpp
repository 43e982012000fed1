#pragma once

// Coarsening of term graphs by merging adjacent bins. A merged bin takes the
// density-weighted mean score of its parts and the summed density. Merged
// confidence bounds are density-weighted means of the input bounds: a display
// convenience, not a pooled interval.
//
// Weights are the bin densities. A graph whose total density is zero (e.g. one
// parsed from text without densities) is treated as if every bin had weight 1.

#include <cstddef>
#include <utility>
#include <vector>

#include "gamtalk/graph_text.hpp"
#include "gamtalk/tokens.hpp"

namespace gamtalk {

/// Merge of the bins at positions (left, left + 1) of the graph as it stood
/// when the merge was applied.
struct MergeStep {
    std::size_t left = 0;
    std::size_t right = 0;
    /// Increase of the weighted squared error caused by this merge.
    double cost = 0.0;
};

struct SimplifyReport {
    std::size_t original_bins = 0;
    std::size_t final_bins = 0;
    std::size_t original_tokens = 0;
    std::size_t final_tokens = 0;
    double distortion_l2 = 0.0;
    std::vector<MergeStep> merges;
};

nlohmann::ordered_json to_json(const SimplifyReport& report);

struct SimplifyOptions {
    EncodeOptions encode;
    /// Empty: default_token_counter().
    TokenCounter counter;
};

/// Merge any adjacent pair whose scores differ by less than tol, repeatedly,
/// scanning left to right, until no pair qualifies.
TermGraph artifact_prepass(const TermGraph& graph, double tol);

/// Greedy bottom-up merge order: each step merges the adjacent pair with the
/// smallest weighted squared-error increase, ties to the lower position.
/// Runs until one bin remains.
std::vector<MergeStep> greedy_merge_sequence(const TermGraph& graph);

/// Apply merges in order.
TermGraph apply_merges(const TermGraph& graph, const std::vector<MergeStep>& merges);

/// Greedy coarsening to exactly `bins` bins (or the input when it has fewer).
TermGraph coarsen_greedy(const TermGraph& graph, std::size_t bins);

/// Follow the greedy merge order until the encoding fits `budget` tokens.
/// Throws BudgetTooSmall when even a single-bin encoding does not fit.
std::pair<TermGraph, SimplifyReport> simplify_to_budget(const TermGraph& graph, std::size_t budget,
                                                        const SimplifyOptions& options = {});

/// Density-weighted RMS difference between two step functions, weights from
/// the original graph. Throws NotACoarsening when `simplified` does not
/// partition the original domain along original edges.
double distortion(const TermGraph& original, const TermGraph& simplified);

} // namespace gamtalk
