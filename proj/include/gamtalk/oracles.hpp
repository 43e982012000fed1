#pragma once

// Exact, deterministic answers to common questions about a single term graph.
// They are the ground truth that language-model claims are checked against.
// All probability figures produced here are term-level: sigma applied to one
// term's contribution, not the full-model risk.

#include <optional>
#include <string>
#include <vector>

#include "gamtalk/gam.hpp"

namespace gamtalk {

/// Same contract as term_contribution.
double value_at(const TermGraph& graph, const FeatureValue& x, LookupOptions options = {});
double value_at(const TermGraph& graph, double x, LookupOptions options = {});

enum class Direction { increasing, decreasing, constant, none };
std::string_view to_string(Direction d);

struct MonotoneResult {
    Direction direction = Direction::constant;
    /// For direction none: adjacent (i, i+1) pairs that go against the
    /// majority direction.
    std::vector<std::pair<std::size_t, std::size_t>> violations;
};

MonotoneResult is_monotone(const TermGraph& graph);

struct ArgmaxResult {
    /// Bin index, or nullopt when the missing bin is the strict maximum.
    std::optional<std::size_t> bin;
    bool is_missing = false;
    double lower = 0.0;
    double upper = 0.0;
    std::optional<std::string> label;
    double score = 0.0;
};

ArgmaxResult argmax_region(const TermGraph& graph);

struct MeanDelta {
    double delta_log_odds = 0.0;
    /// sigma(value_at(x1)) - sigma(value_at(x0)); term-level.
    double delta_probability_at_baseline = 0.0;
};

MeanDelta mean_delta(const TermGraph& graph, double x0, double x1);

/// Density-weighted mean of score(x + step) - score(x) over x at every bin's
/// lower edge with x + step still inside [domain_min, domain_max). Scores are
/// read from the step that starts at the sample point, i.e. with bins taken
/// as [lower, upper). Weights are the densities of the bins owning each x
/// (unit weights when the graph has no density).
double average_slope(const TermGraph& graph, double step);

struct Jump {
    /// Shared edge of the two bins; nullopt for categorical graphs.
    std::optional<double> at_edge;
    double delta = 0.0;
    std::size_t left_bin = 0;
    std::size_t right_bin = 0;
};

/// One jump per adjacent pair with |score difference| >= threshold, sorted by
/// |delta| descending, then by position.
std::vector<Jump> detect_jumps(const TermGraph& graph, double threshold);

nlohmann::ordered_json to_json(const MonotoneResult& r);
nlohmann::ordered_json to_json(const ArgmaxResult& r, int sig_digits = 4);
nlohmann::ordered_json to_json(const MeanDelta& r);
nlohmann::ordered_json to_json(const Jump& j);
nlohmann::ordered_json to_json(const std::vector<Jump>& jumps);

/// Monotonicity, argmax and jumps in one object, as attached to term responses.
nlohmann::ordered_json oracle_digest(const TermGraph& graph, double jump_threshold);

} // namespace gamtalk
