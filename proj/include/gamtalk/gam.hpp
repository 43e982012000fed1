#pragma once

// Piecewise-constant generalized additive models: term graphs, prediction,
// centering and importance. All scores are log-odds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gamtalk/error.hpp"

namespace gamtalk {

using Extras = nlohmann::ordered_json;

enum class FeatureKind { continuous, categorical, boolean };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view s);

/// Label that unseen categories fall back to, when a graph has such a bin.
inline constexpr std::string_view kOtherLabel = "other";

/// One step of a term graph. Continuous bins cover (lower, upper]; the first
/// bin of a graph is also closed at its lower edge. Categorical and boolean
/// bins carry a label instead of an interval.
struct Bin {
    double lower = 0.0;
    double upper = 0.0;
    std::optional<std::string> label;
    double score = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::uint64_t density = 0;
    Extras extra;

    bool has_ci() const { return ci_low.has_value() && ci_high.has_value(); }
};

struct MissingBin {
    double score = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::uint64_t density = 0;
    Extras extra;
};

struct TermGraph {
    std::string feature;
    FeatureKind kind = FeatureKind::continuous;
    std::vector<Bin> bins;
    std::optional<MissingBin> missing;
    Extras extra;

    bool is_interval() const { return kind == FeatureKind::continuous; }
    double domain_min() const { return bins.front().lower; }
    double domain_max() const { return bins.back().upper; }
    bool has_ci() const;
    std::uint64_t total_density() const;
};

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
};

struct Outcome {
    std::string name;
    std::string positive_label;
    Extras extra;
};

struct GamModel {
    double intercept = 0.0;
    std::vector<TermGraph> terms;
    Outcome outcome;
    std::vector<FeatureSpec> feature_schema;
    std::string provenance;
    Extras extra;

    const TermGraph* find_term(std::string_view feature) const;
};

struct Missing {
    bool operator==(const Missing&) const = default;
};

using FeatureValue = std::variant<double, std::string, Missing>;

struct Sample {
    std::unordered_map<std::string, FeatureValue> values;
};

struct LookupOptions {
    /// Map numeric values outside the graph's domain to the nearest edge bin
    /// instead of raising OutOfDomain.
    bool clamp = false;
};

/// Throws InvalidGraph when a structural invariant is violated. Density is not
/// checked here (parsed graphs legitimately carry zero density).
void validate(const TermGraph& graph);
void validate(const GamModel& model);

/// Index of the bin containing x. Binary search over upper edges.
std::size_t find_bin(const TermGraph& graph, double x, LookupOptions options = {});

/// Index of the bin with the given label, falling back to the "other" bin.
std::size_t find_label(const TermGraph& graph, std::string_view label);

double term_contribution(const TermGraph& graph, const FeatureValue& value, LookupOptions options = {});

double predict_logit(const GamModel& model, const Sample& sample, LookupOptions options = {});

/// Logistic sigmoid. Throws NonFinite on NaN or infinite input.
double log_odds_to_prob(double z);

double predict_prob(const GamModel& model, const Sample& sample, LookupOptions options = {});

enum class CenteringPolicy { mean_zero, min_zero };

/// Density-weighted mean score of a graph, including the missing bin.
/// Throws ZeroDensity when the graph has no density.
double weighted_mean_score(const TermGraph& graph);

/// Shifts every term to satisfy the policy and moves the offsets into the
/// intercept. Predictions are unchanged.
GamModel recenter(const GamModel& model, CenteringPolicy policy = CenteringPolicy::mean_zero);

/// Shift all scores (and confidence bounds) of one graph by -offset.
TermGraph shift_graph(const TermGraph& graph, double offset);

struct FeatureImportance {
    std::string feature;
    double importance = 0.0;
};

/// Density-weighted mean |score| per term on the mean-zero-centered model,
/// sorted by importance descending then feature name.
std::vector<FeatureImportance> feature_importance(const GamModel& model);

/// Importance of a single, already centered, graph.
double term_importance(const TermGraph& graph);

} // namespace gamtalk
