#pragma once

// Hierarchical conversations over a GAM: one conversation per graph, then
// aggregation requests that only ever see text summaries. No request carries
// more than one graph encoding.

#include <optional>
#include <string>
#include <vector>

#include "gamtalk/gam.hpp"
#include "gamtalk/graph_text.hpp"
#include "gamtalk/llm/prompts.hpp"
#include "gamtalk/llm/provider.hpp"
#include "gamtalk/simplify.hpp"

namespace gamtalk::llm {

struct PipelineConfig {
    CompletionParams params;
    /// Limit on the estimated size of every outgoing request.
    std::size_t token_budget = 8000;
    /// Limit on a single graph encoding; larger graphs are simplified first.
    std::size_t per_graph_budget = 2000;
    /// Concurrent per-graph conversations.
    std::size_t concurrency = 4;
    EncodeOptions encode;
    /// Empty: default_token_counter().
    TokenCounter counter;
};

struct GraphText {
    std::string feature;
    std::string text;
    std::size_t tokens = 0;
    std::optional<SimplifyReport> simplification;
};

struct GraphSummary {
    std::string feature;
    std::string text;
    Messages transcript;
    std::optional<SimplifyReport> simplification;
};

struct Truncation {
    std::string feature;
    std::size_t original_tokens = 0;
    std::size_t final_tokens = 0;
};

struct ModelSummary {
    std::string text;
    Messages transcript;
    std::vector<Truncation> truncations;
};

struct Surprise {
    std::string feature;
    std::vector<std::string> bins;
    int rank = 0;
    std::string rationale;
    /// The model answered with a rank outside 0-5.
    bool rank_clamped = false;
};

struct SurpriseReport {
    std::vector<Surprise> surprises;
    /// Per-graph conversations, in model term order.
    std::vector<GraphSummary> notes;
    Messages aggregation;
    std::vector<Truncation> truncations;
    bool repaired = false;
};

struct NegativeControl {
    Messages transcript;
    std::string response;
    bool refused = false;
};

struct FullReport {
    std::vector<GraphSummary> summaries;
    ModelSummary model_summary;
    SurpriseReport surprises;
};

nlohmann::ordered_json to_json(const Surprise& s);
nlohmann::ordered_json to_json(const std::vector<Surprise>& s);
nlohmann::ordered_json to_json(const Truncation& t);
nlohmann::ordered_json to_json(const GraphSummary& s);
nlohmann::ordered_json to_json(const ModelSummary& s);
nlohmann::ordered_json to_json(const SurpriseReport& r);
nlohmann::ordered_json to_json(const FullReport& r);

/// Parse a model's surprise answer: a strict JSON array (optionally inside a
/// ``` fence) of {feature, bins, rank, rationale}. Feature names are matched
/// to `terms` ignoring case and treating spaces as underscores. Ranks are
/// clamped to 0-5 and flagged. Sorted by rank descending, then feature.
/// Throws SurpriseParseError carrying the raw text.
std::vector<Surprise> parse_surprises(std::string_view text, const std::vector<std::string>& terms);

/// Heuristic for the negative control: does the answer decline to report
/// surprises for lack of data?
bool looks_like_refusal(std::string_view text);

class Pipeline {
public:
    Pipeline(Provider& provider, PipelineConfig config);

    const PipelineConfig& config() const { return config_; }

    /// Encoding of the graph, simplified to per_graph_budget when needed.
    GraphText graph_text(const TermGraph& graph) const;

    /// [system, user(describe)]. Throws BudgetExceeded when the graph text is
    /// over per_graph_budget.
    Messages build_graph_conversation(const DatasetContext& context, std::string_view graph_text,
                                      std::optional<double> importance) const;

    /// Describe, then the executive-summary question.
    GraphSummary summarize_graph(const DatasetContext& context, const TermGraph& graph,
                                 std::optional<double> importance = std::nullopt);

    /// One aggregation request over per-graph summaries, listed by descending
    /// importance. Summaries are shortened longest-first to fit the budget.
    ModelSummary summarize_model(const DatasetContext& context, const std::vector<GraphSummary>& summaries,
                                 const std::vector<FeatureImportance>& importances);

    /// Per-graph surprise notes, then one ranking request answered as JSON,
    /// with a single repair round-trip on parse failure.
    SurpriseReport find_surprises(const DatasetContext& context, const GamModel& model);

    /// Summaries of every term, the model summary and the surprise list.
    FullReport run(const DatasetContext& context, const GamModel& model);

    NegativeControl negative_control(const DatasetContext& context);

    /// Send with the budget assertion. Errors carry the transcript so far.
    std::string send(const Messages& messages);

private:
    std::vector<GraphSummary> per_graph(const DatasetContext& context, const GamModel& model,
                                        std::string_view follow_up);

    Provider& provider_;
    PipelineConfig config_;
};

/// One conversation with a user. The context (graph or model description)
/// lives in the system message; older turns are dropped in pairs to respect
/// the budget.
struct ChatSession {
    Messages messages;
    CompletionParams params;
    std::size_t token_budget = 8000;
    /// One entry per dropped user/assistant pair.
    std::vector<std::string> dropped;
};

/// Appends the user text and the reply; returns the reply. Throws
/// Precondition on empty text, BudgetExceeded when the system message and the
/// new turn alone do not fit.
std::string chat_turn(Provider& provider, ChatSession& session, const DatasetContext& context,
                      std::string_view user_text, std::string_view context_text,
                      const TokenCounter& counter = {});

} // namespace gamtalk::llm
