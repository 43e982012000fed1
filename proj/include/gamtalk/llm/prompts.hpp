#pragma once

// Prompt templates, version prompt_v1. The exact bytes are part of the
// interface: scripted mock responses are keyed on them and snapshot tests pin
// them. Any wording change needs a new version.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamtalk/llm/message.hpp"

namespace gamtalk::llm {

inline constexpr std::string_view kPromptVersion = "prompt_v1";

struct DatasetContext {
    /// Task, outcome and cohort, e.g. "This model represents outcomes of
    /// hospitalized patients with pneumonia. The outcome is in-hospital mortality."
    std::string description;
    /// What a positive score means, e.g. "Positive scores mean a higher risk of death."
    std::string outcome_direction;
};

inline constexpr std::string_view kAnomalyInstruction =
    "Pay special attention to values or patterns that appear abnormal. It is very important that you alert the "
    "user about these potentially surprising aspects of the graphs.";

inline constexpr std::string_view kExecutiveSummaryQuestion =
    "Now provide a brief executive summary of the role of the feature in the model. Assume that the reader already "
    "knows what the model is about, so you don't need to describe the outcome or feature details. Use at most 7 "
    "sentences. Avoid boilerplate sentences like 'other factors may also impact this likelihood' or 'further "
    "analysis would be needed'.";

inline constexpr std::string_view kGraphSurpriseQuestion =
    "Great, now summarize the the most important surprising aspects of this graph in at most 5 sentences.";

inline constexpr std::string_view kSurpriseRankingQuestion =
    "What surprises do you find? For each surprise, tell me the specific feature, the feature values (bins) that "
    "have surprising effects, and rank the surprise on a scale from 0-5 where 0 means unsurprising and 5 means "
    "surprising.";

inline constexpr std::string_view kRepairRequest =
    "Your previous answer could not be parsed. Respond with valid JSON only: a JSON array of objects with the keys "
    "\"feature\", \"bins\", \"rank\" and \"rationale\", and no other text.";

/// Role, task, anomaly instruction, encoding conventions and the dataset
/// description.
std::string system_prompt(const DatasetContext& context);

/// First user turn of a per-graph conversation.
std::string describe_graph_request(std::string_view graph_text, std::optional<double> importance);

struct SummaryItem {
    std::string feature;
    double importance = 0.0;
    std::string text;
};

/// Aggregation request over per-feature summaries (already in the order they
/// should be listed).
std::string model_summary_request(const std::vector<SummaryItem>& items);

/// Aggregation request over per-feature surprise notes, asking for a strict
/// JSON array.
std::string surprise_ranking_request(const std::vector<SummaryItem>& items);

/// Surprise question with no model data at all (negative control).
Messages negative_control_messages(const DatasetContext& context);

} // namespace gamtalk::llm
