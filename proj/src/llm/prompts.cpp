#include "gamtalk/llm/prompts.hpp"

#include "gamtalk/graph_text.hpp"

namespace gamtalk::llm {

namespace {

constexpr std::string_view kRole =
    "You are an expert statistician and data scientist. Your task is to interpret global explanations produced by a "
    "generalized additive model (GAM). GAMs produce explanations in the form of graphs that contain the effect of a "
    "specific input feature. Answer all questions to the best of your ability, taking into consideration your "
    "knowledge about the real world. ";

constexpr std::string_view kEncoding =
    "Graphs are given as JSON objects. The keys of \"scores\" are intervals of the feature, written \"(lower, "
    "upper)\" with the lower edge excluded and the upper edge included, or category labels. The values are the "
    "mean contributions of the feature to the log-odds of the outcome. \"confidence_intervals\" holds 95% "
    "confidence bounds when present, and \"missing\" is the contribution of a missing value.";

std::string listing(const std::vector<SummaryItem>& items, std::string_view text_label)
{
    std::string out;
    for (const auto& item : items) {
        out += "Feature: " + item.feature + "\n";
        out += "Importance: " + format_sig(item.importance, 4) + "\n";
        out += std::string(text_label) + ": " + item.text + "\n\n";
    }
    return out;
}

} // namespace

std::string system_prompt(const DatasetContext& context)
{
    std::string out(kRole);
    out += kAnomalyInstruction;
    out += "\n\n";
    out += kEncoding;
    out += "\n\n";
    out += context.description;
    if (!context.outcome_direction.empty()) {
        out += "\n";
        out += context.outcome_direction;
    }
    return out;
}

std::string describe_graph_request(std::string_view graph_text, std::optional<double> importance)
{
    std::string out = "Here is the graph of a feature in the model";
    if (importance)
        out += " (global feature importance " + format_sig(*importance, 4) + ")";
    out += ":\n\n";
    out += graph_text;
    out += "\n\nPlease study the graph carefully and describe the role of the feature in the model, including any "
           "patterns that appear abnormal.";
    return out;
}

std::string model_summary_request(const std::vector<SummaryItem>& items)
{
    std::string out = "Below are summaries of the individual features of the model, in order of decreasing global "
                      "feature importance. Importance is the mean absolute contribution of a feature to the "
                      "log-odds.\n\n";
    out += listing(items, "Summary");
    out += "Based on these summaries, provide an overall summary of the model. Describe the most important features "
           "first and point out any surprising effects.";
    return out;
}

std::string surprise_ranking_request(const std::vector<SummaryItem>& items)
{
    std::string out = "Below are notes on the surprising aspects of each graph of the model.\n\n";
    out += listing(items, "Notes");
    out += kSurpriseRankingQuestion;
    out += "\n\nRespond with a JSON array only, with no other text. Each element must be an object with the keys "
           "\"feature\" (the feature name exactly as given above), \"bins\" (an array of the interval strings where "
           "the effect occurs, e.g. \"(150, 200)\"), \"rank\" (an integer from 0 to 5) and \"rationale\" (one or "
           "two sentences).";
    return out;
}

Messages negative_control_messages(const DatasetContext& context)
{
    std::string system(kRole);
    system += "Pay special attention to values or patterns that appear abnormal. It is very important that you alert "
              "the user about these potentially surprising aspects.\n\n";
    system += context.description;
    return {{Role::system, system}, {Role::user, std::string(kSurpriseRankingQuestion)}};
}

} // namespace gamtalk::llm
