#include "gamtalk/llm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <thread>

#include "gamtalk/error.hpp"

namespace gamtalk::llm {

using json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMinTruncatedTokens = 8;
constexpr std::string_view kEllipsis = " [...]";

Error with_transcript(const Error& e, const Messages& transcript)
{
    json details = e.details().is_object() ? e.details() : json::object();
    details["transcript"] = to_json(transcript);
    return Error(e.code(), e.what(), std::move(details));
}

// f(i) for i in [0, n) on at most `limit` threads; the exception of the
// lowest failing index is rethrown.
template <typename F>
void for_each_bounded(std::size_t n, std::size_t limit, F&& f)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(limit, 1), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// Cut roughly a quarter off the end, at a word boundary when possible.
std::string shorten(const std::string& text)
{
    std::string body = text;
    if (body.size() >= kEllipsis.size() && body.compare(body.size() - kEllipsis.size(), kEllipsis.size(), kEllipsis) == 0)
        body.resize(body.size() - kEllipsis.size());
    std::size_t cut = body.size() * 3 / 4;
    const auto space = body.rfind(' ', cut);
    if (space != std::string::npos && space > 0)
        cut = space;
    while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80)
        --cut;
    body.resize(cut);
    return body + std::string(kEllipsis);
}

// Shorten the longest item until `build(items)` fits the budget.
template <typename Build>
Messages fit_items(std::vector<SummaryItem>& items, std::vector<Truncation>& log, std::size_t budget,
                   const TokenCounter& count, Build&& build)
{
    std::map<std::string, std::size_t> slot;
    for (;;) {
        Messages messages = build(items);
        const std::size_t tokens = estimate_message_tokens(messages, count);
        if (tokens <= budget)
            return messages;
        std::size_t longest = items.size();
        std::size_t longest_tokens = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const std::size_t t = count(items[i].text);
            if (t > longest_tokens) {
                longest_tokens = t;
                longest = i;
            }
        }
        if (longest == items.size() || longest_tokens <= kMinTruncatedTokens)
            throw Error(ErrorCode::BudgetExceeded,
                        "aggregation request does not fit the token budget even with truncated summaries",
                        {{"tokens", tokens}, {"budget", budget}});
        auto& item = items[longest];
        auto [it, fresh] = slot.try_emplace(item.feature, log.size());
        if (fresh)
            log.push_back({item.feature, longest_tokens, 0});
        item.text = shorten(item.text);
        log[it->second].final_tokens = count(item.text);
    }
}

} // namespace

Pipeline::Pipeline(Provider& provider, PipelineConfig config) : provider_(provider), config_(std::move(config))
{
    if (!config_.counter)
        config_.counter = default_token_counter();
}

std::string Pipeline::send(const Messages& messages)
{
    const std::size_t tokens = estimate_message_tokens(messages, config_.counter);
    if (tokens > config_.token_budget)
        throw Error(ErrorCode::BudgetExceeded,
                    "request of " + std::to_string(tokens) + " tokens exceeds the budget of " +
                        std::to_string(config_.token_budget),
                    {{"tokens", tokens}, {"budget", config_.token_budget}});
    return provider_.complete(messages, config_.params);
}

GraphText Pipeline::graph_text(const TermGraph& graph) const
{
    GraphText out;
    out.feature = graph.feature;
    out.text = encode_graph(graph, config_.encode);
    out.tokens = config_.counter(out.text);
    if (out.tokens > config_.per_graph_budget) {
        auto [simplified, report] = simplify_to_budget(graph, config_.per_graph_budget, {config_.encode, config_.counter});
        out.text = encode_graph(simplified, config_.encode);
        out.tokens = config_.counter(out.text);
        out.simplification = std::move(report);
    }
    return out;
}

Messages Pipeline::build_graph_conversation(const DatasetContext& context, std::string_view graph_text,
                                            std::optional<double> importance) const
{
    if (context.description.empty())
        throw Error(ErrorCode::Precondition, "dataset context needs a description");
    const std::size_t tokens = config_.counter(graph_text);
    if (tokens > config_.per_graph_budget) {
        const json parsed = json::parse(graph_text, nullptr, false);
        const std::string feature = parsed.is_object() && parsed.contains("feature") && parsed["feature"].is_string()
                                        ? parsed["feature"].get<std::string>()
                                        : std::string("<unnamed>");
        throw Error(ErrorCode::BudgetExceeded,
                    "graph '" + feature + "' needs " + std::to_string(tokens) + " tokens, per-graph budget is " +
                        std::to_string(config_.per_graph_budget),
                    {{"feature", feature}, {"tokens", tokens}, {"budget", config_.per_graph_budget}});
    }
    return {{Role::system, system_prompt(context)}, {Role::user, describe_graph_request(graph_text, importance)}};
}

GraphSummary Pipeline::summarize_graph(const DatasetContext& context, const TermGraph& graph,
                                       std::optional<double> importance)
{
    GraphText gt = graph_text(graph);
    GraphSummary out;
    out.feature = graph.feature;
    out.simplification = std::move(gt.simplification);
    out.transcript = build_graph_conversation(context, gt.text, importance);
    try {
        out.transcript.push_back({Role::assistant, send(out.transcript)});
        out.transcript.push_back({Role::user, std::string(kExecutiveSummaryQuestion)});
        out.text = send(out.transcript);
        out.transcript.push_back({Role::assistant, out.text});
    } catch (const Error& e) {
        throw with_transcript(e, out.transcript);
    }
    return out;
}

std::vector<GraphSummary> Pipeline::per_graph(const DatasetContext& context, const GamModel& model,
                                              std::string_view follow_up)
{
    std::map<std::string, double> importance;
    try {
        for (const auto& fi : feature_importance(model))
            importance[fi.feature] = fi.importance;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDensity)
            throw;
    }

    std::vector<GraphSummary> out(model.terms.size());
    for_each_bounded(model.terms.size(), config_.concurrency, [&](std::size_t i) {
        const TermGraph& term = model.terms[i];
        std::optional<double> imp;
        if (auto it = importance.find(term.feature); it != importance.end())
            imp = it->second;
        GraphText gt = graph_text(term);
        GraphSummary& s = out[i];
        s.feature = term.feature;
        s.simplification = std::move(gt.simplification);
        s.transcript = build_graph_conversation(context, gt.text, imp);
        try {
            s.transcript.push_back({Role::assistant, send(s.transcript)});
            s.transcript.push_back({Role::user, std::string(follow_up)});
            s.text = send(s.transcript);
            s.transcript.push_back({Role::assistant, s.text});
        } catch (const Error& e) {
            throw with_transcript(e, s.transcript);
        }
    });
    return out;
}

ModelSummary Pipeline::summarize_model(const DatasetContext& context, const std::vector<GraphSummary>& summaries,
                                       const std::vector<FeatureImportance>& importances)
{
    if (summaries.empty())
        throw Error(ErrorCode::Precondition, "model summary needs at least one feature summary");
    std::vector<SummaryItem> items;
    std::vector<bool> used(summaries.size(), false);
    for (const auto& fi : importances)
        for (std::size_t i = 0; i < summaries.size(); ++i)
            if (!used[i] && summaries[i].feature == fi.feature) {
                items.push_back({fi.feature, fi.importance, summaries[i].text});
                used[i] = true;
            }
    for (std::size_t i = 0; i < summaries.size(); ++i)
        if (!used[i])
            items.push_back({summaries[i].feature, 0.0, summaries[i].text});

    ModelSummary out;
    const std::string system = system_prompt(context);
    out.transcript = fit_items(items, out.truncations, config_.token_budget, config_.counter,
                               [&](const std::vector<SummaryItem>& it) {
                                   return Messages{{Role::system, system}, {Role::user, model_summary_request(it)}};
                               });
    try {
        out.text = send(out.transcript);
    } catch (const Error& e) {
        throw with_transcript(e, out.transcript);
    }
    out.transcript.push_back({Role::assistant, out.text});
    return out;
}

SurpriseReport Pipeline::find_surprises(const DatasetContext& context, const GamModel& model)
{
    SurpriseReport report;
    report.notes = per_graph(context, model, kGraphSurpriseQuestion);

    std::map<std::string, double> importance;
    try {
        for (const auto& fi : feature_importance(model))
            importance[fi.feature] = fi.importance;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDensity)
            throw;
    }
    std::vector<SummaryItem> items;
    std::vector<std::string> terms;
    for (const auto& n : report.notes) {
        items.push_back({n.feature, importance.count(n.feature) ? importance[n.feature] : 0.0, n.text});
        terms.push_back(n.feature);
    }

    const std::string system = system_prompt(context);
    report.aggregation = fit_items(items, report.truncations, config_.token_budget, config_.counter,
                                   [&](const std::vector<SummaryItem>& it) {
                                       return Messages{{Role::system, system},
                                                       {Role::user, surprise_ranking_request(it)}};
                                   });
    auto& transcript = report.aggregation;
    try {
        std::string answer = send(transcript);
        transcript.push_back({Role::assistant, answer});
        try {
            report.surprises = parse_surprises(answer, terms);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SurpriseParseError)
                throw;
            report.repaired = true;
            transcript.push_back({Role::user, std::string(kRepairRequest)});
            answer = send(transcript);
            transcript.push_back({Role::assistant, answer});
            report.surprises = parse_surprises(answer, terms);
        }
    } catch (const Error& e) {
        throw with_transcript(e, transcript);
    }
    return report;
}

FullReport Pipeline::run(const DatasetContext& context, const GamModel& model)
{
    FullReport r;
    r.summaries = per_graph(context, model, kExecutiveSummaryQuestion);
    std::vector<FeatureImportance> importances;
    try {
        importances = feature_importance(model);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDensity)
            throw;
    }
    r.model_summary = summarize_model(context, r.summaries, importances);
    r.surprises = find_surprises(context, model);
    return r;
}

NegativeControl Pipeline::negative_control(const DatasetContext& context)
{
    NegativeControl out;
    out.transcript = negative_control_messages(context);
    try {
        out.response = send(out.transcript);
    } catch (const Error& e) {
        throw with_transcript(e, out.transcript);
    }
    out.transcript.push_back({Role::assistant, out.response});
    out.refused = looks_like_refusal(out.response);
    return out;
}

json to_json(const Truncation& t)
{
    return {{"feature", t.feature}, {"original_tokens", t.original_tokens}, {"final_tokens", t.final_tokens}};
}

json to_json(const GraphSummary& s)
{
    json j = {{"feature", s.feature}, {"text", s.text}, {"transcript", to_json(s.transcript)}};
    if (s.simplification)
        j["simplification"] = to_json(*s.simplification);
    return j;
}

json to_json(const ModelSummary& s)
{
    json trunc = json::array();
    for (const auto& t : s.truncations)
        trunc.push_back(to_json(t));
    return {{"text", s.text}, {"truncations", std::move(trunc)}, {"transcript", to_json(s.transcript)}};
}

json to_json(const SurpriseReport& r)
{
    json notes = json::array();
    for (const auto& n : r.notes)
        notes.push_back(to_json(n));
    json trunc = json::array();
    for (const auto& t : r.truncations)
        trunc.push_back(to_json(t));
    return {{"surprises", to_json(r.surprises)},
            {"repaired", r.repaired},
            {"truncations", std::move(trunc)},
            {"notes", std::move(notes)},
            {"aggregation", to_json(r.aggregation)}};
}

json to_json(const FullReport& r)
{
    json summaries = json::array();
    for (const auto& s : r.summaries)
        summaries.push_back(to_json(s));
    return {{"prompt_version", std::string(kPromptVersion)},
            {"summaries", std::move(summaries)},
            {"model_summary", to_json(r.model_summary)},
            {"surprises", to_json(r.surprises)}};
}

} // namespace gamtalk::llm
