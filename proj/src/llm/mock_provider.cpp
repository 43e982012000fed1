#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <regex>

#include "gamtalk/error.hpp"
#include "gamtalk/graph_text.hpp"
#include "gamtalk/llm/provider.hpp"
#include "gamtalk/oracles.hpp"

namespace gamtalk::llm {

using json = nlohmann::ordered_json;

MockScript MockScript::from_json(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "mock script must be a JSON object");
    MockScript s;
    const bool structured = j.contains("responses") || j.contains("rules") || j.contains("templates");
    const json& responses = structured ? (j.contains("responses") ? j.at("responses") : json::object()) : j;
    for (auto it = responses.begin(); it != responses.end(); ++it) {
        if (!it.value().is_string())
            throw Error(ErrorCode::ParseError, "mock response for '" + it.key() + "' is not a string");
        s.by_hash[it.key()] = it.value().get<std::string>();
    }
    if (structured && j.contains("rules")) {
        for (const auto& r : j.at("rules")) {
            MockRule rule;
            if (!r.contains("all") || !r.contains("response"))
                throw Error(ErrorCode::ParseError, "mock rule needs 'all' and 'response'");
            for (const auto& sub : r.at("all"))
                rule.all.push_back(sub.get<std::string>());
            rule.response = r.at("response").get<std::string>();
            if (r.contains("scope")) {
                const auto scope = r.at("scope").get<std::string>();
                if (scope != "last_user" && scope != "conversation")
                    throw Error(ErrorCode::ParseError, "mock rule scope must be last_user or conversation");
                rule.whole_conversation = scope == "conversation";
            }
            s.rules.push_back(std::move(rule));
        }
    }
    if (structured && j.contains("templates"))
        s.templates = j.at("templates").get<bool>();
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open mock script " + path.string(), {{"path", path.string()}});
    try {
        return from_json(json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "mock script " + path.string() + ": " + e.what());
    }
}

MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

std::size_t MockProvider::calls() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

namespace {

const Message* last_user(const Messages& messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it)
        if (it->role == Role::user)
            return &*it;
    return nullptr;
}

// The JSON object starting at `start`, by brace matching outside strings.
std::optional<std::string_view> object_at(std::string_view text, std::size_t start)
{
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}' && --depth == 0) {
            return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

std::optional<TermGraph> graph_in(const Messages& messages)
{
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        const std::string_view text = it->content;
        for (auto pos = text.find("{\"feature\""); pos != std::string_view::npos;
             pos = text.find("{\"feature\"", pos + 1)) {
            if (auto obj = object_at(text, pos)) {
                try {
                    return parse_graph(*obj);
                } catch (const Error&) {
                }
            }
        }
    }
    return std::nullopt;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string percent(double p)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * p);
    return buf;
}

std::string fmt(double v)
{
    return format_sig(v, 4);
}

std::string key_of(const TermGraph& g, std::size_t bin)
{
    return bin_keys(g, 4)[bin];
}

std::string risk_answer(const TermGraph& g, double x)
{
    const double score = value_at(g, x);
    const std::size_t bin = find_bin(g, x);
    return "The average risk at " + g.feature + " = " + fmt(x) +
           " can be derived from the mean log-odds contribution for the " + g.feature + " interval \"" +
           key_of(g, bin) + "\", which is " + fmt(score) +
           ".\n\nLog-odds can be converted into a probability with p = exp(log-odds) / (1 + exp(log-odds)). "
           "Using this formula, the average risk is approximately " +
           percent(log_odds_to_prob(score)) +
           ".\n\nThis figure applies the conversion to this feature's contribution alone (term-level).";
}

std::string delta_answer(const TermGraph& g, double x0, double x1)
{
    const MeanDelta d = mean_delta(g, x0, x1);
    return "The mean log-odds contribution changes from " + fmt(value_at(g, x0)) + " at " + g.feature + " = " +
           fmt(x0) + " to " + fmt(value_at(g, x1)) + " at " + g.feature + " = " + fmt(x1) + ", a difference of " +
           fmt(d.delta_log_odds) + " in log-odds. At the term level this moves the probability from " +
           percent(log_odds_to_prob(value_at(g, x0))) + " to " + percent(log_odds_to_prob(value_at(g, x1))) + ".";
}

std::string slope_answer(const TermGraph& g, double step)
{
    return "Averaged over the bins of the graph, weighted by the number of training samples, a " + fmt(step) +
           "-unit increase in " + g.feature + " changes the log-odds contribution by " + fmt(average_slope(g, step)) +
           ".";
}

std::string monotone_answer(const TermGraph& g)
{
    const MonotoneResult r = is_monotone(g);
    switch (r.direction) {
    case Direction::increasing:
        return "Yes, according to the provided data, the contribution of " + g.feature + " increases monotonically.";
    case Direction::decreasing:
        return "Yes, according to the provided data, the contribution of " + g.feature + " decreases monotonically.";
    case Direction::constant:
        return "The contribution of " + g.feature + " is constant across all bins.";
    case Direction::none:
        break;
    }
    std::string where;
    for (const auto& [a, b] : r.violations) {
        if (!where.empty())
            where += ", ";
        where += "\"" + key_of(g, a) + "\" to \"" + key_of(g, b) + "\"";
    }
    return "No, the contribution of " + g.feature + " is not monotone. It changes direction between " + where + ".";
}

std::string argmax_answer(const TermGraph& g)
{
    const ArgmaxResult r = argmax_region(g);
    if (r.is_missing)
        return "According to the model's output, the highest contribution (" + fmt(r.score) +
               ") is for patients whose " + g.feature + " is missing.";
    if (r.label)
        return "According to the model's output, the highest contribution (" + fmt(r.score) + ") is for " +
               g.feature + " = " + *r.label + ".";
    return "According to the model's output, those most at risk are in the interval \"" + key_of(g, *r.bin) +
           "\", i.e. " + g.feature + " from " + fmt(r.lower) + " to " + fmt(r.upper) + ", with a contribution of " +
           fmt(r.score) + ".";
}

} // namespace

std::optional<std::string> template_answer(const Messages& messages)
{
    const Message* user = last_user(messages);
    if (!user)
        return std::nullopt;
    const auto graph = graph_in(messages);
    if (!graph)
        return std::nullopt;
    const std::string q = lower(user->content);
    static const std::regex slope_re(R"((\d+(?:\.\d+)?)[- ](?:year|unit)s? increase)");
    static const std::regex from_to_re(R"(from (-?\d+(?:\.\d+)?) to (-?\d+(?:\.\d+)?))");
    static const std::regex age_re(R"((\d+(?:\.\d+)?)[- ]years?[- ]old)");
    std::smatch m;
    try {
        if (graph->is_interval() && std::regex_search(q, m, slope_re))
            return slope_answer(*graph, std::stod(m[1].str()));
        if (graph->is_interval() && std::regex_search(q, m, from_to_re))
            return delta_answer(*graph, std::stod(m[1].str()), std::stod(m[2].str()));
        if (graph->is_interval() && std::regex_search(q, m, age_re))
            return risk_answer(*graph, std::stod(m[1].str()));
        if (q.find("monoton") != std::string::npos)
            return monotone_answer(*graph);
        if (q.find("most at risk") != std::string::npos || q.find("highest") != std::string::npos)
            return argmax_answer(*graph);
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

std::string MockProvider::do_complete(const Messages& messages, const CompletionParams&)
{
    {
        std::lock_guard lock(mutex_);
        ++calls_;
    }
    const std::string hash = message_list_hash(messages);
    if (auto it = script_.by_hash.find(hash); it != script_.by_hash.end())
        return it->second;

    const Message* user = last_user(messages);
    std::string conversation;
    for (const auto& m : messages)
        conversation += m.content + "\n";
    for (const auto& rule : script_.rules) {
        const std::string_view scope = rule.whole_conversation ? std::string_view(conversation)
                                       : user                  ? std::string_view(user->content)
                                                               : std::string_view();
        const bool hit = std::all_of(rule.all.begin(), rule.all.end(),
                                     [&](const std::string& s) { return scope.find(s) != std::string_view::npos; });
        if (hit)
            return rule.response;
    }
    if (script_.templates)
        if (auto answer = template_answer(messages))
            return *answer;
    throw Error(ErrorCode::MockMiss, "mock provider has no response for message list " + hash,
                {{"hash", hash}, {"messages", messages.size()}});
}

} // namespace gamtalk::llm
