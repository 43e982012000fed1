#include <algorithm>
#include <cctype>
#include <cmath>

#include "gamtalk/error.hpp"
#include "gamtalk/llm/pipeline.hpp"

namespace gamtalk::llm {

using json = nlohmann::ordered_json;

namespace {

std::string normalize(std::string_view name)
{
    std::string out;
    for (unsigned char c : name)
        out += c == ' ' || c == '-' ? '_' : static_cast<char>(std::tolower(c));
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string_view strip_fence(std::string_view s)
{
    s = trim(s);
    if (s.substr(0, 3) != "```")
        return s;
    const auto eol = s.find('\n');
    if (eol == std::string_view::npos)
        return s;
    s.remove_prefix(eol + 1);
    s = trim(s);
    if (s.size() >= 3 && s.substr(s.size() - 3) == "```")
        s.remove_suffix(3);
    return trim(s);
}

[[noreturn]] void fail(std::string_view raw, const std::string& why)
{
    throw Error(ErrorCode::SurpriseParseError, "surprise answer rejected: " + why,
                {{"raw", std::string(raw)}, {"reason", why}});
}

} // namespace

json to_json(const Surprise& s)
{
    return {{"feature", s.feature},
            {"bins", s.bins},
            {"rank", s.rank},
            {"rationale", s.rationale},
            {"rank_clamped", s.rank_clamped}};
}

json to_json(const std::vector<Surprise>& s)
{
    json arr = json::array();
    for (const auto& x : s)
        arr.push_back(to_json(x));
    return arr;
}

std::vector<Surprise> parse_surprises(std::string_view text, const std::vector<std::string>& terms)
{
    const std::string_view body = strip_fence(text);
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        fail(text, "not valid JSON");
    if (!j.is_array())
        fail(text, "top level is not an array");

    std::vector<Surprise> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        const std::string at = "element " + std::to_string(i);
        if (!e.is_object())
            fail(text, at + " is not an object");
        for (const char* key : {"feature", "bins", "rank", "rationale"})
            if (!e.contains(key))
                fail(text, at + " has no '" + key + "'");
        if (!e["feature"].is_string() || !e["rationale"].is_string() || !e["bins"].is_array())
            fail(text, at + " has a field of the wrong type");

        Surprise s;
        const std::string wanted = normalize(e["feature"].get<std::string>());
        const auto term = std::find_if(terms.begin(), terms.end(),
                                       [&](const std::string& t) { return normalize(t) == wanted; });
        if (term == terms.end())
            fail(text, at + " names unknown feature '" + e["feature"].get<std::string>() + "'");
        s.feature = *term;

        for (const auto& b : e["bins"]) {
            if (!b.is_string())
                fail(text, at + " has a non-string bin");
            s.bins.push_back(b.get<std::string>());
        }

        const json& rank = e["rank"];
        if (!rank.is_number())
            fail(text, at + " has a non-numeric rank");
        const double r = rank.get<double>();
        if (!std::isfinite(r) || r != std::floor(r))
            fail(text, at + " has a non-integer rank");
        s.rank = static_cast<int>(std::clamp(r, 0.0, 5.0));
        s.rank_clamped = r < 0.0 || r > 5.0;
        s.rationale = e["rationale"].get<std::string>();
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const Surprise& a, const Surprise& b) {
        if (a.rank != b.rank)
            return a.rank > b.rank;
        return a.feature < b.feature;
    });
    return out;
}

bool looks_like_refusal(std::string_view text)
{
    std::string lower;
    for (unsigned char c : text)
        lower += static_cast<char>(std::tolower(c));
    for (const char* marker : {"unable to", "cannot", "can't", "i'm sorry", "i am sorry", "no model",
                               "not been given", "not been provided", "not provided", "please provide",
                               "don't have access", "do not have access"})
        if (lower.find(marker) != std::string::npos)
            return true;
    return false;
}

} // namespace gamtalk::llm
