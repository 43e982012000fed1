#include "gamtalk/graph_text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace gamtalk {

using json = nlohmann::ordered_json;

namespace {

constexpr int kMaxDigits = 17;

void trim_fraction(std::string& s)
{
    const auto dot = s.find('.');
    if (dot == std::string::npos)
        return;
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
}

std::string json_string(std::string_view s)
{
    return json(std::string(s)).dump();
}

double rendered(double v, int digits)
{
    return std::strtod(format_sig(v, digits).c_str(), nullptr);
}

// Fewest digits at which a < b survives rounding.
int separating_digits(double a, double b)
{
    for (int k = 1; k < kMaxDigits; ++k)
        if (rendered(a, k) < rendered(b, k))
            return k;
    return kMaxDigits;
}

// Per-edge digit counts: each edge gets max(digits, what its neighbours need
// to stay strictly ordered once rounded). Depends on `digits` only through the
// max, so fewer requested digits never yields more.
std::vector<int> edge_digits(const std::vector<double>& edges, int digits)
{
    std::vector<int> d(edges.size(), digits);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i] == edges[i + 1])
            continue;
        const int k = separating_digits(edges[i], edges[i + 1]);
        d[i] = std::max(d[i], k);
        d[i + 1] = std::max(d[i + 1], k);
    }
    // Mixed digit counts on the two sides can still collide; widen both.
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<bool> bump(edges.size(), false);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            if (edges[i] != edges[i + 1] && !(rendered(edges[i], d[i]) < rendered(edges[i + 1], d[i + 1])))
                bump[i] = bump[i + 1] = true;
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (bump[i] && d[i] < kMaxDigits) {
                ++d[i];
                changed = true;
            }
    }
    return d;
}

Error parse_error(const std::string& message)
{
    return Error(ErrorCode::ParseError, "graph text: " + message);
}

double parse_number(std::string_view s, const std::string& key)
{
    std::string buf(s);
    while (!buf.empty() && buf.front() == ' ')
        buf.erase(buf.begin());
    while (!buf.empty() && buf.back() == ' ')
        buf.pop_back();
    if (buf.empty())
        throw parse_error("empty edge in key '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || !std::isfinite(v))
        throw parse_error("bad edge '" + buf + "' in key '" + key + "'");
    return v;
}

std::pair<double, double> parse_interval(const std::string& key)
{
    if (key.size() < 5 || key.front() != '(' || key.back() != ')')
        throw parse_error("interval key '" + key + "' is not of the form (lo, hi)");
    const auto comma = key.find(',');
    if (comma == std::string::npos || key.find(',', comma + 1) != std::string::npos)
        throw parse_error("interval key '" + key + "' is not of the form (lo, hi)");
    const std::string_view body(key);
    return {parse_number(body.substr(1, comma - 1), key), parse_number(body.substr(comma + 1, key.size() - comma - 2), key)};
}

double number_field(const json& v, const std::string& what)
{
    if (!v.is_number())
        throw parse_error(what + " must be a number");
    return v.get<double>();
}

std::pair<double, double> ci_pair(const json& v, const std::string& what)
{
    if (!v.is_array() || v.size() != 2)
        throw parse_error(what + " must be a [low, high] pair");
    return {number_field(v[0], what), number_field(v[1], what)};
}

} // namespace

std::string format_sig(double value, int digits)
{
    digits = std::clamp(digits, 1, kMaxDigits);
    if (value == 0.0 || !std::isfinite(value))
        return value == 0.0 ? "0" : json(value).dump();

    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, value);
    const std::string sci(buf);
    const auto epos = sci.find('e');
    const int exponent = std::atoi(sci.c_str() + epos + 1);

    std::string out;
    if (exponent >= 15 || exponent < -6) {
        std::string mantissa = sci.substr(0, epos);
        trim_fraction(mantissa);
        out = mantissa + "e" + std::to_string(exponent);
    } else {
        const double rounded = std::strtod(buf, nullptr);
        const int decimals = std::max(0, digits - 1 - exponent);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
        out = buf;
        trim_fraction(out);
    }
    if (out == "-0")
        out = "0";
    return out;
}

std::string format_interval(double lower, double upper, int digits)
{
    return "(" + format_sig(lower, digits) + ", " + format_sig(upper, digits) + ")";
}

std::vector<std::string> bin_keys(const TermGraph& graph, int sig_digits)
{
    std::vector<std::string> keys;
    keys.reserve(graph.bins.size());
    if (!graph.is_interval()) {
        for (const auto& b : graph.bins)
            keys.push_back(b.label.value_or(""));
        return keys;
    }
    std::vector<double> edges;
    edges.reserve(graph.bins.size() + 1);
    edges.push_back(graph.bins.front().lower);
    for (const auto& b : graph.bins)
        edges.push_back(b.upper);
    const auto d = edge_digits(edges, sig_digits);
    for (std::size_t i = 0; i < graph.bins.size(); ++i)
        keys.push_back("(" + format_sig(edges[i], d[i]) + ", " + format_sig(edges[i + 1], d[i + 1]) + ")");
    return keys;
}

std::string encode_graph(const TermGraph& graph, const EncodeOptions& options)
{
    if (options.sig_digits < 1)
        throw Error(ErrorCode::Precondition, "sig_digits must be >= 1");
    validate(graph);

    const int d = options.sig_digits;
    const auto keys = bin_keys(graph, d);
    const bool with_ci = options.include_ci.value_or(graph.has_ci()) && graph.has_ci();

    std::string out;
    out.reserve(32 * graph.bins.size() + 64);
    out += "{\"feature\": " + json_string(graph.feature);
    out += ", \"kind\": " + json_string(to_string(graph.kind));

    out += ", \"scores\": {";
    for (std::size_t i = 0; i < graph.bins.size(); ++i) {
        if (i)
            out += ", ";
        out += json_string(keys[i]) + ": " + format_sig(graph.bins[i].score, d);
    }
    out += "}";

    if (with_ci) {
        out += ", \"confidence_intervals\": {";
        for (std::size_t i = 0; i < graph.bins.size(); ++i) {
            if (i)
                out += ", ";
            out += json_string(keys[i]) + ": [" + format_sig(*graph.bins[i].ci_low, d) + ", " +
                   format_sig(*graph.bins[i].ci_high, d) + "]";
        }
        out += "}";
    }

    if (options.include_density) {
        out += ", \"densities\": {";
        for (std::size_t i = 0; i < graph.bins.size(); ++i) {
            if (i)
                out += ", ";
            out += json_string(keys[i]) + ": " + std::to_string(graph.bins[i].density);
        }
        out += "}";
    }

    if (graph.missing) {
        const MissingBin& m = *graph.missing;
        out += ", \"missing\": " + format_sig(m.score, d);
        if (with_ci && m.ci_low && m.ci_high)
            out += ", \"missing_confidence_interval\": [" + format_sig(*m.ci_low, d) + ", " +
                   format_sig(*m.ci_high, d) + "]";
        if (options.include_density)
            out += ", \"missing_density\": " + std::to_string(m.density);
    }
    out += "}";
    return out;
}

TermGraph parse_graph(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("graph text: ") + e.what(), {{"byte", e.byte}});
    }
    if (!j.is_object())
        throw parse_error("top level must be an object");
    if (!j.contains("feature") || !j.at("feature").is_string())
        throw parse_error("missing string field 'feature'");
    if (!j.contains("scores") || !j.at("scores").is_object() || j.at("scores").empty())
        throw parse_error("missing non-empty object 'scores'");

    TermGraph g;
    g.feature = j.at("feature").get<std::string>();
    g.kind = j.contains("kind") ? feature_kind_from_string(j.at("kind").get<std::string>()) : FeatureKind::continuous;

    std::map<std::string, std::size_t> index;
    for (auto it = j.at("scores").begin(); it != j.at("scores").end(); ++it) {
        Bin b;
        if (g.is_interval()) {
            std::tie(b.lower, b.upper) = parse_interval(it.key());
            if (!(b.lower <= b.upper))
                throw Error(ErrorCode::NonContiguousBins, "graph text: interval '" + it.key() + "' is empty",
                            {{"feature", g.feature}});
        } else {
            b.label = it.key();
        }
        b.score = number_field(it.value(), "score for '" + it.key() + "'");
        index[it.key()] = g.bins.size();
        g.bins.push_back(std::move(b));
    }

    if (j.contains("confidence_intervals")) {
        const json& cis = j.at("confidence_intervals");
        if (!cis.is_object())
            throw parse_error("'confidence_intervals' must be an object");
        for (auto it = cis.begin(); it != cis.end(); ++it) {
            auto found = index.find(it.key());
            if (found == index.end())
                throw parse_error("confidence interval for unknown bin '" + it.key() + "'");
            auto [lo, hi] = ci_pair(it.value(), "confidence interval for '" + it.key() + "'");
            g.bins[found->second].ci_low = lo;
            g.bins[found->second].ci_high = hi;
        }
    }
    if (j.contains("densities")) {
        const json& ds = j.at("densities");
        if (!ds.is_object())
            throw parse_error("'densities' must be an object");
        for (auto it = ds.begin(); it != ds.end(); ++it) {
            auto found = index.find(it.key());
            if (found == index.end())
                throw parse_error("density for unknown bin '" + it.key() + "'");
            if (!it.value().is_number_unsigned())
                throw parse_error("density for '" + it.key() + "' must be a non-negative integer");
            g.bins[found->second].density = it.value().get<std::uint64_t>();
        }
    }
    if (j.contains("missing") && !j.at("missing").is_null()) {
        MissingBin m;
        m.score = number_field(j.at("missing"), "'missing'");
        if (j.contains("missing_confidence_interval")) {
            auto [lo, hi] = ci_pair(j.at("missing_confidence_interval"), "'missing_confidence_interval'");
            m.ci_low = lo;
            m.ci_high = hi;
        }
        if (j.contains("missing_density")) {
            if (!j.at("missing_density").is_number_unsigned())
                throw parse_error("'missing_density' must be a non-negative integer");
            m.density = j.at("missing_density").get<std::uint64_t>();
        }
        g.missing = std::move(m);
    }

    if (g.is_interval()) {
        std::stable_sort(g.bins.begin(), g.bins.end(), [](const Bin& a, const Bin& b) { return a.lower < b.lower; });
        for (std::size_t i = 0; i + 1 < g.bins.size(); ++i) {
            if (g.bins[i].upper != g.bins[i + 1].lower)
                throw Error(ErrorCode::NonContiguousBins,
                            "graph text: bins " + format_interval(g.bins[i].lower, g.bins[i].upper, 17) + " and " +
                                format_interval(g.bins[i + 1].lower, g.bins[i + 1].upper, 17) +
                                (g.bins[i].upper > g.bins[i + 1].lower ? " overlap" : " leave a gap"),
                            {{"feature", g.feature}, {"bin", i}});
        }
    }
    validate(g);
    return g;
}

} // namespace gamtalk
