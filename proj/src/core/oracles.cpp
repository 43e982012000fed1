#include "gamtalk/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "gamtalk/graph_text.hpp"

namespace gamtalk {

using json = nlohmann::ordered_json;

double value_at(const TermGraph& graph, const FeatureValue& x, LookupOptions options)
{
    return term_contribution(graph, x, options);
}

double value_at(const TermGraph& graph, double x, LookupOptions options)
{
    return term_contribution(graph, FeatureValue{x}, options);
}

std::string_view to_string(Direction d)
{
    switch (d) {
    case Direction::increasing: return "increasing";
    case Direction::decreasing: return "decreasing";
    case Direction::constant: return "constant";
    case Direction::none: return "none";
    }
    return "none";
}

MonotoneResult is_monotone(const TermGraph& graph)
{
    validate(graph);
    std::size_t up = 0, down = 0;
    for (std::size_t i = 0; i + 1 < graph.bins.size(); ++i) {
        const double d = graph.bins[i + 1].score - graph.bins[i].score;
        up += d > 0.0;
        down += d < 0.0;
    }
    MonotoneResult r;
    if (up == 0 && down == 0) {
        r.direction = Direction::constant;
    } else if (down == 0) {
        r.direction = Direction::increasing;
    } else if (up == 0) {
        r.direction = Direction::decreasing;
    } else {
        r.direction = Direction::none;
        const bool majority_up = up >= down;
        for (std::size_t i = 0; i + 1 < graph.bins.size(); ++i) {
            const double d = graph.bins[i + 1].score - graph.bins[i].score;
            if (majority_up ? d < 0.0 : d > 0.0)
                r.violations.emplace_back(i, i + 1);
        }
    }
    return r;
}

ArgmaxResult argmax_region(const TermGraph& graph)
{
    validate(graph);
    std::size_t best = 0;
    for (std::size_t i = 1; i < graph.bins.size(); ++i)
        if (graph.bins[i].score > graph.bins[best].score)
            best = i;

    ArgmaxResult r;
    if (graph.missing && graph.missing->score > graph.bins[best].score) {
        r.is_missing = true;
        r.score = graph.missing->score;
        return r;
    }
    const Bin& b = graph.bins[best];
    r.bin = best;
    r.lower = b.lower;
    r.upper = b.upper;
    r.label = b.label;
    r.score = b.score;
    return r;
}

MeanDelta mean_delta(const TermGraph& graph, double x0, double x1)
{
    const double v0 = value_at(graph, x0);
    const double v1 = value_at(graph, x1);
    return {v1 - v0, log_odds_to_prob(v1) - log_odds_to_prob(v0)};
}

double average_slope(const TermGraph& graph, double step)
{
    validate(graph);
    if (!(step > 0.0) || !std::isfinite(step))
        throw Error(ErrorCode::Precondition, "step must be a positive finite number");
    if (!graph.is_interval())
        throw Error(ErrorCode::InvalidGraph, "average_slope needs a continuous term", {{"feature", graph.feature}});
    const auto& bins = graph.bins;
    if (bins.size() < 2)
        throw Error(ErrorCode::DegenerateDomain, "average_slope needs at least two bins", {{"feature", graph.feature}});

    std::uint64_t total = 0;
    for (const auto& b : bins)
        total += b.density;
    const bool unit = total == 0;

    // bin with lower <= x < upper
    auto starting_at = [&](double x) {
        auto it = std::upper_bound(bins.begin(), bins.end(), x, [](double v, const Bin& b) { return v < b.lower; });
        return static_cast<std::size_t>(it - bins.begin()) - 1;
    };

    double acc = 0.0;
    double weight = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const double x = bins[i].lower;
        const double x1 = x + step;
        if (!(x1 < graph.domain_max()))
            continue;
        const double w = unit ? 1.0 : static_cast<double>(bins[i].density);
        acc += w * (bins[starting_at(x1)].score - bins[i].score);
        weight += w;
    }
    if (weight == 0.0)
        throw Error(ErrorCode::DegenerateDomain,
                    "no sample point of '" + graph.feature + "' has x + step inside the domain",
                    {{"feature", graph.feature}, {"step", step}});
    return acc / weight;
}

std::vector<Jump> detect_jumps(const TermGraph& graph, double threshold)
{
    if (!(threshold > 0.0))
        throw Error(ErrorCode::Precondition, "jump threshold must be > 0");
    validate(graph);
    std::vector<Jump> jumps;
    for (std::size_t i = 0; i + 1 < graph.bins.size(); ++i) {
        const double d = graph.bins[i + 1].score - graph.bins[i].score;
        if (std::abs(d) >= threshold) {
            Jump j;
            if (graph.is_interval())
                j.at_edge = graph.bins[i].upper;
            j.delta = d;
            j.left_bin = i;
            j.right_bin = i + 1;
            jumps.push_back(j);
        }
    }
    std::stable_sort(jumps.begin(), jumps.end(),
                     [](const Jump& a, const Jump& b) { return std::abs(a.delta) > std::abs(b.delta); });
    return jumps;
}

json to_json(const MonotoneResult& r)
{
    json violations = json::array();
    for (auto [a, b] : r.violations)
        violations.push_back({a, b});
    return {{"direction", std::string(to_string(r.direction))}, {"violations", std::move(violations)}};
}

json to_json(const ArgmaxResult& r, int sig_digits)
{
    json j;
    if (r.is_missing) {
        j["region"] = "missing";
        j["missing"] = true;
    } else {
        j["bin"] = *r.bin;
        j["region"] = r.label ? *r.label : format_interval(r.lower, r.upper, sig_digits);
        j["missing"] = false;
        if (!r.label) {
            j["lower"] = r.lower;
            j["upper"] = r.upper;
        }
    }
    j["score"] = r.score;
    return j;
}

json to_json(const MeanDelta& r)
{
    return {{"delta_log_odds", r.delta_log_odds},
            {"delta_probability_at_baseline", r.delta_probability_at_baseline},
            {"probability_scope", "term-level"}};
}

json to_json(const Jump& j)
{
    json out;
    out["at_edge"] = j.at_edge ? json(*j.at_edge) : json(nullptr);
    out["delta"] = j.delta;
    out["left_bin"] = j.left_bin;
    out["right_bin"] = j.right_bin;
    return out;
}

json to_json(const std::vector<Jump>& jumps)
{
    json arr = json::array();
    for (const auto& j : jumps)
        arr.push_back(to_json(j));
    return arr;
}

json oracle_digest(const TermGraph& graph, double jump_threshold)
{
    return {{"monotonicity", to_json(is_monotone(graph))},
            {"argmax", to_json(argmax_region(graph))},
            {"jump_threshold", jump_threshold},
            {"jumps", to_json(detect_jumps(graph, jump_threshold))}};
}

} // namespace gamtalk
