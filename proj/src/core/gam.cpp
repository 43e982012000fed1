#include "gamtalk/gam.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gamtalk {

namespace {

Error graph_error(const TermGraph& graph, const std::string& message)
{
    return Error(ErrorCode::InvalidGraph, "term '" + graph.feature + "': " + message,
                 {{"feature", graph.feature}});
}

bool finite_or_absent(const std::optional<double>& v)
{
    return !v || std::isfinite(*v);
}

} // namespace

std::string_view to_string(FeatureKind kind)
{
    switch (kind) {
    case FeatureKind::continuous: return "continuous";
    case FeatureKind::categorical: return "categorical";
    case FeatureKind::boolean: return "boolean";
    }
    return "continuous";
}

FeatureKind feature_kind_from_string(std::string_view s)
{
    if (s == "continuous")
        return FeatureKind::continuous;
    if (s == "categorical")
        return FeatureKind::categorical;
    if (s == "boolean")
        return FeatureKind::boolean;
    throw Error(ErrorCode::ParseError, "unknown feature kind '" + std::string(s) + "'");
}

bool TermGraph::has_ci() const
{
    return !bins.empty() && std::all_of(bins.begin(), bins.end(), [](const Bin& b) { return b.has_ci(); });
}

std::uint64_t TermGraph::total_density() const
{
    std::uint64_t total = missing ? missing->density : 0;
    for (const auto& b : bins)
        total += b.density;
    return total;
}

const TermGraph* GamModel::find_term(std::string_view feature) const
{
    for (const auto& t : terms)
        if (t.feature == feature)
            return &t;
    return nullptr;
}

void validate(const TermGraph& graph)
{
    if (graph.bins.empty())
        throw graph_error(graph, "graph has no bins");

    for (std::size_t i = 0; i < graph.bins.size(); ++i) {
        const Bin& b = graph.bins[i];
        if (!std::isfinite(b.score) || !finite_or_absent(b.ci_low) || !finite_or_absent(b.ci_high))
            throw graph_error(graph, "non-finite score in bin " + std::to_string(i));
        if (b.ci_low.has_value() != b.ci_high.has_value())
            throw graph_error(graph, "bin " + std::to_string(i) + " has only one confidence bound");
        if (b.has_ci() && !(*b.ci_low <= b.score && b.score <= *b.ci_high))
            throw graph_error(graph, "bin " + std::to_string(i) + " violates ci_low <= score <= ci_high");
    }

    if (graph.is_interval()) {
        for (std::size_t i = 0; i < graph.bins.size(); ++i) {
            const Bin& b = graph.bins[i];
            if (b.label)
                throw graph_error(graph, "continuous bin " + std::to_string(i) + " carries a label");
            if (!std::isfinite(b.lower) || !std::isfinite(b.upper))
                throw graph_error(graph, "non-finite edge in bin " + std::to_string(i));
            // A single bin may describe a point domain (constant training column).
            const bool point_domain = graph.bins.size() == 1 && b.lower == b.upper;
            if (!(b.lower < b.upper) && !point_domain)
                throw graph_error(graph, "bin " + std::to_string(i) + " has lower >= upper");
            if (i > 0 && graph.bins[i - 1].upper != b.lower)
                throw Error(ErrorCode::NonContiguousBins,
                            "term '" + graph.feature + "': bins " + std::to_string(i - 1) + " and " +
                                std::to_string(i) + " are not contiguous",
                            {{"feature", graph.feature}, {"bin", i}});
        }
    } else {
        std::set<std::string_view> seen;
        for (std::size_t i = 0; i < graph.bins.size(); ++i) {
            const Bin& b = graph.bins[i];
            if (!b.label)
                throw graph_error(graph, "categorical bin " + std::to_string(i) + " has no label");
            if (!seen.insert(*b.label).second)
                throw graph_error(graph, "duplicate label '" + *b.label + "'");
        }
    }

    if (graph.missing) {
        const MissingBin& m = *graph.missing;
        if (!std::isfinite(m.score) || !finite_or_absent(m.ci_low) || !finite_or_absent(m.ci_high))
            throw graph_error(graph, "non-finite missing score");
        if (m.ci_low && m.ci_high && !(*m.ci_low <= m.score && m.score <= *m.ci_high))
            throw graph_error(graph, "missing bin violates ci_low <= score <= ci_high");
    }
}

void validate(const GamModel& model)
{
    if (!std::isfinite(model.intercept))
        throw Error(ErrorCode::InvalidGraph, "non-finite intercept");
    std::set<std::string_view> names;
    for (const auto& t : model.terms) {
        validate(t);
        if (!names.insert(t.feature).second)
            throw Error(ErrorCode::InvalidGraph, "duplicate term '" + t.feature + "'", {{"feature", t.feature}});
        const bool in_schema = std::any_of(model.feature_schema.begin(), model.feature_schema.end(),
                                           [&](const FeatureSpec& f) { return f.name == t.feature; });
        if (!in_schema)
            throw Error(ErrorCode::SchemaMismatch, "term '" + t.feature + "' is not in the feature schema",
                        {{"feature", t.feature}});
    }
}

std::size_t find_bin(const TermGraph& graph, double x, LookupOptions options)
{
    if (!graph.is_interval())
        throw Error(ErrorCode::Precondition, "numeric lookup on non-continuous term '" + graph.feature + "'",
                    {{"feature", graph.feature}});
    if (std::isnan(x))
        throw Error(ErrorCode::NonFinite, "NaN value for '" + graph.feature + "'; use a missing marker",
                    {{"feature", graph.feature}});
    const auto& bins = graph.bins;
    if (x < bins.front().lower || x > bins.back().upper) {
        if (!options.clamp)
            throw Error(ErrorCode::OutOfDomain,
                        "value " + std::to_string(x) + " is outside the domain of '" + graph.feature + "'",
                        {{"feature", graph.feature}, {"value", x}});
        return x < bins.front().lower ? 0 : bins.size() - 1;
    }
    // first bin whose (inclusive) upper edge is >= x
    auto it = std::lower_bound(bins.begin(), bins.end(), x, [](const Bin& b, double v) { return b.upper < v; });
    return static_cast<std::size_t>(it - bins.begin());
}

std::size_t find_label(const TermGraph& graph, std::string_view label)
{
    std::optional<std::size_t> other;
    for (std::size_t i = 0; i < graph.bins.size(); ++i) {
        const auto& l = graph.bins[i].label;
        if (!l)
            continue;
        if (*l == label)
            return i;
        if (*l == kOtherLabel)
            other = i;
    }
    if (other)
        return *other;
    throw Error(ErrorCode::UnknownCategory, "unknown category '" + std::string(label) + "' for '" + graph.feature + "'",
                {{"feature", graph.feature}, {"value", std::string(label)}});
}

double term_contribution(const TermGraph& graph, const FeatureValue& value, LookupOptions options)
{
    if (std::holds_alternative<Missing>(value)) {
        if (!graph.missing)
            throw Error(ErrorCode::OutOfDomain, "missing value but '" + graph.feature + "' has no missing bin",
                        {{"feature", graph.feature}, {"value", nullptr}});
        return graph.missing->score;
    }
    if (const double* x = std::get_if<double>(&value)) {
        if (!graph.is_interval()) {
            // Numeric codes for a categorical term are matched by their text.
            std::string text = std::to_string(*x);
            if (*x == std::floor(*x) && std::abs(*x) < 1e15)
                text = std::to_string(static_cast<long long>(*x));
            return graph.bins[find_label(graph, text)].score;
        }
        return graph.bins[find_bin(graph, *x, options)].score;
    }
    const auto& label = std::get<std::string>(value);
    if (graph.is_interval())
        throw Error(ErrorCode::Precondition, "label '" + label + "' given for continuous term '" + graph.feature + "'",
                    {{"feature", graph.feature}});
    return graph.bins[find_label(graph, label)].score;
}

double predict_logit(const GamModel& model, const Sample& sample, LookupOptions options)
{
    double z = model.intercept;
    for (const auto& term : model.terms) {
        auto it = sample.values.find(term.feature);
        if (it == sample.values.end())
            throw Error(ErrorCode::Precondition, "sample has no value for '" + term.feature + "'",
                        {{"feature", term.feature}});
        z += term_contribution(term, it->second, options);
    }
    return z;
}

double log_odds_to_prob(double z)
{
    if (!std::isfinite(z))
        throw Error(ErrorCode::NonFinite, "log-odds must be finite");
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_prob(const GamModel& model, const Sample& sample, LookupOptions options)
{
    return log_odds_to_prob(predict_logit(model, sample, options));
}

double weighted_mean_score(const TermGraph& graph)
{
    const std::uint64_t total = graph.total_density();
    if (total == 0)
        throw Error(ErrorCode::ZeroDensity, "term '" + graph.feature + "' has no density data",
                    {{"feature", graph.feature}});
    double acc = 0.0;
    for (const auto& b : graph.bins)
        acc += static_cast<double>(b.density) * b.score;
    if (graph.missing)
        acc += static_cast<double>(graph.missing->density) * graph.missing->score;
    return acc / static_cast<double>(total);
}

TermGraph shift_graph(const TermGraph& graph, double offset)
{
    TermGraph out = graph;
    auto shift = [offset](double& v) { v -= offset; };
    for (auto& b : out.bins) {
        shift(b.score);
        if (b.ci_low)
            shift(*b.ci_low);
        if (b.ci_high)
            shift(*b.ci_high);
    }
    if (out.missing) {
        shift(out.missing->score);
        if (out.missing->ci_low)
            shift(*out.missing->ci_low);
        if (out.missing->ci_high)
            shift(*out.missing->ci_high);
    }
    return out;
}

GamModel recenter(const GamModel& model, CenteringPolicy policy)
{
    GamModel out = model;
    for (auto& term : out.terms) {
        double offset = 0.0;
        if (policy == CenteringPolicy::mean_zero) {
            offset = weighted_mean_score(term);
        } else {
            offset = term.bins.front().score;
            for (const auto& b : term.bins)
                offset = std::min(offset, b.score);
            if (term.missing)
                offset = std::min(offset, term.missing->score);
        }
        if (offset == 0.0)
            continue;
        term = shift_graph(term, offset);
        out.intercept += offset;
    }
    return out;
}

double term_importance(const TermGraph& graph)
{
    const std::uint64_t total = graph.total_density();
    if (total == 0)
        throw Error(ErrorCode::ZeroDensity, "term '" + graph.feature + "' has no density data",
                    {{"feature", graph.feature}});
    double acc = 0.0;
    for (const auto& b : graph.bins)
        acc += static_cast<double>(b.density) * std::abs(b.score);
    if (graph.missing)
        acc += static_cast<double>(graph.missing->density) * std::abs(graph.missing->score);
    return acc / static_cast<double>(total);
}

std::vector<FeatureImportance> feature_importance(const GamModel& model)
{
    std::vector<FeatureImportance> out;
    out.reserve(model.terms.size());
    for (const auto& term : model.terms) {
        const double mean = weighted_mean_score(term);
        if (std::abs(mean) > 1e-12)
            out.push_back({term.feature, term_importance(shift_graph(term, mean))});
        else
            out.push_back({term.feature, term_importance(term)});
    }
    std::sort(out.begin(), out.end(), [](const FeatureImportance& a, const FeatureImportance& b) {
        if (a.importance != b.importance)
            return a.importance > b.importance;
        return a.feature < b.feature;
    });
    return out;
}

} // namespace gamtalk
