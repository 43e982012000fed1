#include "gamtalk/simplify.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gamtalk {

namespace {

// Running sums for a run of adjacent original bins.
struct Segment {
    std::size_t first = 0;
    std::size_t last = 0;
    double weight = 0.0;
    double wsum = 0.0;
    double count = 0.0;
    double ssum = 0.0;
    bool has_ci = true;
    double wlo = 0.0, whi = 0.0, slo = 0.0, shi = 0.0;
    std::uint64_t density = 0;

    double mean() const { return weight > 0.0 ? wsum / weight : ssum / count; }
};

bool unit_weights(const TermGraph& g)
{
    std::uint64_t total = 0;
    for (const auto& b : g.bins)
        total += b.density;
    return total == 0;
}

std::vector<Segment> segments_of(const TermGraph& g)
{
    const bool unit = unit_weights(g);
    std::vector<Segment> segs;
    segs.reserve(g.bins.size());
    for (std::size_t i = 0; i < g.bins.size(); ++i) {
        const Bin& b = g.bins[i];
        Segment s;
        s.first = s.last = i;
        s.weight = unit ? 1.0 : static_cast<double>(b.density);
        s.wsum = s.weight * b.score;
        s.count = 1.0;
        s.ssum = b.score;
        s.has_ci = b.has_ci();
        if (s.has_ci) {
            s.wlo = s.weight * *b.ci_low;
            s.whi = s.weight * *b.ci_high;
            s.slo = *b.ci_low;
            s.shi = *b.ci_high;
        }
        s.density = b.density;
        segs.push_back(s);
    }
    return segs;
}

Segment merge(const Segment& a, const Segment& b)
{
    Segment m;
    m.first = a.first;
    m.last = b.last;
    m.weight = a.weight + b.weight;
    m.wsum = a.wsum + b.wsum;
    m.count = a.count + b.count;
    m.ssum = a.ssum + b.ssum;
    m.has_ci = a.has_ci && b.has_ci;
    if (m.has_ci) {
        m.wlo = a.wlo + b.wlo;
        m.whi = a.whi + b.whi;
        m.slo = a.slo + b.slo;
        m.shi = a.shi + b.shi;
    }
    m.density = a.density + b.density;
    return m;
}

// Weighted squared-error increase of merging two runs (Ward criterion).
double merge_cost(const Segment& a, const Segment& b)
{
    const double w = a.weight + b.weight;
    if (a.weight <= 0.0 || b.weight <= 0.0)
        return 0.0;
    const double d = a.mean() - b.mean();
    return (a.weight * b.weight / w) * (d * d);
}

TermGraph build(const TermGraph& original, const std::vector<Segment>& segs)
{
    TermGraph out;
    out.feature = original.feature;
    out.kind = original.kind;
    out.missing = original.missing;
    out.extra = original.extra;
    out.bins.reserve(segs.size());
    for (const auto& s : segs) {
        Bin b;
        b.lower = original.bins[s.first].lower;
        b.upper = original.bins[s.last].upper;
        b.score = s.mean();
        b.density = s.density;
        if (s.first == s.last) {
            b = original.bins[s.first];
        } else if (s.has_ci) {
            double lo = s.weight > 0.0 ? s.wlo / s.weight : s.slo / s.count;
            double hi = s.weight > 0.0 ? s.whi / s.weight : s.shi / s.count;
            // averaging can drift by an ulp past the mean
            b.ci_low = std::min(lo, b.score);
            b.ci_high = std::max(hi, b.score);
        }
        out.bins.push_back(std::move(b));
    }
    return out;
}

void require_interval(const TermGraph& g, const char* what)
{
    if (!g.is_interval())
        throw Error(ErrorCode::InvalidGraph,
                    std::string(what) + ": term '" + g.feature + "' is categorical; only interval bins can be merged",
                    {{"feature", g.feature}});
}

// Fenwick tree over alive slots, to turn slot ids into current positions.
class AliveIndex {
public:
    explicit AliveIndex(std::size_t n) : tree_(n + 1, 0)
    {
        for (std::size_t i = 0; i < n; ++i)
            add(i, 1);
    }
    void add(std::size_t i, int v)
    {
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1))
            tree_[k] += v;
    }
    std::size_t position(std::size_t i) const
    {
        int s = 0;
        for (std::size_t k = i; k > 0; k -= k & (~k + 1))
            s += tree_[k];
        return static_cast<std::size_t>(s);
    }

private:
    std::vector<int> tree_;
};

} // namespace

nlohmann::ordered_json to_json(const SimplifyReport& report)
{
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    for (const auto& m : report.merges)
        merges.push_back({m.left, m.right});
    return {{"original_bins", report.original_bins},
            {"final_bins", report.final_bins},
            {"original_tokens", report.original_tokens},
            {"final_tokens", report.final_tokens},
            {"distortion_l2", report.distortion_l2},
            {"merges", std::move(merges)},
            {"ci_note", "merged confidence bounds are density-weighted means of the merged bounds, not pooled intervals"}};
}

TermGraph artifact_prepass(const TermGraph& graph, double tol)
{
    if (!(tol >= 0.0))
        throw Error(ErrorCode::Precondition, "artifact tolerance must be >= 0");
    validate(graph);
    if (!graph.is_interval() || tol == 0.0)
        return graph;

    auto segs = segments_of(graph);
    std::size_t i = 0;
    while (i + 1 < segs.size()) {
        if (std::abs(segs[i].mean() - segs[i + 1].mean()) < tol) {
            segs[i] = merge(segs[i], segs[i + 1]);
            segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            // the merged value may now qualify with its left neighbour
            if (i > 0)
                --i;
        } else {
            ++i;
        }
    }
    return build(graph, segs);
}

std::vector<MergeStep> greedy_merge_sequence(const TermGraph& graph)
{
    validate(graph);
    require_interval(graph, "greedy_merge_sequence");

    auto segs = segments_of(graph);
    const std::size_t n = segs.size();
    std::vector<std::size_t> next(n), prev(n);
    std::vector<unsigned> version(n, 0);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = i + 1;
        prev[i] = i == 0 ? n : i - 1;
    }

    struct Candidate {
        double cost;
        std::size_t left;
        std::size_t right;
        unsigned left_version;
        unsigned right_version;
    };
    auto worse = [](const Candidate& a, const Candidate& b) {
        if (a.cost != b.cost)
            return a.cost > b.cost;
        return a.left > b.left;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
    for (std::size_t i = 0; i + 1 < n; ++i)
        heap.push({merge_cost(segs[i], segs[i + 1]), i, i + 1, 0, 0});

    AliveIndex positions(n);
    std::vector<MergeStep> steps;
    steps.reserve(n > 0 ? n - 1 : 0);
    while (!heap.empty()) {
        const Candidate c = heap.top();
        heap.pop();
        if (!alive[c.left] || !alive[c.right] || version[c.left] != c.left_version ||
            version[c.right] != c.right_version || next[c.left] != c.right)
            continue;

        const std::size_t pos = positions.position(c.left);
        steps.push_back({pos, pos + 1, c.cost});

        segs[c.left] = merge(segs[c.left], segs[c.right]);
        ++version[c.left];
        alive[c.right] = false;
        positions.add(c.right, -1);
        next[c.left] = next[c.right];
        if (next[c.left] < n)
            prev[next[c.left]] = c.left;

        if (prev[c.left] < n) {
            const std::size_t p = prev[c.left];
            heap.push({merge_cost(segs[p], segs[c.left]), p, c.left, version[p], version[c.left]});
        }
        if (next[c.left] < n) {
            const std::size_t q = next[c.left];
            heap.push({merge_cost(segs[c.left], segs[q]), c.left, q, version[c.left], version[q]});
        }
    }
    return steps;
}

TermGraph apply_merges(const TermGraph& graph, const std::vector<MergeStep>& merges)
{
    validate(graph);
    if (merges.empty())
        return graph;
    require_interval(graph, "apply_merges");
    auto segs = segments_of(graph);
    for (const auto& m : merges) {
        if (m.right != m.left + 1 || m.right >= segs.size())
            throw Error(ErrorCode::Precondition, "merge step does not name adjacent bins");
        segs[m.left] = merge(segs[m.left], segs[m.right]);
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(m.right));
    }
    return build(graph, segs);
}

TermGraph coarsen_greedy(const TermGraph& graph, std::size_t bins)
{
    if (bins == 0)
        throw Error(ErrorCode::Precondition, "target bin count must be >= 1");
    if (graph.bins.size() <= bins)
        return graph;
    auto seq = greedy_merge_sequence(graph);
    seq.resize(graph.bins.size() - bins);
    return apply_merges(graph, seq);
}

std::pair<TermGraph, SimplifyReport> simplify_to_budget(const TermGraph& graph, std::size_t budget,
                                                        const SimplifyOptions& options)
{
    const TokenCounter counter = options.counter ? options.counter : default_token_counter();
    auto tokens_of = [&](const TermGraph& g) { return counter(encode_graph(g, options.encode)); };

    SimplifyReport report;
    report.original_bins = graph.bins.size();
    report.original_tokens = tokens_of(graph);
    if (report.original_tokens <= budget) {
        report.final_bins = report.original_bins;
        report.final_tokens = report.original_tokens;
        return {graph, report};
    }
    if (!graph.is_interval())
        throw Error(ErrorCode::BudgetTooSmall,
                    "categorical term '" + graph.feature + "' needs " + std::to_string(report.original_tokens) +
                        " tokens and cannot be merged to fit " + std::to_string(budget),
                    {{"feature", graph.feature}, {"budget", budget}, {"tokens", report.original_tokens}});

    const auto sequence = greedy_merge_sequence(graph);
    const std::size_t single_bin_tokens = tokens_of(apply_merges(graph, sequence));
    if (single_bin_tokens > budget)
        throw Error(ErrorCode::BudgetTooSmall,
                    "term '" + graph.feature + "' needs " + std::to_string(single_bin_tokens) +
                        " tokens even as a single bin; budget is " + std::to_string(budget),
                    {{"feature", graph.feature}, {"budget", budget}, {"tokens", single_bin_tokens}});

    auto segs = segments_of(graph);
    TermGraph current = graph;
    std::size_t tokens = report.original_tokens;
    for (const auto& m : sequence) {
        segs[m.left] = merge(segs[m.left], segs[m.right]);
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(m.right));
        report.merges.push_back(m);
        current = build(graph, segs);
        tokens = tokens_of(current);
        if (tokens <= budget)
            break;
    }
    report.final_bins = current.bins.size();
    report.final_tokens = tokens;
    report.distortion_l2 = distortion(graph, current);
    return {std::move(current), report};
}

double distortion(const TermGraph& original, const TermGraph& simplified)
{
    validate(original);
    validate(simplified);
    auto not_coarsening = [&](const std::string& why) {
        return Error(ErrorCode::NotACoarsening, "'" + original.feature + "': " + why, {{"feature", original.feature}});
    };
    if (original.kind != simplified.kind)
        throw not_coarsening("feature kinds differ");

    const bool unit = unit_weights(original);
    double acc = 0.0;
    double total = 0.0;
    auto add = [&](double weight, double diff) {
        acc += weight * diff * diff;
        total += weight;
    };

    if (original.is_interval()) {
        if (original.domain_min() != simplified.domain_min() || original.domain_max() != simplified.domain_max())
            throw not_coarsening("domains differ");
        std::size_t j = 0;
        for (const auto& b : original.bins) {
            while (j < simplified.bins.size() && simplified.bins[j].upper < b.upper)
                ++j;
            if (j == simplified.bins.size() || b.lower < simplified.bins[j].lower)
                throw not_coarsening("an original bin straddles a simplified edge");
            add(unit ? 1.0 : static_cast<double>(b.density), b.score - simplified.bins[j].score);
        }
    } else {
        if (original.bins.size() != simplified.bins.size())
            throw not_coarsening("categorical bins cannot be merged");
        for (const auto& b : original.bins) {
            const std::size_t k = find_label(simplified, *b.label);
            if (simplified.bins[k].label != b.label)
                throw not_coarsening("label '" + *b.label + "' missing from simplified graph");
            add(unit ? 1.0 : static_cast<double>(b.density), b.score - simplified.bins[k].score);
        }
    }
    if (original.missing) {
        if (!simplified.missing)
            throw not_coarsening("simplified graph dropped the missing bin");
        add(unit ? 1.0 : static_cast<double>(original.missing->density), original.missing->score - simplified.missing->score);
    }
    return total > 0.0 ? std::sqrt(acc / total) : 0.0;
}

} // namespace gamtalk
