#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace testsupport {

using namespace gamtalk;

TermGraph random_step_graph(std::uint64_t seed, std::size_t max_bins)
{
    SplitMix64 rng(seed);
    const std::size_t n = 2 + rng.below(max_bins - 1);
    std::vector<double> edges{0.0};
    for (std::size_t i = 0; i < n; ++i)
        edges.push_back(edges.back() + 0.5 + 2.0 * rng.uniform());
    TermGraph g;
    g.feature = "g" + std::to_string(seed);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.2)
            s += (rng.uniform() - 0.5) * 2.0;
        else
            s += (rng.uniform() - 0.5) * 0.2;
        Bin b;
        b.lower = edges[i];
        b.upper = edges[i + 1];
        b.score = s;
        b.density = 1 + rng.below(100);
        g.bins.push_back(b);
    }
    return g;
}

TermGraph random_term(SplitMix64& rng, const std::string& feature)
{
    TermGraph g;
    g.feature = feature;
    const std::uint64_t kind = rng.below(5);
    const bool with_ci = rng.below(2) == 0;
    auto fill = [&](Bin& b) {
        b.score = (rng.uniform() - 0.5) * 4.0;
        b.density = rng.below(50);
        if (with_ci) {
            const double w = rng.uniform();
            b.ci_low = b.score - w;
            b.ci_high = b.score + w;
        }
    };
    if (kind == 0) {
        g.kind = FeatureKind::categorical;
        const std::size_t n = 1 + rng.below(6);
        for (std::size_t i = 0; i < n; ++i) {
            Bin b;
            b.label = "c" + std::to_string(i);
            fill(b);
            g.bins.push_back(b);
        }
        if (rng.below(2) == 0) {
            Bin b;
            b.label = std::string(kOtherLabel);
            fill(b);
            g.bins.push_back(b);
        }
    } else if (kind == 1) {
        g.kind = FeatureKind::boolean;
        for (const char* label : {"false", "true"}) {
            Bin b;
            b.label = label;
            fill(b);
            g.bins.push_back(b);
        }
    } else {
        g.kind = FeatureKind::continuous;
        const std::size_t n = 1 + rng.below(20);
        double edge = (rng.uniform() - 0.5) * 100.0;
        for (std::size_t i = 0; i < n; ++i) {
            Bin b;
            b.lower = edge;
            edge += 0.01 + rng.uniform() * 10.0;
            b.upper = edge;
            fill(b);
            g.bins.push_back(b);
        }
    }
    if (rng.below(3) == 0) {
        MissingBin m;
        m.score = (rng.uniform() - 0.5) * 4.0;
        m.density = rng.below(50);
        if (with_ci) {
            m.ci_low = m.score - 0.1;
            m.ci_high = m.score + 0.1;
        }
        g.missing = m;
    }
    // Centering needs some density somewhere.
    if (g.total_density() == 0)
        g.bins.front().density = 1;
    return g;
}

GamModel random_model(SplitMix64& rng, std::size_t terms)
{
    GamModel m;
    m.intercept = (rng.uniform() - 0.5) * 6.0;
    m.outcome.name = "outcome";
    m.outcome.positive_label = "1";
    for (std::size_t i = 0; i < terms; ++i) {
        m.terms.push_back(random_term(rng, "f" + std::to_string(i)));
        m.feature_schema.push_back({m.terms.back().feature, m.terms.back().kind});
    }
    return m;
}

Sample random_sample(const GamModel& model, SplitMix64& rng)
{
    Sample s;
    for (const auto& t : model.terms) {
        if (t.missing && rng.below(5) == 0) {
            s.values[t.feature] = Missing{};
            continue;
        }
        if (t.is_interval()) {
            const double lo = t.domain_min(), hi = t.domain_max();
            s.values[t.feature] = lo + (hi - lo) * rng.uniform();
        } else {
            s.values[t.feature] = *t.bins[rng.below(t.bins.size())].label;
        }
    }
    return s;
}

double brute_logit(const GamModel& m, const Sample& s)
{
    double z = m.intercept;
    for (const auto& t : m.terms) {
        const FeatureValue& v = s.values.at(t.feature);
        if (std::holds_alternative<Missing>(v)) {
            z += t.missing->score;
        } else if (const auto* x = std::get_if<double>(&v)) {
            for (std::size_t i = 0; i < t.bins.size(); ++i)
                if ((i == 0 && *x >= t.bins[i].lower && *x <= t.bins[i].upper) ||
                    (*x > t.bins[i].lower && *x <= t.bins[i].upper)) {
                    z += t.bins[i].score;
                    break;
                }
        } else {
            for (const auto& b : t.bins)
                if (*b.label == std::get<std::string>(v))
                    z += b.score;
        }
    }
    return z;
}

double synthetic_shape(std::size_t index, double x)
{
    constexpr double pi = 3.14159265358979323846;
    switch (index) {
    case 0:
        return 3.0 * (x - 0.5);
    case 1:
        return std::sin(2.0 * pi * x);
    case 2:
        return 6.0 * (x - 0.5) * (x - 0.5) - 0.5;
    case 3:
        return x > 0.5 ? 1.2 : -1.2;
    default:
        return 2.0 * x * x - 2.0 / 3.0;
    }
}

Dataset synthetic_dataset(std::uint64_t seed, std::size_t n)
{
    SplitMix64 rng(seed);
    std::vector<std::vector<double>> cols(5, std::vector<double>(n));
    Dataset d;
    d.labels.resize(n);
    d.label_name = "y";
    d.positive_label = "1";
    for (std::size_t i = 0; i < n; ++i) {
        double z = kSyntheticBias;
        for (std::size_t j = 0; j < 5; ++j) {
            cols[j][i] = rng.uniform();
            z += synthetic_shape(j, cols[j][i]);
        }
        const double p = 1.0 / (1.0 + std::exp(-z));
        d.labels[i] = rng.uniform() < p ? 1 : 0;
    }
    for (std::size_t j = 0; j < 5; ++j)
        d.columns.push_back(Column::continuous("x" + std::to_string(j + 1), cols[j]));
    return d;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto ra = average_ranks(a), rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0 || sbb == 0)
        return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace testsupport
