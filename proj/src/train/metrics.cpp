#include "gamtalk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gamtalk {

using json = nlohmann::ordered_json;

json to_json(const Metrics& m)
{
    return {{"log_loss", m.log_loss}, {"auc", m.auc}, {"accuracy", m.accuracy}, {"n_rows", m.n_rows}};
}

double auc_score(std::span<const double> scores, std::span<const std::uint8_t> labels)
{
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    double pos = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]])
            ++j;
        // ranks i+1 .. j share their average
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (labels[idx[k]]) {
                pos_rank_sum += rank;
                pos += 1.0;
            }
        i = j;
    }
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0)
        return 0.5;
    return (pos_rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double log_loss_score(std::span<const double> probs, std::span<const std::uint8_t> labels)
{
    if (probs.empty())
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        acc -= labels[i] ? std::log(p) : std::log(1.0 - p);
    }
    return acc / static_cast<double>(probs.size());
}

Metrics evaluate(const GamModel& model, const Dataset& data, EvaluateOptions options)
{
    data.check_shape();
    for (const auto& term : model.terms) {
        const Column* col = data.find(term.feature);
        if (!col)
            throw Error(ErrorCode::SchemaMismatch, "dataset has no column for model term '" + term.feature + "'",
                        {{"feature", term.feature}});
        if ((col->kind == FeatureKind::continuous) != term.is_interval())
            throw Error(ErrorCode::SchemaMismatch, "column '" + term.feature + "' has the wrong kind",
                        {{"feature", term.feature}});
    }

    const std::size_t n = data.rows();
    std::vector<double> logits(n), probs(n);
    std::size_t correct = 0;
    const LookupOptions lookup{options.clamp};
    for (std::size_t r = 0; r < n; ++r) {
        double z = model.intercept;
        for (const auto& term : model.terms)
            z += term_contribution(term, data.find(term.feature)->at(r), lookup);
        logits[r] = z;
        probs[r] = log_odds_to_prob(z);
        correct += (probs[r] >= 0.5) == (data.labels[r] == 1);
    }

    Metrics m;
    m.n_rows = n;
    m.log_loss = log_loss_score(probs, data.labels);
    m.auc = auc_score(logits, data.labels);
    m.accuracy = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    return m;
}

} // namespace gamtalk
