#pragma once

#include <span>

#include "gamtalk/dataset.hpp"

namespace gamtalk {

struct Metrics {
    double log_loss = 0.0;
    double auc = 0.5;
    double accuracy = 0.0;
    std::size_t n_rows = 0;
};

nlohmann::ordered_json to_json(const Metrics& m);

/// Rank-statistic AUC with average ranks for ties. 0.5 when only one class
/// is present.
double auc_score(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Mean natural-log loss with probabilities clipped to [1e-15, 1 - 1e-15].
double log_loss_score(std::span<const double> probs, std::span<const std::uint8_t> labels);

struct EvaluateOptions {
    /// Clamp out-of-domain numeric values to the edge bins.
    bool clamp = true;
};

/// Throws SchemaMismatch when a model term has no matching column.
Metrics evaluate(const GamModel& model, const Dataset& data, EvaluateOptions options = {});

} // namespace gamtalk
