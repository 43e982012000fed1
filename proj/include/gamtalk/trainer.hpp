#pragma once

// Explainable-boosting style trainer: one shared binning, cyclic boosting of
// depth-1 per-feature updates under logistic loss, and outer bootstrap bags
// whose spread gives the confidence intervals.

#include <cstdint>
#include <vector>

#include "gamtalk/binning.hpp"
#include "gamtalk/gam.hpp"

namespace gamtalk {

struct TrainConfig {
    std::size_t max_bins = 256;
    double learning_rate = 0.01;
    std::size_t max_rounds = 5000;
    std::size_t early_stop_patience = 50;
    double validation_fraction = 0.15;
    std::size_t outer_bags = 100;
    std::size_t min_samples_per_split = 2;
    std::uint64_t seed = 0;
    /// OpenMP threads for the bag loop; 0 = runtime default.
    int threads = 0;

    /// Throws InvalidConfig.
    void validate() const;
    nlohmann::ordered_json to_json() const;
};

/// Mutable state of one bag's boosting run.
struct BoostState {
    const BinnedDataset* data = nullptr;
    /// Per feature: one score per bin plus a trailing missing slot.
    std::vector<std::vector<double>> scores;
    double intercept = 0.0;
    std::vector<double> margin;
    /// Bootstrap multiplicities; zero for validation rows.
    std::vector<double> weights;
    double learning_rate = 0.01;
    double min_samples_per_split = 2;

    /// Scratch buffers.
    std::vector<double> grad, hess;
};

/// Zero scores, margins at `intercept`.
BoostState init_boost_state(const BinnedDataset& data, std::vector<double> weights, double intercept,
                            double learning_rate, std::size_t min_samples_per_split);

struct RoundStats {
    /// Split gain chosen for each feature in schema order (0 when no split).
    std::vector<double> gains;
};

/// One cyclic pass: for each feature in order, refresh gradients, fit the best
/// single split with Newton leaf values (missing rows get their own leaf),
/// scale by the learning rate, add into the term and update margins.
RoundStats boost_one_round(BoostState& state);

struct BagTrace {
    std::size_t rounds_run = 0;
    std::size_t best_round = 0;
    double best_validation_loss = 0.0;
    /// Weighted training loss after each round (index 0 = before boosting).
    std::vector<double> train_loss;
};

struct FitResult {
    GamModel model;
    std::vector<FeatureBins> bins;
    std::vector<BagTrace> bags;
};

/// Throws EmptyDataset, SingleClassLabels, InvalidConfig.
FitResult fit_detailed(const Dataset& data, const TrainConfig& config);
GamModel fit(const Dataset& data, const TrainConfig& config);

} // namespace gamtalk
