#pragma once

// Discretization shared by every bag of a fit: quantile cut points for
// continuous features, one bin per label for categorical ones, and a separate
// code for missing values.

#include <cstdint>
#include <string>
#include <vector>

#include "gamtalk/dataset.hpp"

namespace gamtalk {

struct FeatureBins {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    /// Continuous: interior cut points, strictly increasing, each strictly
    /// between min and max. Bin i is (cuts[i-1], cuts[i]].
    std::vector<double> cuts;
    double min = 0.0;
    double max = 0.0;
    /// Categorical/boolean: sorted labels, one bin each.
    std::vector<std::string> labels;
    bool has_missing = false;

    std::size_t bin_count() const { return kind == FeatureKind::continuous ? cuts.size() + 1 : labels.size(); }
    /// Code reserved for missing values.
    std::uint32_t missing_code() const { return static_cast<std::uint32_t>(bin_count()); }

    std::uint32_t code(const FeatureValue& v) const;
};

struct BinnedDataset {
    std::vector<FeatureBins> features;
    /// codes[f][row] in [0, bin_count] (bin_count = missing).
    std::vector<std::vector<std::uint32_t>> codes;
    std::vector<std::uint8_t> labels;

    std::size_t rows() const { return labels.size(); }
};

/// Linear-interpolated quantile of sorted data (numpy's default method).
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Cut points at quantiles k / max_bins, k = 1..max_bins-1, duplicates and
/// values equal to the column min or max dropped.
std::vector<double> quantile_cuts(std::vector<double> values, std::size_t max_bins);

/// Throws EmptyDataset when there are no rows or no feature columns.
BinnedDataset bin_features(const Dataset& data, std::size_t max_bins);

/// Apply existing bins to new data (e.g. a test split).
BinnedDataset apply_bins(const std::vector<FeatureBins>& bins, const Dataset& data);

} // namespace gamtalk
