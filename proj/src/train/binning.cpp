#include "gamtalk/binning.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gamtalk {

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
        throw Error(ErrorCode::EmptyDataset, "quantile of an empty column");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::vector<double> quantile_cuts(std::vector<double> values, std::size_t max_bins)
{
    std::vector<double> cuts;
    if (values.empty() || max_bins < 2)
        return cuts;
    std::sort(values.begin(), values.end());
    const double lo = values.front(), hi = values.back();
    for (std::size_t k = 1; k < max_bins; ++k) {
        const double q = quantile_sorted(values, static_cast<double>(k) / static_cast<double>(max_bins));
        if (q > lo && q < hi && (cuts.empty() || q > cuts.back()))
            cuts.push_back(q);
    }
    return cuts;
}

std::uint32_t FeatureBins::code(const FeatureValue& v) const
{
    if (std::holds_alternative<Missing>(v))
        return missing_code();
    if (kind == FeatureKind::continuous) {
        const double* x = std::get_if<double>(&v);
        if (!x)
            throw Error(ErrorCode::SchemaMismatch, "label value for continuous feature '" + name + "'");
        return static_cast<std::uint32_t>(std::lower_bound(cuts.begin(), cuts.end(), *x) - cuts.begin());
    }
    const std::string* s = std::get_if<std::string>(&v);
    if (!s)
        throw Error(ErrorCode::SchemaMismatch, "numeric value for categorical feature '" + name + "'");
    const auto it = std::lower_bound(labels.begin(), labels.end(), *s);
    if (it == labels.end() || *it != *s)
        throw Error(ErrorCode::UnknownCategory, "unknown category '" + *s + "' for '" + name + "'",
                    {{"feature", name}, {"value", *s}});
    return static_cast<std::uint32_t>(it - labels.begin());
}

namespace {

FeatureBins learn_bins(const Column& col, std::size_t max_bins)
{
    FeatureBins fb;
    fb.name = col.name;
    fb.kind = col.kind;
    fb.has_missing = col.missing_count() > 0;
    if (col.kind == FeatureKind::continuous) {
        std::vector<double> present;
        present.reserve(col.size());
        for (std::size_t i = 0; i < col.size(); ++i)
            if (!col.missing[i])
                present.push_back(col.numbers[i]);
        if (!present.empty()) {
            const auto [mn, mx] = std::minmax_element(present.begin(), present.end());
            fb.min = *mn;
            fb.max = *mx;
        }
        fb.cuts = quantile_cuts(std::move(present), max_bins);
    } else {
        std::set<std::string> labels;
        for (std::size_t i = 0; i < col.size(); ++i)
            if (!col.missing[i])
                labels.insert(col.labels[i]);
        fb.labels.assign(labels.begin(), labels.end());
        if (fb.labels.empty())
            fb.labels.push_back(std::string(kOtherLabel));
    }
    return fb;
}

} // namespace

BinnedDataset apply_bins(const std::vector<FeatureBins>& bins, const Dataset& data)
{
    data.check_shape();
    BinnedDataset out;
    out.features = bins;
    out.labels = data.labels;
    out.codes.resize(bins.size());
    for (std::size_t f = 0; f < bins.size(); ++f) {
        const Column* col = data.find(bins[f].name);
        if (!col)
            throw Error(ErrorCode::SchemaMismatch, "dataset has no column '" + bins[f].name + "'",
                        {{"feature", bins[f].name}});
        auto& codes = out.codes[f];
        codes.resize(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r)
            codes[r] = bins[f].code(col->at(r));
    }
    return out;
}

BinnedDataset bin_features(const Dataset& data, std::size_t max_bins)
{
    if (data.rows() == 0)
        throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    if (data.columns.empty())
        throw Error(ErrorCode::EmptyDataset, "dataset has no feature columns");
    if (max_bins < 2)
        throw Error(ErrorCode::InvalidConfig, "max_bins must be >= 2");
    data.check_shape();
    std::vector<FeatureBins> bins;
    bins.reserve(data.columns.size());
    for (const auto& col : data.columns)
        bins.push_back(learn_bins(col, max_bins));
    return apply_bins(bins, data);
}

} // namespace gamtalk
