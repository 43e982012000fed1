#pragma once

// Tabular data for training and evaluation: typed feature columns plus a
// binary outcome.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gamtalk/gam.hpp"

namespace gamtalk {

struct Column {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    /// Continuous columns. Entries flagged missing are unspecified.
    std::vector<double> numbers;
    /// Categorical and boolean columns.
    std::vector<std::string> labels;
    std::vector<std::uint8_t> missing;

    std::size_t size() const { return missing.size(); }
    FeatureValue at(std::size_t row) const;
    std::size_t missing_count() const;

    static Column continuous(std::string name, std::vector<double> values);
    static Column categorical(std::string name, std::vector<std::string> values,
                              FeatureKind kind = FeatureKind::categorical);
};

struct Dataset {
    std::vector<Column> columns;
    /// 0/1 outcome per row.
    std::vector<std::uint8_t> labels;
    std::string label_name = "label";
    std::string positive_label = "1";

    std::size_t rows() const { return labels.size(); }
    const Column* find(std::string_view name) const;
    Sample sample(std::size_t row) const;

    /// Throws SchemaMismatch when column lengths disagree with the labels.
    void check_shape() const;
};

struct CsvOptions {
    std::string label_column;
    /// Cells equal to this (after trimming) are missing. Empty cells always are.
    std::string missing_marker;
    /// Optional schema sidecar:
    ///   {"columns": {"name": "continuous" | "categorical" | "boolean"},
    ///    "label": "...", "positive_label": "...", "missing_marker": "..."}
    /// Values given here win over inference and over the fields above.
    std::optional<std::filesystem::path> schema_path;
    std::optional<std::string> positive_label;
};

/// Header row required. A column is continuous when every non-missing cell
/// parses as a number, boolean when every non-missing cell is true/false,
/// categorical otherwise. Label values 0/1 and false/true map directly; any
/// other two-valued label needs positive_label (else the lexicographically
/// larger value is taken as positive and recorded).
Dataset read_csv(std::istream& in, const CsvOptions& options);
Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options);

} // namespace gamtalk
