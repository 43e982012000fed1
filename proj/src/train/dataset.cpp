#include "gamtalk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>

namespace gamtalk {

using json = nlohmann::ordered_json;

FeatureValue Column::at(std::size_t row) const
{
    if (missing[row])
        return Missing{};
    if (kind == FeatureKind::continuous)
        return numbers[row];
    return labels[row];
}

std::size_t Column::missing_count() const
{
    return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

Column Column::continuous(std::string name, std::vector<double> values)
{
    Column c;
    c.name = std::move(name);
    c.kind = FeatureKind::continuous;
    c.missing.resize(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isnan(values[i]))
            c.missing[i] = 1;
    c.numbers = std::move(values);
    return c;
}

Column Column::categorical(std::string name, std::vector<std::string> values, FeatureKind kind)
{
    Column c;
    c.name = std::move(name);
    c.kind = kind;
    c.missing.assign(values.size(), 0);
    c.labels = std::move(values);
    return c;
}

const Column* Dataset::find(std::string_view name) const
{
    for (const auto& c : columns)
        if (c.name == name)
            return &c;
    return nullptr;
}

Sample Dataset::sample(std::size_t row) const
{
    Sample s;
    for (const auto& c : columns)
        s.values.emplace(c.name, c.at(row));
    return s;
}

void Dataset::check_shape() const
{
    for (const auto& c : columns) {
        const std::size_t payload = c.kind == FeatureKind::continuous ? c.numbers.size() : c.labels.size();
        if (c.missing.size() != rows() || payload != rows())
            throw Error(ErrorCode::SchemaMismatch,
                        "column '" + c.name + "' has " + std::to_string(payload) + " values for " +
                            std::to_string(rows()) + " labels",
                        {{"column", c.name}});
    }
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// One CSV record (RFC 4180 quoting); false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line)
{
    fields.clear();
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line;
            fields.push_back(std::move(field));
            return true;
        } else {
            field += c;
        }
    }
    if (quoted)
        throw Error(ErrorCode::ParseError, "csv: unterminated quoted field", {{"line", line}});
    if (!any)
        return false;
    fields.push_back(std::move(field));
    return true;
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty())
        return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

bool is_bool_text(const std::string& s)
{
    const auto l = lower(s);
    return l == "true" || l == "false";
}

} // namespace

Dataset read_csv(std::istream& in, const CsvOptions& options)
{
    CsvOptions opt = options;
    std::map<std::string, FeatureKind> kinds;
    if (opt.schema_path) {
        std::ifstream sf(*opt.schema_path);
        if (!sf)
            throw Error(ErrorCode::Io, "cannot open schema file " + opt.schema_path->string());
        json schema;
        try {
            schema = json::parse(sf);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("schema file: ") + e.what());
        }
        if (schema.contains("columns"))
            for (auto it = schema["columns"].begin(); it != schema["columns"].end(); ++it)
                kinds[it.key()] = feature_kind_from_string(it.value().get<std::string>());
        if (schema.contains("label"))
            opt.label_column = schema["label"].get<std::string>();
        if (schema.contains("positive_label"))
            opt.positive_label = schema["positive_label"].get<std::string>();
        if (schema.contains("missing_marker"))
            opt.missing_marker = schema["missing_marker"].get<std::string>();
    }

    std::size_t line = 1;
    std::vector<std::string> header;
    if (!read_record(in, header, line) || (header.size() == 1 && trim(header[0]).empty()))
        throw Error(ErrorCode::EmptyDataset, "csv has no header row");
    for (auto& h : header)
        h = trim(h);

    if (opt.label_column.empty())
        throw Error(ErrorCode::InvalidConfig, "no label column given");
    const auto label_it = std::find(header.begin(), header.end(), opt.label_column);
    if (label_it == header.end())
        throw Error(ErrorCode::SchemaMismatch, "label column '" + opt.label_column + "' not in csv header",
                    {{"label_column", opt.label_column}});
    const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

    std::vector<std::vector<std::string>> cells(header.size());
    std::vector<std::string> record;
    while (read_record(in, record, line)) {
        if (record.size() == 1 && trim(record[0]).empty())
            continue;
        if (record.size() != header.size())
            throw Error(ErrorCode::ParseError,
                        "csv line " + std::to_string(line - 1) + " has " + std::to_string(record.size()) +
                            " fields, header has " + std::to_string(header.size()),
                        {{"line", line - 1}});
        for (std::size_t c = 0; c < header.size(); ++c)
            cells[c].push_back(trim(record[c]));
    }
    const std::size_t n = cells[label_col].size();
    if (n == 0)
        throw Error(ErrorCode::EmptyDataset, "csv has no data rows");

    auto is_missing = [&](const std::string& s) { return s.empty() || (!opt.missing_marker.empty() && s == opt.missing_marker); };

    Dataset data;
    data.label_name = opt.label_column;

    // Outcome.
    std::set<std::string> distinct;
    for (const auto& s : cells[label_col]) {
        if (is_missing(s))
            throw Error(ErrorCode::SchemaMismatch, "missing label value", {{"label_column", opt.label_column}});
        distinct.insert(s);
    }
    std::string positive;
    if (opt.positive_label) {
        positive = *opt.positive_label;
    } else if (distinct.count("1") || distinct.count("0")) {
        positive = "1";
    } else if (std::all_of(distinct.begin(), distinct.end(), is_bool_text)) {
        positive = "true";
    } else {
        positive = *distinct.rbegin();
    }
    if (distinct.size() > 2)
        throw Error(ErrorCode::SchemaMismatch, "label column has more than two values",
                    {{"label_column", opt.label_column}, {"distinct", distinct.size()}});
    data.positive_label = positive;
    data.labels.reserve(n);
    for (const auto& s : cells[label_col])
        data.labels.push_back(s == positive || (positive == "true" && lower(s) == "true") ? 1 : 0);

    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_col)
            continue;
        const auto& col = cells[c];
        FeatureKind kind;
        if (auto k = kinds.find(header[c]); k != kinds.end()) {
            kind = k->second;
        } else {
            bool numeric = true, boolean = true;
            double tmp;
            for (const auto& s : col) {
                if (is_missing(s))
                    continue;
                numeric = numeric && parse_double(s, tmp);
                boolean = boolean && is_bool_text(s);
            }
            kind = numeric ? FeatureKind::continuous : boolean ? FeatureKind::boolean : FeatureKind::categorical;
        }

        Column out;
        out.name = header[c];
        out.kind = kind;
        out.missing.assign(n, 0);
        if (kind == FeatureKind::continuous) {
            out.numbers.assign(n, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                if (is_missing(col[r])) {
                    out.missing[r] = 1;
                } else if (!parse_double(col[r], out.numbers[r])) {
                    throw Error(ErrorCode::SchemaMismatch,
                                "column '" + out.name + "' is continuous but row " + std::to_string(r + 1) +
                                    " holds '" + col[r] + "'",
                                {{"column", out.name}, {"row", r + 1}});
                }
            }
        } else {
            out.labels.assign(n, std::string());
            for (std::size_t r = 0; r < n; ++r) {
                if (is_missing(col[r]))
                    out.missing[r] = 1;
                else
                    out.labels[r] = kind == FeatureKind::boolean ? lower(col[r]) : col[r];
            }
        }
        data.columns.push_back(std::move(out));
    }
    return data;
}

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string(), {{"path", path.string()}});
    return read_csv(in, options);
}

} // namespace gamtalk
