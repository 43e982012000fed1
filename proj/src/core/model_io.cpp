#include "gamtalk/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace gamtalk {

using json = nlohmann::ordered_json;

namespace {

bool known(std::string_view key, std::initializer_list<std::string_view> keys)
{
    for (auto k : keys)
        if (k == key)
            return true;
    return false;
}

Extras unknown_fields(const json& j, std::initializer_list<std::string_view> keys)
{
    Extras extra = json::object();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known(it.key(), keys))
            extra[it.key()] = it.value();
    return extra.empty() ? Extras{} : extra;
}

void append_extras(json& j, const Extras& extra)
{
    if (!extra.is_object())
        return;
    for (auto it = extra.begin(); it != extra.end(); ++it)
        if (!j.contains(it.key()))
            j[it.key()] = it.value();
}

template <typename T>
T required(const json& j, const char* key, const char* where)
{
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::ParseError, std::string(where) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string(where) + ": field '" + key + "': " + e.what());
    }
}

std::optional<double> optional_number(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    if (!j.at(key).is_number())
        throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

} // namespace

json term_to_json(const TermGraph& term)
{
    json j;
    j["feature"] = term.feature;
    j["kind"] = std::string(to_string(term.kind));
    json bins = json::array();
    for (const auto& b : term.bins) {
        json jb;
        if (b.label) {
            jb["label"] = *b.label;
        } else {
            jb["lower"] = b.lower;
            jb["upper"] = b.upper;
        }
        jb["score"] = b.score;
        if (b.ci_low)
            jb["ci_low"] = *b.ci_low;
        if (b.ci_high)
            jb["ci_high"] = *b.ci_high;
        jb["density"] = b.density;
        append_extras(jb, b.extra);
        bins.push_back(std::move(jb));
    }
    j["bins"] = std::move(bins);
    if (term.missing) {
        json m;
        m["score"] = term.missing->score;
        if (term.missing->ci_low)
            m["ci_low"] = *term.missing->ci_low;
        if (term.missing->ci_high)
            m["ci_high"] = *term.missing->ci_high;
        m["density"] = term.missing->density;
        append_extras(m, term.missing->extra);
        j["missing"] = std::move(m);
    }
    append_extras(j, term.extra);
    return j;
}

TermGraph term_from_json(const json& j)
{
    TermGraph t;
    t.feature = required<std::string>(j, "feature", "term");
    t.kind = feature_kind_from_string(required<std::string>(j, "kind", "term"));
    const json& bins = j.contains("bins") ? j.at("bins") : json();
    if (!bins.is_array())
        throw Error(ErrorCode::ParseError, "term '" + t.feature + "': 'bins' must be an array");
    for (const auto& jb : bins) {
        Bin b;
        if (jb.contains("label")) {
            b.label = required<std::string>(jb, "label", "bin");
        } else {
            b.lower = required<double>(jb, "lower", "bin");
            b.upper = required<double>(jb, "upper", "bin");
        }
        b.score = required<double>(jb, "score", "bin");
        b.ci_low = optional_number(jb, "ci_low");
        b.ci_high = optional_number(jb, "ci_high");
        b.density = jb.contains("density") ? required<std::uint64_t>(jb, "density", "bin") : 0;
        b.extra = unknown_fields(jb, {"label", "lower", "upper", "score", "ci_low", "ci_high", "density"});
        t.bins.push_back(std::move(b));
    }
    if (j.contains("missing") && !j.at("missing").is_null()) {
        const json& jm = j.at("missing");
        MissingBin m;
        m.score = required<double>(jm, "score", "missing");
        m.ci_low = optional_number(jm, "ci_low");
        m.ci_high = optional_number(jm, "ci_high");
        m.density = jm.contains("density") ? required<std::uint64_t>(jm, "density", "missing") : 0;
        m.extra = unknown_fields(jm, {"score", "ci_low", "ci_high", "density"});
        t.missing = std::move(m);
    }
    t.extra = unknown_fields(j, {"feature", "kind", "bins", "missing"});
    validate(t);
    return t;
}

json model_to_json(const GamModel& model)
{
    json j;
    j["intercept"] = model.intercept;
    json outcome;
    outcome["name"] = model.outcome.name;
    outcome["positive_label"] = model.outcome.positive_label;
    append_extras(outcome, model.outcome.extra);
    j["outcome"] = std::move(outcome);
    json schema = json::array();
    for (const auto& f : model.feature_schema)
        schema.push_back({{"name", f.name}, {"kind", std::string(to_string(f.kind))}});
    j["feature_schema"] = std::move(schema);
    j["provenance"] = model.provenance;
    json terms = json::array();
    for (const auto& t : model.terms)
        terms.push_back(term_to_json(t));
    j["terms"] = std::move(terms);
    append_extras(j, model.extra);
    return j;
}

GamModel model_from_json(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::ParseError, "model document must be a JSON object");
    GamModel m;
    m.intercept = required<double>(j, "intercept", "model");
    if (j.contains("outcome")) {
        const json& o = j.at("outcome");
        m.outcome.name = o.value("name", "");
        m.outcome.positive_label = o.value("positive_label", "");
        m.outcome.extra = unknown_fields(o, {"name", "positive_label"});
    }
    if (!j.contains("terms") || !j.at("terms").is_array())
        throw Error(ErrorCode::ParseError, "model: 'terms' must be an array");
    for (const auto& jt : j.at("terms"))
        m.terms.push_back(term_from_json(jt));
    if (j.contains("feature_schema")) {
        for (const auto& f : j.at("feature_schema"))
            m.feature_schema.push_back({required<std::string>(f, "name", "feature_schema"),
                                        feature_kind_from_string(required<std::string>(f, "kind", "feature_schema"))});
    } else {
        for (const auto& t : m.terms)
            m.feature_schema.push_back({t.feature, t.kind});
    }
    m.provenance = j.value("provenance", "");
    m.extra = unknown_fields(j, {"intercept", "outcome", "feature_schema", "provenance", "terms"});
    validate(m);
    return m;
}

std::string dump_model(const GamModel& model)
{
    return model_to_json(model).dump(2) + "\n";
}

GamModel parse_model(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what(), {{"byte", e.byte}});
    }
    return model_from_json(j);
}

GamModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open model file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

void save_model(const GamModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write model file " + path.string());
    out << dump_model(model);
}

} // namespace gamtalk
