#include "gamtalk/service/config.hpp"

#include <cstdlib>
#include <fstream>

#include "gamtalk/error.hpp"

namespace gamtalk::service {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src)
{
    if (src)
        dst = src;
}

template <typename T>
std::optional<T> convert(const std::string& key, const std::string& text);

template <>
std::optional<std::string> convert<std::string>(const std::string&, const std::string& text)
{
    return text;
}

template <>
std::optional<std::size_t> convert<std::size_t>(const std::string& key, const std::string& text)
{
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || v < 0)
        throw Error(ErrorCode::InvalidConfig, key + " must be a non-negative integer, got '" + text + "'");
    return static_cast<std::size_t>(v);
}

template <>
std::optional<int> convert<int>(const std::string& key, const std::string& text)
{
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0')
        throw Error(ErrorCode::InvalidConfig, key + " must be an integer, got '" + text + "'");
    return static_cast<int>(v);
}

template <>
std::optional<double> convert<double>(const std::string& key, const std::string& text)
{
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0')
        throw Error(ErrorCode::InvalidConfig, key + " must be a number, got '" + text + "'");
    return v;
}

// Field table: config key, env variable, member.
template <typename F>
void for_each_field(AppConfig& c, F&& f)
{
    f("model_path", "GAMTALK_MODEL", c.model_path);
    f("dataset_path", "GAMTALK_DATA", c.dataset_path);
    f("label_column", "GAMTALK_LABEL_COLUMN", c.label_column);
    f("provider_base_url", "GAMTALK_PROVIDER_URL", c.provider_base_url);
    f("model_name", "GAMTALK_MODEL_NAME", c.model_name);
    f("token_budget", "GAMTALK_BUDGET", c.token_budget);
    f("per_graph_budget", "GAMTALK_PER_GRAPH_BUDGET", c.per_graph_budget);
    f("sig_digits", "GAMTALK_SIG_DIGITS", c.sig_digits);
    f("listen_address", "GAMTALK_LISTEN", c.listen_address);
    f("mock_script_path", "GAMTALK_MOCK", c.mock_script_path);
    f("description", "GAMTALK_DESCRIPTION", c.description);
    f("outcome_direction", "GAMTALK_OUTCOME_DIRECTION", c.outcome_direction);
    f("request_timeout_s", "GAMTALK_TIMEOUT", c.request_timeout_s);
}

} // namespace

void AppConfig::overlay(const AppConfig& over)
{
    const AppConfig& src = over;
    take(model_path, src.model_path);
    take(dataset_path, src.dataset_path);
    take(label_column, src.label_column);
    take(provider_base_url, src.provider_base_url);
    take(model_name, src.model_name);
    take(token_budget, src.token_budget);
    take(per_graph_budget, src.per_graph_budget);
    take(sig_digits, src.sig_digits);
    take(listen_address, src.listen_address);
    take(mock_script_path, src.mock_script_path);
    take(description, src.description);
    take(outcome_direction, src.outcome_direction);
    take(request_timeout_s, src.request_timeout_s);
}

json AppConfig::to_json() const
{
    json j = json::object();
    AppConfig copy = *this;
    for_each_field(copy, [&](const char* key, const char*, auto& field) {
        if (field)
            j[key] = *field;
    });
    return j;
}

EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()))
            return std::string(v);
        return std::nullopt;
    };
}

AppConfig config_from_env(const EnvLookup& env)
{
    AppConfig c;
    for_each_field(c, [&](const char*, const char* var, auto& field) {
        using T = typename std::decay_t<decltype(field)>::value_type;
        if (auto v = env(var); v && !v->empty())
            field = convert<T>(var, *v);
    });
    return c;
}

AppConfig config_from_json(const json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidConfig, "config file must hold a JSON object");
    AppConfig c;
    std::size_t known = 0;
    for_each_field(c, [&](const char* key, const char*, auto& field) {
        using T = typename std::decay_t<decltype(field)>::value_type;
        if (!j.contains(key))
            return;
        ++known;
        try {
            field = j.at(key).template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "' has the wrong type");
        }
    });
    if (known != j.size()) {
        AppConfig probe;
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool found = false;
            for_each_field(probe, [&](const char* key, const char*, auto&) { found = found || it.key() == key; });
            if (!found)
                throw Error(ErrorCode::InvalidConfig, "unknown config key '" + it.key() + "'", {{"key", it.key()}});
        }
    }
    return c;
}

AppConfig config_from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open config file " + path.string(), {{"path", path.string()}});
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::InvalidConfig, "config file " + path.string() + " is not valid JSON");
    return config_from_json(j);
}

AppConfig resolve_config(const AppConfig& flags, const EnvLookup& env,
                         const std::optional<std::filesystem::path>& file)
{
    AppConfig out;
    if (file)
        out = config_from_file(*file);
    out.overlay(config_from_env(env));
    out.overlay(flags);
    return out;
}

ProviderMode provider_mode(const AppConfig& config)
{
    if (config.provider_base_url && config.mock_script_path)
        throw Error(ErrorCode::InvalidConfig, "both a provider URL and a mock script are configured; choose one");
    if (config.mock_script_path)
        return ProviderMode::mock;
    if (config.provider_base_url)
        return ProviderMode::live;
    return ProviderMode::none;
}

} // namespace gamtalk::service
