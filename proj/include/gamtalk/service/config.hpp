#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

namespace gamtalk::service {

/// Settings shared by the command line and the service. Each field may come
/// from a flag, a GAMTALK_* environment variable or a JSON config file, in
/// that order of precedence.
struct AppConfig {
    std::optional<std::string> model_path;
    std::optional<std::string> dataset_path;
    std::optional<std::string> label_column;
    std::optional<std::string> provider_base_url;
    std::optional<std::string> model_name;
    std::optional<std::size_t> token_budget;
    std::optional<std::size_t> per_graph_budget;
    std::optional<int> sig_digits;
    std::optional<std::string> listen_address;
    std::optional<std::string> mock_script_path;
    std::optional<std::string> description;
    std::optional<std::string> outcome_direction;
    std::optional<double> request_timeout_s;

    /// Fields set in `over` replace ours.
    void overlay(const AppConfig& over);
    nlohmann::ordered_json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Environment variable for each field: GAMTALK_MODEL, GAMTALK_DATA,
/// GAMTALK_LABEL_COLUMN, GAMTALK_PROVIDER_URL, GAMTALK_MODEL_NAME,
/// GAMTALK_BUDGET, GAMTALK_PER_GRAPH_BUDGET, GAMTALK_SIG_DIGITS,
/// GAMTALK_LISTEN, GAMTALK_MOCK, GAMTALK_DESCRIPTION,
/// GAMTALK_OUTCOME_DIRECTION, GAMTALK_TIMEOUT.
AppConfig config_from_env(const EnvLookup& env);

/// Keys as in to_json(). Throws InvalidConfig on unknown keys or bad types.
AppConfig config_from_json(const nlohmann::ordered_json& j);
AppConfig config_from_file(const std::filesystem::path& path);

/// file < env < flags.
AppConfig resolve_config(const AppConfig& flags, const EnvLookup& env,
                         const std::optional<std::filesystem::path>& file);

enum class ProviderMode { none, live, mock };

/// Throws InvalidConfig when both a provider URL and a mock script are set.
ProviderMode provider_mode(const AppConfig& config);

} // namespace gamtalk::service
