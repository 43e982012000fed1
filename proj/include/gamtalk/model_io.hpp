#pragma once

// Model interchange file: one JSON document holding the intercept, outcome,
// feature schema and per-term bins. Fields this library does not know about
// are kept in the `extra` members and written back unchanged.

#include <filesystem>
#include <string>

#include "gamtalk/gam.hpp"

namespace gamtalk {

nlohmann::ordered_json term_to_json(const TermGraph& term);
TermGraph term_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json model_to_json(const GamModel& model);
GamModel model_from_json(const nlohmann::ordered_json& j);

/// Pretty-printed interchange text (two-space indent, trailing newline).
std::string dump_model(const GamModel& model);
GamModel parse_model(std::string_view text);

GamModel load_model(const std::filesystem::path& path);
void save_model(const GamModel& model, const std::filesystem::path& path);

} // namespace gamtalk
