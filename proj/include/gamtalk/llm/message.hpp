#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gamtalk/tokens.hpp"

namespace gamtalk::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct Message {
    Role role = Role::user;
    std::string content;

    bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;

nlohmann::ordered_json to_json(const Message& m);
nlohmann::ordered_json to_json(const Messages& messages);
Messages messages_from_json(const nlohmann::ordered_json& j);

/// Fixed per-message cost added on top of the content (role and framing).
inline constexpr std::size_t kMessageOverheadTokens = 4;

/// Sum over messages of counter(content) + kMessageOverheadTokens.
std::size_t estimate_message_tokens(const Messages& messages, const TokenCounter& counter = {});

/// Stable 16-hex-digit FNV-1a 64 hash of the roles and contents, used as the
/// key of scripted mock responses.
std::string message_list_hash(const Messages& messages);

} // namespace gamtalk::llm
