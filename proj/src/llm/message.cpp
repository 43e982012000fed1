#include "gamtalk/llm/message.hpp"

#include <cstdio>

#include "gamtalk/error.hpp"

namespace gamtalk::llm {

using json = nlohmann::ordered_json;

std::string_view to_string(Role role)
{
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s)
{
    if (s == "system")
        return Role::system;
    if (s == "user")
        return Role::user;
    if (s == "assistant")
        return Role::assistant;
    throw Error(ErrorCode::ParseError, "unknown message role '" + std::string(s) + "'");
}

json to_json(const Message& m)
{
    return {{"role", std::string(to_string(m.role))}, {"content", m.content}};
}

json to_json(const Messages& messages)
{
    json arr = json::array();
    for (const auto& m : messages)
        arr.push_back(to_json(m));
    return arr;
}

Messages messages_from_json(const json& j)
{
    if (!j.is_array())
        throw Error(ErrorCode::ParseError, "messages must be an array");
    Messages out;
    for (const auto& m : j) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") || !m["content"].is_string())
            throw Error(ErrorCode::ParseError, "message needs string 'role' and 'content'");
        out.push_back({role_from_string(m["role"].get<std::string>()), m["content"].get<std::string>()});
    }
    return out;
}

std::size_t estimate_message_tokens(const Messages& messages, const TokenCounter& counter)
{
    const TokenCounter& count = counter ? counter : default_token_counter();
    std::size_t total = 0;
    for (const auto& m : messages)
        total += count(m.content) + kMessageOverheadTokens;
    return total;
}

std::string message_list_hash(const Messages& messages)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& m : messages) {
        feed(to_string(m.role));
        feed("\x1f");
        feed(m.content);
        feed("\x1e");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace gamtalk::llm
