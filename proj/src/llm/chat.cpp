#include "gamtalk/error.hpp"
#include "gamtalk/llm/pipeline.hpp"

namespace gamtalk::llm {

std::string chat_turn(Provider& provider, ChatSession& session, const DatasetContext& context,
                      std::string_view user_text, std::string_view context_text, const TokenCounter& counter)
{
    if (user_text.empty())
        throw Error(ErrorCode::Precondition, "chat message is empty");
    const TokenCounter count = counter ? counter : default_token_counter();

    std::string system = system_prompt(context);
    if (!context_text.empty()) {
        system += "\n\n";
        system += context_text;
    }
    auto& msgs = session.messages;
    if (msgs.empty())
        msgs.push_back({Role::system, system});
    else
        msgs.front() = {Role::system, system};

    msgs.push_back({Role::user, std::string(user_text)});
    while (estimate_message_tokens(msgs, count) > session.token_budget && msgs.size() > 2) {
        const std::string first = msgs[1].content.substr(0, 60);
        const bool pair = msgs.size() > 3 && msgs[2].role == Role::assistant;
        msgs.erase(msgs.begin() + 1, msgs.begin() + (pair ? 3 : 2));
        session.dropped.push_back("dropped turn: " + first);
    }
    const std::size_t tokens = estimate_message_tokens(msgs, count);
    if (tokens > session.token_budget) {
        msgs.pop_back();
        throw Error(ErrorCode::BudgetExceeded, "chat context and message exceed the token budget",
                    {{"tokens", tokens}, {"budget", session.token_budget}});
    }

    std::string reply;
    try {
        reply = provider.complete(msgs, session.params);
    } catch (const Error& e) {
        nlohmann::ordered_json details = e.details().is_object() ? e.details() : nlohmann::ordered_json::object();
        details["transcript"] = to_json(msgs);
        msgs.pop_back();
        throw Error(e.code(), e.what(), std::move(details));
    }
    msgs.push_back({Role::assistant, reply});
    // Keep the stored session within budget too; the newest pair always stays.
    while (estimate_message_tokens(msgs, count) > session.token_budget && msgs.size() > 3) {
        session.dropped.push_back("dropped turn: " + msgs[1].content.substr(0, 60));
        msgs.erase(msgs.begin() + 1, msgs.begin() + 3);
    }
    return reply;
}

} // namespace gamtalk::llm
