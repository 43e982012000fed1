#include "gamtalk/llm/provider.hpp"

#include "gamtalk/error.hpp"

namespace gamtalk::llm {

using json = nlohmann::ordered_json;

std::string Provider::complete(const Messages& messages, const CompletionParams& params)
{
    if (messages.empty())
        throw Error(ErrorCode::Precondition, "completion request has no messages");
    if (messages.front().role != Role::system)
        throw Error(ErrorCode::Precondition, "first message of a completion request must be the system message");
    for (std::size_t i = 0; i < messages.size(); ++i)
        if (messages[i].content.empty())
            throw Error(ErrorCode::Precondition, "message " + std::to_string(i) + " is empty", {{"index", i}});
    return do_complete(messages, params);
}

json chat_request_body(const Messages& messages, const CompletionParams& params)
{
    return {{"model", params.model_name},
            {"messages", to_json(messages)},
            {"temperature", params.temperature},
            {"max_tokens", params.max_response_tokens}};
}

std::string parse_chat_response(std::string_view body)
{
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::MalformedResponse, "provider response is not JSON",
                    {{"body", std::string(body.substr(0, 2000))}});
    try {
        const json& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw Error(ErrorCode::MalformedResponse, "choices[0].message.content is not a string");
        return content.get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::MalformedResponse, "provider response has no choices[0].message.content",
                    {{"body", std::string(body.substr(0, 2000))}});
    }
}

} // namespace gamtalk::llm
