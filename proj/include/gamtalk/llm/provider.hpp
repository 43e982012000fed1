#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gamtalk/llm/message.hpp"

namespace gamtalk::llm {

struct CompletionParams {
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    std::size_t max_response_tokens = 1024;
};

/// Boundary to a chat-completions style model.
class Provider {
public:
    virtual ~Provider() = default;

    /// Checks the preconditions (non-empty, first message is system, no
    /// empty contents) and forwards to do_complete.
    std::string complete(const Messages& messages, const CompletionParams& params);

    virtual std::string name() const = 0;

protected:
    virtual std::string do_complete(const Messages& messages, const CompletionParams& params) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

struct HttpProviderConfig {
    /// e.g. "https://api.openai.com/v1"; "/chat/completions" is appended.
    std::string base_url;
    /// Bearer token. Empty: read LLM_API_KEY from the environment.
    std::string api_key;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{2000};
    std::chrono::seconds timeout{120};
    /// Injectable for tests; defaults to std::this_thread::sleep_for.
    Sleeper sleeper;
};

/// Live provider: one POST per completion, retrying transport errors, 5xx and
/// 429 (honouring Retry-After) with exponential backoff.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderConfig config);

    std::string name() const override { return "http"; }

    /// Attempts made by the most recent call.
    int last_attempts() const { return last_attempts_.load(); }

protected:
    std::string do_complete(const Messages& messages, const CompletionParams& params) override;

private:
    HttpProviderConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::atomic<int> last_attempts_{0};
};

/// Request body of the chat-completions protocol.
nlohmann::ordered_json chat_request_body(const Messages& messages, const CompletionParams& params);

/// choices[0].message.content, or MalformedResponse.
std::string parse_chat_response(std::string_view body);

struct MockRule {
    /// Every substring must occur in the scoped text.
    std::vector<std::string> all;
    /// false: the last user message; true: every message joined.
    bool whole_conversation = false;
    std::string response;
};

/// Scripted responses. File format, either a flat {"<hash>": "text"} object or
///   {"responses": {"<hash>": "text"},
///    "rules": [{"all": ["..."], "scope": "last_user" | "conversation",
///               "response": "..."}],
///    "templates": true}
struct MockScript {
    std::map<std::string, std::string> by_hash;
    std::vector<MockRule> rules;
    bool templates = true;

    static MockScript from_json(const nlohmann::ordered_json& j);
    static MockScript load(const std::filesystem::path& path);
};

/// Deterministic provider. Lookup order: exact message-list hash, then rules
/// in file order, then oracle-backed templates for recognised questions about
/// a graph present in the conversation; otherwise MockMiss.
class MockProvider : public Provider {
public:
    explicit MockProvider(MockScript script);

    std::string name() const override { return "mock"; }

    std::size_t calls() const;

protected:
    std::string do_complete(const Messages& messages, const CompletionParams& params) override;

private:
    MockScript script_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

/// Answer to a recognised question about the graph, if any. Exposed for tests.
std::optional<std::string> template_answer(const Messages& messages);

} // namespace gamtalk::llm
