#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "gamtalk/error.hpp"
#include "gamtalk/llm/provider.hpp"

namespace gamtalk::llm {

namespace {

std::optional<std::chrono::milliseconds> retry_after(const httplib::Result& res)
{
    if (!res || !res->has_header("Retry-After"))
        return std::nullopt;
    const std::string v = res->get_header_value("Retry-After");
    char* end = nullptr;
    const double secs = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || secs < 0.0)
        return std::nullopt;
    return std::chrono::milliseconds(static_cast<long long>(secs * 1000.0));
}

} // namespace

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config))
{
    if (config_.base_url.empty())
        throw Error(ErrorCode::InvalidConfig, "live provider needs a base URL");
    const auto scheme = config_.base_url.find("://");
    if (scheme == std::string::npos)
        throw Error(ErrorCode::InvalidConfig, "provider URL '" + config_.base_url + "' has no scheme");
    const auto slash = config_.base_url.find('/', scheme + 3);
    scheme_host_port_ = config_.base_url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : config_.base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();
    path_ = prefix + "/chat/completions";

    if (config_.api_key.empty())
        if (const char* key = std::getenv("LLM_API_KEY"))
            config_.api_key = key;
    if (!config_.sleeper)
        config_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpProvider::do_complete(const Messages& messages, const CompletionParams& params)
{
    const std::string body = chat_request_body(messages, params).dump();
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    for (int attempt = 0;; ++attempt) {
        last_attempts_ = attempt + 1;
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        auto res = client.Post(path_, headers, body, "application/json");

        std::chrono::milliseconds wait = config_.backoff_base * (1LL << attempt);
        if (!res) {
            if (attempt >= config_.max_retries)
                throw Error(ErrorCode::Transport, "request to " + scheme_host_port_ + path_ + " failed: " +
                                                      httplib::to_string(res.error()),
                            {{"retries", attempt}});
        } else if (res->status == 429) {
            if (attempt >= config_.max_retries)
                throw Error(ErrorCode::RateLimited, "provider rate limit persisted after retries",
                            {{"retries", attempt}});
            if (auto ra = retry_after(res))
                wait = *ra;
        } else if (res->status >= 500) {
            if (attempt >= config_.max_retries)
                throw Error(ErrorCode::Transport, "provider returned HTTP " + std::to_string(res->status),
                            {{"retries", attempt}, {"status", res->status}});
        } else if (res->status != 200) {
            throw Error(ErrorCode::Transport, "provider returned HTTP " + std::to_string(res->status),
                        {{"retries", attempt}, {"status", res->status}, {"body", res->body.substr(0, 2000)}});
        } else {
            return parse_chat_response(res->body);
        }
        config_.sleeper(wait);
    }
}

} // namespace gamtalk::llm
