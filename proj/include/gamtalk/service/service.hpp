#pragma once

// JSON API behind the web UI. handle_request is a pure dispatcher over
// (method, path, body) so it can be exercised without a socket; server.cpp
// binds it to HTTP.

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "gamtalk/gam.hpp"
#include "gamtalk/llm/pipeline.hpp"

namespace gamtalk::service {

using Clock = std::function<std::chrono::steady_clock::time_point()>;

struct Session {
    std::mutex mutex;
    llm::ChatSession chat;
    std::chrono::steady_clock::time_point last_used;
};

/// In-memory chat sessions with idle expiry.
class SessionStore {
public:
    explicit SessionStore(std::chrono::minutes idle = std::chrono::minutes(30), Clock clock = {});

    /// Existing live session or a fresh one; `created` tells which.
    std::shared_ptr<Session> acquire(const std::string& id, bool& created);
    std::size_t size();
    /// Drop sessions idle for longer than the limit.
    void sweep();
    std::string new_id();

private:
    std::chrono::minutes idle_;
    Clock clock_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
};

struct ServiceConfig {
    llm::PipelineConfig pipeline;
    llm::DatasetContext context;
    std::chrono::milliseconds request_timeout{60000};
    double jump_threshold = 0.1;
    std::chrono::minutes session_idle{30};
};

struct Response {
    int status = 200;
    nlohmann::ordered_json body;
};

class Service {
public:
    /// `provider` may be null: routes that need a language model then
    /// answer 409.
    Service(GamModel model, std::shared_ptr<llm::Provider> provider, ServiceConfig config, Clock clock = {});
    /// Waits for requests that outlived their timeout.
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    Response handle_request(const std::string& method, const std::string& path, const std::string& body);

    /// handle_request bounded by the configured timeout; on expiry answers
    /// 503 with "retriable": true while the work finishes in the background.
    Response handle_with_timeout(const std::string& method, const std::string& path, const std::string& body);

    SessionStore& sessions() { return sessions_; }
    const GamModel& model() const { return model_; }

private:
    Response get_term(const std::string& feature);
    Response summarize_feature(const std::string& feature);
    Response summarize_model();
    Response surprises();
    Response chat(const std::string& body);

    GamModel model_;
    std::shared_ptr<llm::Provider> provider_;
    ServiceConfig config_;
    SessionStore sessions_;
    std::mutex inflight_mutex_;
    std::condition_variable inflight_cv_;
    std::size_t inflight_ = 0;
};

/// "This model predicts <outcome> from the features a, b, c."
std::string default_description(const GamModel& model);

/// HTTP status for a library error code.
int status_for(ErrorCode code);

/// HTTP binding of a Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Port 0 picks a free port. Returns the bound port; throws Io.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void wait_until_ready();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Blocks serving on host:port until the process is stopped.
void serve(Service& service, const std::string& host, int port);

} // namespace gamtalk::service
