#include "gamtalk/service/service.hpp"

#include <future>
#include <thread>

#include "gamtalk/graph_text.hpp"
#include "gamtalk/model_io.hpp"
#include "gamtalk/oracles.hpp"
#include "gamtalk/tokens.hpp"

namespace gamtalk::service {

using json = nlohmann::ordered_json;

namespace {

Response error_response(int status, const std::string& code, const std::string& message, json details = json::object())
{
    return {status, {{"error", code}, {"message", message}, {"details", std::move(details)}}};
}

Response from_error(const Error& e)
{
    Response r{status_for(e.code()), e.to_json()};
    if (r.status == 503)
        r.body["retriable"] = false;
    return r;
}

bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.substr(0, prefix.size()) == prefix;
}

} // namespace

std::string default_description(const GamModel& model)
{
    std::string features;
    for (const auto& t : model.terms)
        features += (features.empty() ? "" : ", ") + t.feature;
    const std::string outcome = model.outcome.name.empty() ? "the outcome" : model.outcome.name;
    return "This model predicts " + outcome + " from the features " + features + ".";
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Transport:
    case ErrorCode::RateLimited:
    case ErrorCode::MalformedResponse:
    case ErrorCode::MockMiss:
    case ErrorCode::SurpriseParseError:
        return 409;
    case ErrorCode::BudgetExceeded:
    case ErrorCode::BudgetTooSmall:
        return 503;
    case ErrorCode::Io:
        return 500;
    default:
        return 422;
    }
}

Service::Service(GamModel model, std::shared_ptr<llm::Provider> provider, ServiceConfig config, Clock clock)
    : model_(std::move(model)),
      provider_(std::move(provider)),
      config_(std::move(config)),
      sessions_(config_.session_idle, std::move(clock))
{
    validate(model_);
    if (config_.context.description.empty())
        config_.context.description = default_description(model_);
}

Response Service::handle_request(const std::string& method, const std::string& raw_path, const std::string& body)
{
    const std::string path = raw_path.substr(0, raw_path.find('?'));
    try {
        if (path == "/api/model") {
            if (method != "GET")
                return error_response(405, "MethodNotAllowed", "use GET");
            return {200, model_to_json(model_)};
        }
        if (starts_with(path, "/api/terms/")) {
            if (method != "GET")
                return error_response(405, "MethodNotAllowed", "use GET");
            return get_term(path.substr(11));
        }
        if (starts_with(path, "/api/summarize/")) {
            if (method != "POST")
                return error_response(405, "MethodNotAllowed", "use POST");
            return summarize_feature(path.substr(15));
        }
        if (path == "/api/summarize-model") {
            if (method != "POST")
                return error_response(405, "MethodNotAllowed", "use POST");
            return summarize_model();
        }
        if (path == "/api/surprises") {
            if (method != "POST")
                return error_response(405, "MethodNotAllowed", "use POST");
            return surprises();
        }
        if (path == "/api/chat") {
            if (method != "POST")
                return error_response(405, "MethodNotAllowed", "use POST");
            return chat(body);
        }
        return error_response(404, "NotFound", "no route for " + method + " " + path);
    } catch (const Error& e) {
        return from_error(e);
    } catch (const std::exception& e) {
        return error_response(500, "Internal", e.what());
    }
}

Service::~Service()
{
    std::unique_lock lock(inflight_mutex_);
    inflight_cv_.wait(lock, [this] { return inflight_ == 0; });
}

Response Service::handle_with_timeout(const std::string& method, const std::string& path, const std::string& body)
{
    auto task = std::make_shared<std::packaged_task<Response()>>(
        [this, method, path, body] { return handle_request(method, path, body); });
    auto result = task->get_future();
    {
        std::lock_guard lock(inflight_mutex_);
        ++inflight_;
    }
    std::thread([this, task] {
        (*task)();
        std::lock_guard lock(inflight_mutex_);
        --inflight_;
        inflight_cv_.notify_all();
    }).detach();
    if (result.wait_for(config_.request_timeout) == std::future_status::ready)
        return result.get();
    Response r = error_response(503, "Timeout",
                                "request did not finish within " + std::to_string(config_.request_timeout.count()) +
                                    " ms");
    r.body["retriable"] = true;
    return r;
}

Response Service::get_term(const std::string& feature)
{
    const TermGraph* term = model_.find_term(feature);
    if (!term)
        return error_response(404, "NotFound", "no term named '" + feature + "'", {{"feature", feature}});
    const std::string encoded = encode_graph(*term, config_.pipeline.encode);
    json importance = nullptr;
    if (term->total_density() > 0)
        importance = term_importance(shift_graph(*term, weighted_mean_score(*term)));
    return {200,
            {{"feature", term->feature},
             {"term", term_to_json(*term)},
             {"keys", bin_keys(*term, config_.pipeline.encode.sig_digits)},
             {"encoded", encoded},
             {"tokens", estimate_tokens(encoded).tokens},
             {"importance", importance},
             {"oracle_digest", oracle_digest(*term, config_.jump_threshold)}}};
}

Response Service::summarize_feature(const std::string& feature)
{
    const TermGraph* term = model_.find_term(feature);
    if (!term)
        return error_response(404, "NotFound", "no term named '" + feature + "'", {{"feature", feature}});
    if (!provider_)
        return error_response(409, "ProviderUnavailable", "no language model provider is configured");
    std::optional<double> importance;
    if (term->total_density() > 0)
        importance = term_importance(shift_graph(*term, weighted_mean_score(*term)));
    llm::Pipeline pipeline(*provider_, config_.pipeline);
    return {200, to_json(pipeline.summarize_graph(config_.context, *term, importance))};
}

Response Service::summarize_model()
{
    if (!provider_)
        return error_response(409, "ProviderUnavailable", "no language model provider is configured");
    llm::Pipeline pipeline(*provider_, config_.pipeline);
    std::vector<llm::GraphSummary> summaries;
    for (const auto& t : model_.terms)
        summaries.push_back(pipeline.summarize_graph(config_.context, t));
    std::vector<FeatureImportance> importances;
    try {
        importances = feature_importance(model_);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDensity)
            throw;
    }
    const llm::ModelSummary ms = pipeline.summarize_model(config_.context, summaries, importances);
    json per = json::array();
    for (const auto& s : summaries)
        per.push_back(to_json(s));
    json body = to_json(ms);
    body["summaries"] = std::move(per);
    return {200, std::move(body)};
}

Response Service::surprises()
{
    if (!provider_)
        return error_response(409, "ProviderUnavailable", "no language model provider is configured");
    llm::Pipeline pipeline(*provider_, config_.pipeline);
    return {200, to_json(pipeline.find_surprises(config_.context, model_))};
}

Response Service::chat(const std::string& body)
{
    const json req = json::parse(body.empty() ? "{}" : body, nullptr, false);
    if (req.is_discarded() || !req.is_object())
        return error_response(422, "SchemaViolation", "request body must be a JSON object");
    if (!req.contains("message") || !req["message"].is_string() || req["message"].get<std::string>().empty())
        return error_response(422, "SchemaViolation", "'message' must be a non-empty string");
    if (req.contains("session_id") && !req["session_id"].is_string())
        return error_response(422, "SchemaViolation", "'session_id' must be a string");
    if (req.contains("feature") && !req["feature"].is_string())
        return error_response(422, "SchemaViolation", "'feature' must be a string");

    const TermGraph* term = nullptr;
    if (req.contains("feature")) {
        const std::string feature = req["feature"].get<std::string>();
        term = model_.find_term(feature);
        if (!term)
            return error_response(404, "NotFound", "no term named '" + feature + "'", {{"feature", feature}});
    }
    if (!provider_)
        return error_response(409, "ProviderUnavailable", "no language model provider is configured");
    std::string context_text;
    if (term) {
        llm::Pipeline pipeline(*provider_, config_.pipeline);
        context_text = "Graph under discussion:\n" + pipeline.graph_text(*term).text;
    }

    sessions_.sweep();
    const std::string id = req.contains("session_id") ? req["session_id"].get<std::string>() : sessions_.new_id();
    bool created = false;
    auto session = sessions_.acquire(id, created);
    std::lock_guard lock(session->mutex);
    if (created) {
        session->chat.params = config_.pipeline.params;
        session->chat.token_budget = config_.pipeline.token_budget;
    }
    const std::string reply = llm::chat_turn(*provider_, session->chat, config_.context, req["message"].get<std::string>(),
                                             context_text, config_.pipeline.counter);
    return {200,
            {{"session_id", id},
             {"reply", reply},
             {"transcript_length", session->chat.messages.size()},
             {"transcript", llm::to_json(session->chat.messages)},
             {"dropped", session->chat.dropped}}};
}

} // namespace gamtalk::service
