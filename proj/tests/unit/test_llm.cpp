#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "generators.hpp"
#include "httplib.h"

#include "gamtalk/llm/pipeline.hpp"

using namespace gamtalk;
using namespace gamtalk::llm;

namespace {

MockScript pneumonia_script()
{
    return MockScript::load(testsupport::fixture_path("pneumonia_mock.json"));
}

std::size_t graphs_in(const Messages& messages)
{
    std::size_t n = 0;
    for (const auto& m : messages)
        for (auto pos = m.content.find("{\"feature\""); pos != std::string::npos;
             pos = m.content.find("{\"feature\"", pos + 1))
            ++n;
    return n;
}

// Forwards to another provider and records the size of every request.
class Auditor : public Provider {
public:
    explicit Auditor(Provider& inner) : inner_(inner) {}
    std::string name() const override { return "audit"; }

    std::size_t requests = 0;
    std::size_t max_tokens = 0;
    std::size_t max_graphs = 0;

protected:
    std::string do_complete(const Messages& messages, const CompletionParams& params) override
    {
        std::lock_guard lock(mutex_);
        ++requests;
        max_tokens = std::max(max_tokens, estimate_message_tokens(messages));
        max_graphs = std::max(max_graphs, graphs_in(messages));
        return inner_.complete(messages, params);
    }

private:
    Provider& inner_;
    std::mutex mutex_;
};

Error error_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected an error");
    return Error(ErrorCode::Precondition, "");
}

Messages graph_question(const TermGraph& g, const std::string& q)
{
    return {{Role::system, system_prompt(testsupport::pneumonia_context())},
            {Role::user, describe_graph_request(encode_graph(g), std::nullopt)},
            {Role::assistant, "Understood."},
            {Role::user, q}};
}

} // namespace

TEST_CASE("message hashing and token estimate")
{
    const Messages a = {{Role::system, "s"}, {Role::user, "hello"}};
    const Messages b = {{Role::system, "s"}, {Role::user, "hello!"}};
    CHECK(message_list_hash(a) == message_list_hash(a));
    CHECK(message_list_hash(a) != message_list_hash(b));
    CHECK(message_list_hash(a).size() == 16);
    CHECK(estimate_message_tokens(a) == 1 + 2 + 2 * kMessageOverheadTokens);
    CHECK(messages_from_json(to_json(a)) == a);
}

TEST_CASE("scripted hash for the negative control matches the prompt bytes")
{
    const MockScript script = pneumonia_script();
    const std::string hash = message_list_hash(negative_control_messages(testsupport::pneumonia_context()));
    CHECK(hash == "5fa63999b0d18a1c");
    CHECK(script.by_hash.count(hash) == 1);
}

TEST_CASE("mock lookup order")
{
    MockScript s;
    const Messages m = {{Role::system, "sys"}, {Role::user, "question one"}};
    s.by_hash[message_list_hash(m)] = "by hash";
    s.rules.push_back({{"question"}, false, "by rule"});
    s.rules.push_back({{"sys", "two"}, true, "by conversation"});
    MockProvider p(s);
    CHECK(p.complete(m, {}) == "by hash");
    CHECK(p.complete({{Role::system, "sys"}, {Role::user, "another question"}}, {}) == "by rule");
    CHECK(p.complete({{Role::system, "sys"}, {Role::user, "two"}}, {}) == "by conversation");
    const Error miss = error_of([&] { p.complete({{Role::system, "x"}, {Role::user, "y"}}, {}); });
    CHECK(miss.code() == ErrorCode::MockMiss);
    CHECK(miss.details()["hash"].get<std::string>().size() == 16);
    CHECK(p.calls() == 4);

    CHECK(error_of([&] { p.complete({}, {}); }).code() == ErrorCode::Precondition);
    CHECK(error_of([&] { p.complete({{Role::user, "no system"}}, {}); }).code() == ErrorCode::Precondition);
    CHECK(error_of([&] { p.complete({{Role::system, "s"}, {Role::user, ""}}, {}); }).code() ==
          ErrorCode::Precondition);

    const auto flat = MockScript::from_json({{"abc", "x"}});
    CHECK(flat.by_hash.at("abc") == "x");
}

TEST_CASE("oracle-backed templates")
{
    const TermGraph age = testsupport::age_graph();
    MockProvider p(MockScript{});

    const std::string risk = p.complete(graph_question(age, "What is the average risk of an 82-year-old?"), {});
    CHECK(risk.find("0.29") != std::string::npos);
    CHECK(risk.find("57.2%") != std::string::npos);
    CHECK(risk.find("(81.5, 85.5)") != std::string::npos);

    const std::string mono = p.complete(graph_question(age, "Is the risk monotone in age?"), {});
    CHECK(mono.find("increases monotonically") != std::string::npos);

    const std::string top = p.complete(graph_question(age, "Who is most at risk?"), {});
    CHECK(top.find("(88.5, 106)") != std::string::npos);

    const std::string delta = p.complete(graph_question(age, "What changes from 80 to 82?"), {});
    CHECK(delta.find("0.074") != std::string::npos);

    CHECK_FALSE(template_answer(graph_question(age, "Tell me a joke")).has_value());
    CHECK_FALSE(template_answer({{Role::system, "s"}, {Role::user, "82-year-old?"}}).has_value());
}

TEST_CASE("prompts")
{
    const std::string sys = system_prompt(testsupport::pneumonia_context());
    CHECK(sys.find(kAnomalyInstruction) != std::string::npos);
    CHECK(sys.find("pneumonia") != std::string::npos);
    CHECK(sys.find("Positive scores mean a higher risk of death.") != std::string::npos);
    const Messages nc = negative_control_messages(testsupport::pneumonia_context());
    CHECK(graphs_in(nc) == 0);
    CHECK(nc.back().content.find("surpris") != std::string::npos);
    CHECK(describe_graph_request("{}", 0.25).find("{}") != std::string::npos);
}

TEST_CASE("per-graph conversation")
{
    MockProvider mock(pneumonia_script());
    Auditor audit(mock);
    Pipeline pipe(audit, {});
    const auto ctx = testsupport::pneumonia_context();

    const GraphSummary s = pipe.summarize_graph(ctx, testsupport::respiration_graph());
    CHECK(s.text.find("32 or less") != std::string::npos);
    REQUIRE(s.transcript.size() == 5);
    CHECK(s.transcript[0].role == Role::system);
    CHECK(s.transcript[3].content == kExecutiveSummaryQuestion);
    CHECK(audit.max_graphs == 1);

    // Oversized graph text is refused with the feature named.
    const std::string big = encode_graph(testsupport::long_graph());
    const Error e = error_of([&] { pipe.build_graph_conversation(ctx, big, std::nullopt); });
    CHECK(e.code() == ErrorCode::BudgetExceeded);
    CHECK(std::string(e.what()).find("long_feature") != std::string::npos);
    CHECK(e.details()["feature"] == "long_feature");

    // The pipeline itself simplifies oversized graphs before sending them.
    const GraphText gt = pipe.graph_text(testsupport::long_graph());
    CHECK(gt.tokens <= 2000);
    REQUIRE(gt.simplification.has_value());
    CHECK(gt.simplification->original_tokens > 2000);
}

TEST_CASE("provider failure carries the transcript so far")
{
    MockScript s;
    s.rules.push_back({{"Please study the graph carefully"}, false, "described"});
    MockProvider p(s);
    Pipeline pipe(p, {});
    const Error e = error_of([&] { pipe.summarize_graph(testsupport::pneumonia_context(), testsupport::age_graph()); });
    CHECK(e.code() == ErrorCode::MockMiss);
    REQUIRE(e.details().contains("transcript"));
    CHECK(e.details()["transcript"].size() == 4);
}

TEST_CASE("model summary and truncation")
{
    MockProvider mock(pneumonia_script());
    Auditor audit(mock);
    Pipeline pipe(audit, {});
    const auto ctx = testsupport::pneumonia_context();
    const GamModel model = testsupport::pneumonia_model();

    const FullReport r = pipe.run(ctx, model);
    CHECK(r.summaries.size() == model.terms.size());
    CHECK(r.model_summary.text.find("age") != std::string::npos);
    CHECK(r.model_summary.truncations.empty());
    CHECK(r.surprises.surprises.size() == 6);
    CHECK(audit.max_graphs == 1);
    CHECK(audit.max_tokens <= pipe.config().token_budget);

    // Importance order in the aggregation request.
    const std::string& req = r.model_summary.transcript[1].content;
    CHECK(req.find("age") < req.find("has_asthma"));

    // Fifty long summaries against a tight budget.
    std::vector<GraphSummary> many;
    std::vector<FeatureImportance> imp;
    std::string para;
    for (int w = 0; w < 120; ++w)
        para += "observation ";
    for (int i = 0; i < 50; ++i) {
        many.push_back({"f" + std::to_string(i), para, {}, {}});
        imp.push_back({"f" + std::to_string(i), 1.0 / (1 + i)});
    }
    PipelineConfig tight;
    tight.token_budget = 3000;
    Pipeline small(audit, tight);
    const ModelSummary ms = small.summarize_model(ctx, many, imp);
    CHECK_FALSE(ms.truncations.empty());
    for (const auto& t : ms.truncations)
        CHECK(t.final_tokens < t.original_tokens);
    CHECK(estimate_message_tokens({ms.transcript.begin(), ms.transcript.end() - 1}) <= 3000);
    CHECK(audit.max_tokens <= 8000);
}

TEST_CASE("surprise parsing")
{
    const std::vector<std::string> terms = {"heart_rate", "sodium_level"};
    const auto s = parse_surprises(
        "```json\n[{\"feature\": \"Sodium Level\", \"bins\": [\"(156, 159)\"], \"rank\": 3, \"rationale\": \"r\"},"
        " {\"feature\": \"heart_rate\", \"bins\": [], \"rank\": 9, \"rationale\": \"q\"}]\n```",
        terms);
    REQUIRE(s.size() == 2);
    CHECK(s[0].feature == "heart_rate");
    CHECK(s[0].rank == 5);
    CHECK(s[0].rank_clamped);
    CHECK(s[1].feature == "sodium_level");
    CHECK_FALSE(s[1].rank_clamped);

    const Error e = error_of([&] { parse_surprises("I found several surprises.", terms); });
    CHECK(e.code() == ErrorCode::SurpriseParseError);

    CHECK(looks_like_refusal("I'm sorry, but I cannot identify surprises without the graphs."));
    CHECK_FALSE(looks_like_refusal("Heart rate above 150 lowers the risk."));
}

TEST_CASE("surprises from the scripted model")
{
    MockProvider mock(pneumonia_script());
    Pipeline pipe(mock, {});
    const SurpriseReport r = pipe.find_surprises(testsupport::pneumonia_context(), testsupport::pneumonia_model());
    REQUIRE(r.surprises.size() == 6);
    std::set<std::string> got;
    for (const auto& s : r.surprises) {
        got.insert(s.feature);
        CHECK(s.rank >= 0);
        CHECK(s.rank <= 5);
    }
    for (const char* f : testsupport::kSurpriseFeatures)
        CHECK(got.count(f) == 1);
    CHECK_FALSE(r.repaired);

    const NegativeControl nc = pipe.negative_control(testsupport::pneumonia_context());
    CHECK(nc.refused);
}

TEST_CASE("prose surprise answers get one repair attempt")
{
    MockScript s;
    s.rules.push_back({{""}, false, "Several things look odd to me."});
    MockProvider p(s);
    Pipeline pipe(p, {});
    const Error e =
        error_of([&] { pipe.find_surprises(testsupport::pneumonia_context(), testsupport::age_model()); });
    CHECK(e.code() == ErrorCode::SurpriseParseError);
    const auto& t = e.details()["transcript"];
    REQUIRE(t.size() >= 2);
    CHECK(t[t.size() - 2]["content"] == std::string(kRepairRequest));

    MockScript fixed;
    fixed.rules.push_back({{"could not be parsed"}, false, "[]"});
    fixed.rules.push_back({{""}, false, "prose"});
    MockProvider p2(fixed);
    Pipeline pipe2(p2, {});
    const auto r = pipe2.find_surprises(testsupport::pneumonia_context(), testsupport::age_model());
    CHECK(r.repaired);
    CHECK(r.surprises.empty());
}

TEST_CASE("chat keeps every request within budget")
{
    MockProvider mock(pneumonia_script());
    Auditor audit(mock);
    ChatSession session;
    session.token_budget = 400;
    const auto ctx = testsupport::pneumonia_context();
    for (int i = 0; i < 100; ++i)
        CHECK(chat_turn(audit, session, ctx, "filler message number " + std::to_string(i), "") == "Noted.");
    CHECK(audit.max_tokens <= 400);
    CHECK(estimate_message_tokens(session.messages) <= 400);
    CHECK_FALSE(session.dropped.empty());
    CHECK(session.messages.back().content == "Noted.");
    CHECK(session.messages.front().role == Role::system);

    CHECK(error_of([&] { chat_turn(audit, session, ctx, "", ""); }).code() == ErrorCode::Precondition);
    const std::string huge(5000, 'x');
    CHECK(error_of([&] { chat_turn(audit, session, ctx, huge, ""); }).code() == ErrorCode::BudgetExceeded);
}

TEST_CASE("chat about a graph answers from the oracle")
{
    MockProvider mock(pneumonia_script());
    ChatSession session;
    const auto ctx = testsupport::pneumonia_context();
    const std::string graph = encode_graph(testsupport::age_graph());
    const std::string reply = chat_turn(mock, session, ctx, "What is the average risk of an 82-year-old?", graph);
    CHECK(reply.find("57.2%") != std::string::npos);
}

TEST_CASE("live provider protocol against a local server")
{
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string mode;
    std::mutex mode_mutex;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        std::lock_guard lock(mode_mutex);
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body["messages"].size() == 2);
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        const std::string ok = R"({"choices": [{"message": {"role": "assistant", "content": "hi there"}}]})";
        if (mode == "5xx-then-ok") {
            if (n == 1) {
                res.status = 500;
                return;
            }
            res.set_content(ok, "application/json");
        } else if (mode == "429") {
            if (n == 1) {
                res.status = 429;
                res.set_header("Retry-After", "1");
                return;
            }
            res.set_content(ok, "application/json");
        } else if (mode == "malformed") {
            res.set_content(R"({"choices": []})", "application/json");
        } else {
            res.status = 500;
        }
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::vector<std::chrono::milliseconds> sleeps;
    HttpProviderConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.api_key = "test-key";
    cfg.max_retries = 2;
    cfg.timeout = std::chrono::seconds(5);
    cfg.sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
    HttpProvider provider(cfg);
    const Messages msgs = {{Role::system, "s"}, {Role::user, "u"}};

    auto run = [&](const std::string& m) {
        std::lock_guard lock(mode_mutex);
        mode = m;
        hits = 0;
        sleeps.clear();
    };

    run("5xx-then-ok");
    CHECK(provider.complete(msgs, {}) == "hi there");
    CHECK(provider.last_attempts() == 2);
    CHECK(sleeps.size() == 1);

    run("429");
    CHECK(provider.complete(msgs, {}) == "hi there");
    REQUIRE(sleeps.size() == 1);
    CHECK(sleeps[0] == std::chrono::milliseconds(1000));

    run("malformed");
    CHECK(error_of([&] { provider.complete(msgs, {}); }).code() == ErrorCode::MalformedResponse);

    run("always-500");
    const Error e = error_of([&] { provider.complete(msgs, {}); });
    CHECK(e.code() == ErrorCode::Transport);
    CHECK(hits == 3);

    server.stop();
    th.join();

    HttpProviderConfig dead = cfg;
    dead.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    dead.max_retries = 0;
    CHECK(error_of([&] { HttpProvider(dead).complete(msgs, {}); }).code() == ErrorCode::Transport);

    CHECK(error_of([] { HttpProvider(HttpProviderConfig{}); }).code() == ErrorCode::InvalidConfig);
    CHECK(parse_chat_response(R"({"choices": [{"message": {"content": "x"}}]})") == "x");
    CHECK(error_of([] { parse_chat_response("not json"); }).code() == ErrorCode::MalformedResponse);
    const auto body = chat_request_body(msgs, {});
    CHECK(body["model"] == "gpt-4");
    CHECK(body["temperature"] == 0.0);
}
