#include "gamtalk/service/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gamtalk/dataset.hpp"
#include "gamtalk/graph_text.hpp"
#include "gamtalk/llm/pipeline.hpp"
#include "gamtalk/metrics.hpp"
#include "gamtalk/model_io.hpp"
#include "gamtalk/oracles.hpp"
#include "gamtalk/service/service.hpp"
#include "gamtalk/simplify.hpp"
#include "gamtalk/trainer.hpp"

namespace gamtalk::service {

using json = nlohmann::ordered_json;

namespace {

constexpr int kUsageExit = 64;
constexpr int kErrorExit = 1;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path, {{"path", path}});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string& require(const std::optional<std::string>& v, const char* what)
{
    if (!v || v->empty())
        throw Error(ErrorCode::InvalidConfig, std::string("missing ") + what);
    return *v;
}

GamModel load_configured_model(const AppConfig& c)
{
    return load_model(require(c.model_path, "--model (or GAMTALK_MODEL)"));
}

const TermGraph& term_of(const GamModel& model, const std::string& feature)
{
    const TermGraph* t = model.find_term(feature);
    if (!t)
        throw Error(ErrorCode::Precondition, "model has no term named '" + feature + "'", {{"feature", feature}});
    return *t;
}

std::shared_ptr<llm::Provider> make_provider(const AppConfig& c)
{
    switch (provider_mode(c)) {
    case ProviderMode::mock:
        return std::make_shared<llm::MockProvider>(llm::MockScript::load(*c.mock_script_path));
    case ProviderMode::live: {
        llm::HttpProviderConfig hc;
        hc.base_url = *c.provider_base_url;
        return std::make_shared<llm::HttpProvider>(hc);
    }
    case ProviderMode::none:
        break;
    }
    return nullptr;
}

std::shared_ptr<llm::Provider> require_provider(const AppConfig& c)
{
    auto p = make_provider(c);
    if (!p)
        throw Error(ErrorCode::InvalidConfig, "no language model provider configured; pass --provider-url or --mock");
    return p;
}

llm::PipelineConfig pipeline_config(const AppConfig& c)
{
    llm::PipelineConfig pc;
    if (c.model_name)
        pc.params.model_name = *c.model_name;
    if (c.token_budget)
        pc.token_budget = *c.token_budget;
    if (c.per_graph_budget)
        pc.per_graph_budget = *c.per_graph_budget;
    if (c.sig_digits)
        pc.encode.sig_digits = *c.sig_digits;
    return pc;
}

llm::DatasetContext dataset_context(const AppConfig& c, const GamModel& model)
{
    llm::DatasetContext ctx;
    ctx.description = c.description ? *c.description : default_description(model);
    if (c.outcome_direction)
        ctx.outcome_direction = *c.outcome_direction;
    return ctx;
}

std::optional<double> importance_of(const TermGraph& t)
{
    if (t.total_density() == 0)
        return std::nullopt;
    return term_importance(shift_graph(t, weighted_mean_score(t)));
}

std::vector<FeatureImportance> importances_or_empty(const GamModel& model)
{
    try {
        return feature_importance(model);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDensity)
            throw;
        return {};
    }
}

void print_json(std::ostream& out, const json& j)
{
    out << j.dump(2) << '\n';
}

std::string markdown_summary(const llm::GraphSummary& s)
{
    return "## " + s.feature + "\n\n" + s.text + "\n";
}

std::string markdown_surprises(const std::vector<llm::Surprise>& list)
{
    std::string md = "# Surprises\n\n";
    if (list.empty())
        md += "None reported.\n";
    for (const auto& s : list) {
        md += "- **" + s.feature + "** (rank " + std::to_string(s.rank) + ")";
        if (!s.bins.empty()) {
            md += ", bins";
            for (std::size_t i = 0; i < s.bins.size(); ++i)
                md += (i ? ", " : " ") + s.bins[i];
        }
        md += ": " + s.rationale + "\n";
    }
    return md;
}

std::pair<std::string, int> split_listen(const std::string& address)
{
    const auto colon = address.rfind(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::InvalidConfig, "listen address must be host:port, got '" + address + "'");
    const std::string port_text = address.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (port_text.empty() || *end != '\0' || port <= 0 || port > 65535)
        throw Error(ErrorCode::InvalidConfig, "bad port in listen address '" + address + "'");
    return {address.substr(0, colon), static_cast<int>(port)};
}

json usage_error(const std::string& message)
{
    return {{"error", "Usage"}, {"message", message}, {"details", json::object()}};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in,
        const EnvLookup& env)
{
    CLI::App app{"Explore, summarize and question generalized additive models with a language model."};
    app.name("gamtalk");
    app.require_subcommand(1, 1);
    app.fallthrough();

    AppConfig flags;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--model", flags.model_path, "Model interchange JSON");
    app.add_option("--data", flags.dataset_path, "CSV dataset");
    app.add_option("--label-column", flags.label_column, "Label column of the CSV");
    app.add_option("--budget", flags.token_budget, "Token budget");
    app.add_option("--per-graph-budget", flags.per_graph_budget, "Token budget of one graph encoding");
    app.add_option("--sig-digits", flags.sig_digits, "Significant digits in graph encodings");
    app.add_option("--provider-url", flags.provider_base_url, "Chat-completions base URL");
    app.add_option("--model-name", flags.model_name, "Language model name");
    app.add_option("--mock", flags.mock_script_path, "Mock provider script");
    app.add_option("--listen", flags.listen_address, "host:port for serve");
    app.add_option("--description", flags.description, "Dataset description for the system prompt");
    app.add_option("--outcome-direction", flags.outcome_direction, "Meaning of positive scores");
    app.add_option("--timeout", flags.request_timeout_s, "Service request timeout in seconds");

    std::string feature;
    std::string format = "json";
    auto add_feature = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--feature,-f", feature, "Term name");
        if (required)
            o->required();
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    };

    TrainConfig train_config;
    std::string train_out, schema_path, test_path, positive_label;
    auto* train = app.add_subcommand("train", "Fit a model on a CSV dataset");
    train->add_option("--out,-o", train_out, "Write the model here instead of stdout");
    train->add_option("--schema", schema_path, "Schema sidecar JSON");
    train->add_option("--positive-label", positive_label, "Label value treated as positive");
    train->add_option("--test", test_path, "Held-out CSV for metrics");
    train->add_option("--bags", train_config.outer_bags, "Outer bags");
    train->add_option("--max-rounds", train_config.max_rounds, "Boosting rounds per bag");
    train->add_option("--learning-rate", train_config.learning_rate, "Learning rate");
    train->add_option("--max-bins", train_config.max_bins, "Bins per continuous feature");
    train->add_option("--patience", train_config.early_stop_patience, "Early stopping patience");
    train->add_option("--validation-fraction", train_config.validation_fraction, "Validation share per bag");
    train->add_option("--min-samples", train_config.min_samples_per_split, "Minimum weight per split side");
    train->add_option("--seed", train_config.seed, "Random seed");
    train->add_option("--threads", train_config.threads, "Threads (0: all)");

    auto* encode = app.add_subcommand("encode", "Print the text encoding of one graph");
    add_feature(encode, true);

    std::string graph_path;
    auto* simplify = app.add_subcommand("simplify", "Coarsen a graph until its encoding fits a token budget");
    add_feature(simplify, false);
    simplify->add_option("--graph", graph_path, "Encoded graph file instead of --model/--feature");

    auto* describe = app.add_subcommand("describe", "Summarize one graph with the language model");
    add_feature(describe, true);
    add_format(describe);

    auto* summarize = app.add_subcommand("summarize", "Summarize every graph and the whole model");
    add_format(summarize);

    bool negative_control = false;
    bool full_report = false;
    auto* surprises = app.add_subcommand("surprises", "Ask for surprising effects, ranked 0-5");
    surprises->add_flag("--negative-control", negative_control, "Ask without any model data");
    surprises->add_flag("--full", full_report, "Print the whole report instead of the ranked list");
    add_format(surprises);

    auto* chat = app.add_subcommand("chat", "Interactive conversation about the model");
    add_feature(chat, false);

    auto* serve_cmd = app.add_subcommand("serve", "Start the JSON API");

    double jump_threshold = 0.1;
    std::optional<double> at, from, to, step;
    auto* verify = app.add_subcommand("verify", "Run the graph analyses");
    add_feature(verify, false);
    verify->add_option("--graph", graph_path, "Encoded graph file instead of --model/--feature");
    verify->add_option("--jump-threshold", jump_threshold, "Minimum jump size");
    verify->add_option("--at", at, "Report the score at this value");
    verify->add_option("--from", from, "Start of a mean delta");
    verify->add_option("--to", to, "End of a mean delta");
    verify->add_option("--step", step, "Step of the average slope");

    std::string messages_path;
    auto* hash = app.add_subcommand("hash-messages", "Print the mock lookup hash of a message list");
    hash->add_option("--file", messages_path, "Messages JSON (default: stdin)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << usage_error(e.what()).dump() << '\n';
        return kUsageExit;
    }

    try {
        const AppConfig config =
            resolve_config(flags, env, config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));

        if (*train) {
            CsvOptions co;
            co.label_column = require(config.label_column, "--label-column");
            if (!schema_path.empty())
                co.schema_path = schema_path;
            if (!positive_label.empty())
                co.positive_label = positive_label;
            const Dataset data = read_csv(require(config.dataset_path, "--data"), co);
            const GamModel model = fit(data, train_config);
            json result = json::object();
            if (train_out.empty()) {
                result["model"] = model_to_json(model);
            } else {
                save_model(model, train_out);
                result["model_path"] = train_out;
            }
            result["metrics"] = to_json(evaluate(model, data));
            if (!test_path.empty())
                result["test_metrics"] = to_json(evaluate(model, read_csv(test_path, co)));
            print_json(out, result);
            return 0;
        }

        if (*encode) {
            const GamModel model = load_configured_model(config);
            EncodeOptions eo;
            if (config.sig_digits)
                eo.sig_digits = *config.sig_digits;
            out << encode_graph(term_of(model, feature), eo) << '\n';
            return 0;
        }

        if (*simplify) {
            TermGraph graph;
            if (!graph_path.empty()) {
                graph = parse_graph(read_file(graph_path));
            } else {
                if (feature.empty())
                    throw Error(ErrorCode::InvalidConfig, "simplify needs --graph or --model with --feature");
                graph = term_of(load_configured_model(config), feature);
            }
            SimplifyOptions so;
            if (config.sig_digits)
                so.encode.sig_digits = *config.sig_digits;
            const std::size_t budget = config.token_budget.value_or(config.per_graph_budget.value_or(2000));
            const auto [simplified, report] = simplify_to_budget(graph, budget, so);
            const std::string encoded = encode_graph(simplified, so.encode);
            print_json(out, {{"feature", simplified.feature},
                             {"budget", budget},
                             {"graph", term_to_json(simplified)},
                             {"encoded", encoded},
                             {"report", to_json(report)}});
            return 0;
        }

        if (*verify) {
            TermGraph graph;
            if (!graph_path.empty())
                graph = parse_graph(read_file(graph_path));
            else if (!feature.empty())
                graph = term_of(load_configured_model(config), feature);
            else
                throw Error(ErrorCode::InvalidConfig, "verify needs --graph or --model with --feature");
            const int digits = config.sig_digits.value_or(4);
            json result{{"feature", graph.feature},
                        {"monotonicity", to_json(is_monotone(graph))},
                        {"argmax", to_json(argmax_region(graph), digits)},
                        {"jump_threshold", jump_threshold},
                        {"jumps", to_json(detect_jumps(graph, jump_threshold))}};
            if (at) {
                const double v = value_at(graph, *at);
                result["value_at"] = {{"x", *at}, {"score", v}, {"probability", log_odds_to_prob(v)}};
            }
            if (from || to) {
                if (!from || !to)
                    throw Error(ErrorCode::InvalidConfig, "--from and --to go together");
                json md = to_json(mean_delta(graph, *from, *to));
                md["from"] = *from;
                md["to"] = *to;
                result["mean_delta"] = std::move(md);
            }
            if (step)
                result["average_slope"] = {{"step", *step}, {"slope", average_slope(graph, *step)}};
            print_json(out, result);
            return 0;
        }

        if (*hash) {
            const std::string text = messages_path.empty() ? std::string(std::istreambuf_iterator<char>(in), {})
                                                           : read_file(messages_path);
            const json j = json::parse(text, nullptr, false);
            if (j.is_discarded())
                throw Error(ErrorCode::ParseError, "messages are not valid JSON");
            const llm::Messages msgs = llm::messages_from_json(j);
            print_json(out, {{"hash", llm::message_list_hash(msgs)},
                             {"tokens", llm::estimate_message_tokens(msgs)}});
            return 0;
        }

        if (*serve_cmd) {
            const GamModel model = load_configured_model(config);
            ServiceConfig sc;
            sc.pipeline = pipeline_config(config);
            sc.context = dataset_context(config, model);
            if (config.request_timeout_s)
                sc.request_timeout = std::chrono::milliseconds(static_cast<long long>(*config.request_timeout_s * 1000));
            const auto [host, port] = split_listen(config.listen_address.value_or("127.0.0.1:8080"));
            Service service(model, make_provider(config), sc);
            err << json{{"listening", host + ":" + std::to_string(port)}}.dump() << '\n';
            serve(service, host, port);
            return 0;
        }

        // Remaining commands talk to a language model.
        auto provider = require_provider(config);
        const llm::PipelineConfig pc = pipeline_config(config);
        llm::Pipeline pipeline(*provider, pc);

        if (*surprises && negative_control) {
            llm::DatasetContext ctx;
            ctx.description = require(config.description, "--description for the negative control");
            const llm::NegativeControl nc = pipeline.negative_control(ctx);
            print_json(out, {{"response", nc.response},
                             {"refused", nc.refused},
                             {"transcript", llm::to_json(nc.transcript)}});
            return 0;
        }

        const GamModel model = load_configured_model(config);
        const llm::DatasetContext ctx = dataset_context(config, model);

        if (*describe) {
            const TermGraph& t = term_of(model, feature);
            const llm::GraphSummary s = pipeline.summarize_graph(ctx, t, importance_of(t));
            if (format == "markdown")
                out << markdown_summary(s);
            else
                print_json(out, to_json(s));
            return 0;
        }

        if (*summarize) {
            std::vector<llm::GraphSummary> summaries;
            for (const auto& t : model.terms)
                summaries.push_back(pipeline.summarize_graph(ctx, t, importance_of(t)));
            const llm::ModelSummary ms = pipeline.summarize_model(ctx, summaries, importances_or_empty(model));
            if (format == "markdown") {
                out << "# Model summary\n\n" << ms.text << "\n\n";
                for (const auto& s : summaries)
                    out << markdown_summary(s) << '\n';
            } else {
                json j = to_json(ms);
                json per = json::array();
                for (const auto& s : summaries)
                    per.push_back(to_json(s));
                j["summaries"] = std::move(per);
                print_json(out, j);
            }
            return 0;
        }

        if (*surprises) {
            const llm::SurpriseReport report = pipeline.find_surprises(ctx, model);
            if (format == "markdown")
                out << markdown_surprises(report.surprises);
            else if (full_report)
                print_json(out, to_json(report));
            else
                print_json(out, to_json(report.surprises));
            return 0;
        }

        if (*chat) {
            llm::ChatSession session;
            session.params = pc.params;
            session.token_budget = pc.token_budget;
            std::string context_text;
            if (!feature.empty())
                context_text = "Graph under discussion:\n" + pipeline.graph_text(term_of(model, feature)).text;
            int status = 0;
            std::string line;
            out << "> " << std::flush;
            while (std::getline(in, line)) {
                if (line == "/quit" || line == "/exit")
                    break;
                if (line.find_first_not_of(" \t\r") == std::string::npos) {
                    out << "> " << std::flush;
                    continue;
                }
                try {
                    out << llm::chat_turn(*provider, session, ctx, line, context_text, pc.counter) << "\n\n";
                } catch (const Error& e) {
                    err << e.to_json().dump() << '\n';
                    status = kErrorExit;
                }
                out << "> " << std::flush;
            }
            out << '\n';
            return status;
        }
    } catch (const Error& e) {
        err << e.to_json().dump() << '\n';
        return kErrorExit;
    } catch (const std::exception& e) {
        err << json{{"error", "Internal"}, {"message", e.what()}, {"details", json::object()}}.dump() << '\n';
        return kErrorExit;
    }
    return kUsageExit;
}

} // namespace gamtalk::service
