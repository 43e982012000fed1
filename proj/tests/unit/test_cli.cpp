#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"

#include "gamtalk/service/cli.hpp"
#include "gamtalk/service/config.hpp"

using namespace gamtalk;
using namespace gamtalk::service;
using json = nlohmann::ordered_json;

namespace {

struct CliRun {
    int code = 0;
    std::string out, err;
};

CliRun cli(const std::vector<std::string>& args, const std::map<std::string, std::string>& env = {},
            const std::string& input = "")
{
    std::ostringstream out, err;
    std::istringstream in(input);
    const EnvLookup lookup = [env](const std::string& k) -> std::optional<std::string> {
        if (auto it = env.find(k); it != env.end())
            return it->second;
        return std::nullopt;
    };
    const int code = run(args, out, err, in, lookup);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_dir()
{
    const auto d = std::filesystem::temp_directory_path() / "gamtalk_cli_test";
    std::filesystem::create_directories(d);
    return d;
}

const std::string kDescription = testsupport::pneumonia_context().description;
const std::string kDirection = testsupport::pneumonia_context().outcome_direction;

} // namespace

TEST_CASE("simplify to a budget")
{
    const CliRun o = cli({"simplify", "--model", testsupport::fixture_path("long_model.json"), "-f", "long_feature",
                           "--budget", "2000"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(j["budget"] == 2000);
    CHECK(j["report"]["final_tokens"].get<std::size_t>() <= 2000);
    CHECK(j["report"]["original_tokens"].get<std::size_t>() > 2000);
    CHECK(j["report"]["merges"].size() > 0);
}

TEST_CASE("encode and verify")
{
    const std::string model = testsupport::fixture_path("age_model.json");
    const CliRun e = cli({"encode", "--model", model, "-f", "age"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("\"(81.5, 85.5)\": 0.29") != std::string::npos);

    const CliRun v = cli({"verify", "--model", model, "-f", "age", "--at", "82", "--from", "80", "--to", "82"});
    REQUIRE(v.code == 0);
    const json j = json::parse(v.out);
    CHECK(j["value_at"]["score"] == 0.29);
    CHECK(std::abs(j["mean_delta"]["delta_log_odds"].get<double>() - 0.074) <= 1e-12);
    CHECK(j["monotonicity"]["direction"] == "increasing");

    const CliRun bad = cli({"verify", "--model", model, "-f", "age", "--at", "500"});
    CHECK(bad.code == 1);
    CHECK(json::parse(bad.err)["error"] == "OutOfDomain");
}

TEST_CASE("train on an empty csv")
{
    const auto dir = temp_dir();
    std::ofstream(dir / "empty.csv") << "x,y\n";
    const CliRun o = cli({"train", "--data", (dir / "empty.csv").string(), "--label-column", "y"});
    CHECK(o.code == 1);
    CHECK(json::parse(o.err)["error"] == "EmptyDataset");
    CHECK(o.out.empty());
}

TEST_CASE("train and evaluate a small csv")
{
    const auto dir = temp_dir();
    {
        std::ofstream f(dir / "small.csv");
        f << "x,flag,y\n";
        for (int i = 0; i < 300; ++i)
            f << i << "," << (i % 3 == 0 ? "true" : "false") << "," << (i > 150 ? 1 : 0) << "\n";
    }
    const CliRun o = cli({"train", "--data", (dir / "small.csv").string(), "--label-column", "y", "--bags", "2",
                           "--max-rounds", "50", "-o", (dir / "small_model.json").string()});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(j["metrics"]["auc"].get<double>() > 0.9);
    CHECK(std::filesystem::exists(dir / "small_model.json"));
}

TEST_CASE("surprises through the mock match the snapshot")
{
    const std::vector<std::string> args = {"surprises",     "--model",
                                           testsupport::fixture_path("pneumonia_model.json"),
                                           "--mock",        testsupport::fixture_path("pneumonia_mock.json"),
                                           "--description", kDescription,
                                           "--outcome-direction", kDirection};
    const CliRun a = cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == slurp(testsupport::fixture_path("pneumonia_surprises.json")));
    CHECK(cli(args).out == a.out);

    const CliRun nc = cli({"surprises", "--negative-control", "--mock", testsupport::fixture_path("pneumonia_mock.json"),
                            "--description", kDescription});
    REQUIRE(nc.code == 0);
    CHECK(json::parse(nc.out)["refused"] == true);
}

TEST_CASE("hash-messages")
{
    const std::string msgs = R"([{"role": "system", "content": "s"}, {"role": "user", "content": "hello"}])";
    const CliRun o = cli({"hash-messages"}, {}, msgs);
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(j["hash"].get<std::string>().size() == 16);
    CHECK(j["tokens"] == 1 + 2 + 8);
}

TEST_CASE("config precedence: file < env < flags")
{
    const auto dir = temp_dir();
    const auto file = dir / "config.json";
    std::ofstream(file) << R"({"token_budget": 1500, "model_path": ")" << testsupport::fixture_path("long_model.json")
                        << R"("})";

    auto budget_of = [&](const CliRun& o) {
        REQUIRE(o.code == 0);
        return json::parse(o.out)["budget"].get<std::size_t>();
    };
    const std::vector<std::string> base = {"--config", file.string(), "simplify", "-f", "long_feature"};
    CHECK(budget_of(cli(base)) == 1500);
    CHECK(budget_of(cli(base, {{"GAMTALK_BUDGET", "1700"}})) == 1700);
    std::vector<std::string> flagged = base;
    flagged.insert(flagged.end(), {"--budget", "1900"});
    CHECK(budget_of(cli(flagged, {{"GAMTALK_BUDGET", "1700"}})) == 1900);

    AppConfig flags;
    flags.model_name = "flag-model";
    const AppConfig r = resolve_config(flags, [](const std::string& k) -> std::optional<std::string> {
        return k == "GAMTALK_MODEL_NAME" ? std::optional<std::string>("env-model") : std::nullopt;
    }, std::nullopt);
    CHECK(*r.model_name == "flag-model");

    try {
        config_from_json({{"no_such_key", 1}});
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
}

TEST_CASE("provider mode conflict")
{
    const CliRun o = cli({"surprises", "--model", testsupport::fixture_path("pneumonia_model.json"), "--mock",
                           testsupport::fixture_path("pneumonia_mock.json"), "--provider-url", "http://localhost:1/v1"});
    CHECK(o.code == 1);
    CHECK(json::parse(o.err)["error"] == "InvalidConfig");

    AppConfig c;
    CHECK(provider_mode(c) == ProviderMode::none);
    c.mock_script_path = "m.json";
    CHECK(provider_mode(c) == ProviderMode::mock);
}

TEST_CASE("usage errors")
{
    const CliRun unknown = cli({"frobnicate"});
    CHECK(unknown.code == 64);
    CHECK(json::parse(unknown.err)["error"] == "Usage");
    CHECK(cli({}).code == 64);
    const CliRun help = cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("simplify") != std::string::npos);
}

TEST_CASE("chat repl")
{
    const CliRun o = cli({"chat", "--model", testsupport::fixture_path("age_model.json"), "--mock",
                           testsupport::fixture_path("pneumonia_mock.json"), "-f", "age", "--description",
                           kDescription},
                          {}, "What is the average risk of an 82-year-old?\n/quit\n");
    REQUIRE(o.code == 0);
    CHECK(o.out.find("57.2%") != std::string::npos);
}
