#include "fixtures.hpp"

#include <cmath>

#include "gamtalk/random.hpp"

namespace testsupport {

using namespace gamtalk;

namespace {

struct Row {
    double lower, upper, score;
    std::uint64_t density;
};

TermGraph continuous(const std::string& name, std::initializer_list<Row> rows, double ci_width)
{
    TermGraph g;
    g.feature = name;
    g.kind = FeatureKind::continuous;
    for (const auto& r : rows) {
        Bin b;
        b.lower = r.lower;
        b.upper = r.upper;
        b.score = r.score;
        b.density = r.density;
        if (ci_width > 0) {
            b.ci_low = r.score - ci_width;
            b.ci_high = r.score + ci_width;
        }
        g.bins.push_back(b);
    }
    return g;
}

} // namespace

TermGraph age_graph()
{
    return continuous("age",
                      {{18, 25.5, -0.85, 310},
                       {25.5, 35.5, -0.62, 520},
                       {35.5, 45.5, -0.41, 640},
                       {45.5, 55.5, -0.22, 780},
                       {55.5, 65.5, -0.05, 930},
                       {65.5, 73.5, 0.08, 870},
                       {73.5, 77.5, 0.17, 520},
                       {77.5, 80.5, 0.216, 410},
                       {80.5, 81.5, 0.238, 140},
                       {81.5, 85.5, 0.29, 450},
                       {85.5, 88.5, 0.35, 260},
                       {88.5, 106, 0.52, 190}},
                      0.08);
}

TermGraph respiration_graph()
{
    return continuous("respiration_rate",
                      {{6, 12, -0.31, 120},
                       {12, 16, -0.24, 980},
                       {16, 20, -0.18, 1900},
                       {20, 24, -0.11, 1400},
                       {24, 28, -0.06, 700},
                       {28, 32, -0.02, 420},
                       {32, 36, 0.14, 260},
                       {36, 42, 0.27, 150},
                       {42, 60, 0.41, 70}},
                      0.06);
}

GamModel pneumonia_model()
{
    GamModel m;
    m.intercept = -2.6;
    m.outcome.name = "in_hospital_death";
    m.outcome.positive_label = "1";
    m.provenance = "hand-built fixture";
    m.terms.push_back(age_graph());
    m.terms.push_back(respiration_graph());
    m.terms.push_back(continuous("bun_level",
                                 {{1, 10, -0.2, 1500}, {10, 20, -0.12, 2000}, {20, 30, 0.02, 1200},
                                  {30, 50, 0.17, 800}, {50, 80, 0.29, 400}, {80, 150, 0.36, 150}},
                                 0.05));
    m.terms.push_back(continuous("heart_rate",
                                 {{30, 60, 0.05, 300}, {60, 90, -0.08, 2600}, {90, 120, 0.04, 2100},
                                  {120, 150, 0.16, 600}, {150, 200, -0.12, 60}},
                                 0.07));
    m.terms.push_back(continuous("systolic_blood_pressure",
                                 {{50, 80, 0.31, 150}, {80, 100, 0.17, 700}, {100, 130, 0.01, 2700},
                                  {130, 160, -0.09, 1600}, {160, 250, -0.16, 500}},
                                 0.06));
    m.terms.push_back(continuous("albumin_level",
                                 {{-1, 0, 0.12, 900}, {0, 1.5, -0.05, 150}, {1.5, 2.1, 0.2, 600},
                                  {2.1, 3.5, 0.04, 2600}, {3.5, 6, -0.1, 1400}},
                                 0.09));
    m.terms.push_back(continuous("percentage_bands",
                                 {{0, 10, -0.04, 3900}, {10, 42, 0.03, 1300}, {42, 62, 0.3, 140},
                                  {62, 100, 0.05, 40}},
                                 0.12));
    m.terms.push_back(continuous("creatinine_level",
                                 {{0, 1.2, -0.07, 3000}, {1.2, 2.5, 0.06, 1700}, {2.5, 5, 0.18, 500},
                                  {5, 10.4, 0.04, 150}, {10.4, 20, -0.11, 30}},
                                 0.1));
    m.terms.push_back(continuous("sodium_level",
                                 {{110, 125, -0.02, 60}, {125, 135, 0.05, 1300}, {135, 145, -0.03, 3900},
                                  {145, 156, 0.07, 300}, {156, 159, 0.26, 40}, {159, 175, -0.15, 20}},
                                 0.1));
    TermGraph asthma;
    asthma.feature = "has_asthma";
    asthma.kind = FeatureKind::boolean;
    Bin no, yes;
    no.label = "false";
    no.score = 0.01;
    no.density = 5200;
    yes.label = "true";
    yes.score = -0.09;
    yes.density = 420;
    asthma.bins = {no, yes};
    m.terms.push_back(asthma);
    for (const auto& t : m.terms)
        m.feature_schema.push_back({t.feature, t.kind});
    return m;
}

GamModel age_model()
{
    GamModel m;
    m.intercept = -2.6;
    m.outcome.name = "in_hospital_death";
    m.outcome.positive_label = "1";
    m.terms.push_back(age_graph());
    m.feature_schema.push_back({"age", FeatureKind::continuous});
    return m;
}

TermGraph long_graph(std::size_t bins)
{
    SplitMix64 rng(7);
    TermGraph g;
    g.feature = "long_feature";
    double edge = 0.0, s = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        Bin b;
        b.lower = edge;
        edge += 0.1 + rng.uniform() * 3.0;
        b.upper = edge;
        s += (rng.uniform() - 0.5) * 0.3;
        b.score = s;
        b.density = 1 + rng.below(200);
        g.bins.push_back(b);
    }
    return g;
}

GamModel long_model()
{
    GamModel m = age_model();
    m.terms = {long_graph()};
    m.feature_schema = {{"long_feature", FeatureKind::continuous}};
    return m;
}

llm::DatasetContext pneumonia_context()
{
    return {"This model represents outcomes of hospitalized patients with pneumonia. The outcome is in-hospital "
            "mortality.",
            "Positive scores mean a higher risk of death."};
}

std::string fixture_path(const std::string& name)
{
    return std::string(GAMTALK_FIXTURE_DIR) + "/" + name;
}

} // namespace testsupport
