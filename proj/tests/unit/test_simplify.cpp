#include <cmath>

#include "doctest.h"
#include "dp_oracle.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

#include "gamtalk/simplify.hpp"

using namespace gamtalk;

namespace {

TermGraph steps(const std::vector<double>& scores, const std::vector<std::uint64_t>& dens = {})
{
    TermGraph g;
    g.feature = "x";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        Bin b;
        b.lower = static_cast<double>(i);
        b.upper = static_cast<double>(i + 1);
        b.score = scores[i];
        b.density = dens.empty() ? 1 : dens[i];
        g.bins.push_back(b);
    }
    return g;
}

std::uint64_t total(const TermGraph& g)
{
    return g.total_density();
}

// Brute-force RMS: evaluate both step functions on every original bin.
double brute_distortion(const TermGraph& orig, const TermGraph& simp)
{
    double w = 0, acc = 0;
    for (const auto& b : orig.bins) {
        double s = 0;
        for (const auto& c : simp.bins)
            if (c.lower <= b.lower && b.upper <= c.upper)
                s = c.score;
        const double wt = orig.total_density() ? static_cast<double>(b.density) : 1.0;
        w += wt;
        acc += wt * (b.score - s) * (b.score - s);
    }
    return std::sqrt(acc / w);
}

void check_partition(const TermGraph& orig, const TermGraph& simp)
{
    CHECK(simp.bins.front().lower == orig.bins.front().lower);
    CHECK(simp.bins.back().upper == orig.bins.back().upper);
    CHECK(total(simp) == total(orig));
    for (std::size_t i = 1; i < simp.bins.size(); ++i)
        CHECK(simp.bins[i - 1].upper == simp.bins[i].lower);
    for (const auto& c : simp.bins) {
        bool lower_is_edge = false;
        for (const auto& b : orig.bins)
            lower_is_edge = lower_is_edge || b.lower == c.lower;
        CHECK(lower_is_edge);
    }
}

} // namespace

TEST_CASE("artifact prepass")
{
    const TermGraph g = steps({0, 0.001, 0.5, 0.5});
    const TermGraph same = artifact_prepass(g, 0.0);
    REQUIRE(same.bins.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(same.bins[i].score == g.bins[i].score);

    const TermGraph merged = artifact_prepass(g, 0.01);
    REQUIRE(merged.bins.size() == 2);
    CHECK(merged.bins[0].score == doctest::Approx(0.0005).epsilon(1e-12));
    CHECK(merged.bins[1].score == 0.5);
    CHECK(merged.bins[0].upper == 2.0);

    CHECK(artifact_prepass(steps({0, 1, 0, 1}), 0.01).bins.size() == 4);
}

TEST_CASE("simplify_to_budget fixed point and greedy choice")
{
    const TermGraph age = testsupport::age_graph();
    const auto [same, report] = simplify_to_budget(age, 100000);
    CHECK(same.bins.size() == age.bins.size());
    CHECK(report.merges.empty());
    CHECK(report.distortion_l2 == 0.0);
    CHECK(report.final_tokens == report.original_tokens);

    // {0, 0, 1}: merging bins 1-2 costs nothing, 2-3 costs something.
    const TermGraph three = steps({0, 0, 1});
    const TermGraph two = coarsen_greedy(three, 2);
    REQUIRE(two.bins.size() == 2);
    CHECK(two.bins[0].upper == 2.0);
    CHECK(two.bins[0].score == 0.0);
    CHECK(two.bins[1].score == 1.0);
    const auto seq = greedy_merge_sequence(three);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].left == 0);
    CHECK(seq[0].cost == 0.0);

    const std::size_t one_bin = estimate_tokens(encode_graph(coarsen_greedy(three, 1))).tokens;
    const std::size_t two_bins = estimate_tokens(encode_graph(two)).tokens;
    const auto [forced, r] = simplify_to_budget(three, two_bins);
    CHECK(forced.bins.size() == 2);
    CHECK(r.merges.size() == 1);
    CHECK(r.final_tokens <= two_bins);

    try {
        simplify_to_budget(three, one_bin - 1);
        FAIL("expected BudgetTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetTooSmall);
    }
}

TEST_CASE("distortion")
{
    const TermGraph g = steps({0, 1});
    CHECK(distortion(g, g) == 0.0);
    CHECK(distortion(g, coarsen_greedy(g, 1)) == doctest::Approx(0.5).epsilon(1e-15));

    TermGraph bad = steps({0});
    bad.bins[0].upper = 2.5;
    try {
        distortion(g, bad);
        FAIL("expected NotACoarsening");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotACoarsening);
    }
}

TEST_CASE("properties over random graphs")
{
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const TermGraph g = testsupport::random_step_graph(seed);
        const auto seq = greedy_merge_sequence(g);
        REQUIRE(seq.size() == g.bins.size() - 1);

        // Distortion along the merge sequence never decreases and matches the
        // brute-force evaluation.
        double prev = 0.0;
        for (std::size_t m = 1; m <= seq.size(); ++m) {
            const TermGraph c = apply_merges(g, {seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(m)});
            check_partition(g, c);
            const double d = distortion(g, c);
            CHECK(d == doctest::Approx(brute_distortion(g, c)).epsilon(1e-9));
            CHECK(d >= prev - 1e-12);
            prev = d;
        }

        // Budget sweep: met or a single bin; idempotent.
        const std::size_t full = estimate_tokens(encode_graph(g)).tokens;
        for (std::size_t budget : {full, full / 2, full / 4, std::size_t{40}}) {
            try {
                const auto [s, report] = simplify_to_budget(g, budget);
                CHECK((report.final_tokens <= budget || s.bins.size() == 1));
                CHECK(report.final_bins == s.bins.size());
                CHECK(report.final_tokens <= report.original_tokens);
                CHECK(report.merges.size() == g.bins.size() - s.bins.size());
                check_partition(g, s);
                const auto [again, r2] = simplify_to_budget(s, budget);
                CHECK(again.bins.size() == s.bins.size());
                CHECK(r2.merges.empty());
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::BudgetTooSmall);
            }
        }
    }
}

TEST_CASE("greedy stays within the measured factor of the optimum")
{
    // Bound from tests/oracles/simplify_oracle.py over seeds 1..100.
    constexpr double kRatioBound = 1.25;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const TermGraph g = testsupport::random_step_graph(seed);
        std::vector<double> s, w;
        double wsum = 0;
        for (const auto& b : g.bins) {
            s.push_back(b.score);
            w.push_back(static_cast<double>(b.density));
            wsum += w.back();
        }
        const auto dp = testsupport::dp_min_sse(s, w);
        for (std::size_t k = 1; k < g.bins.size(); ++k) {
            const double greedy = distortion(g, coarsen_greedy(g, k));
            const double opt = std::sqrt(std::max(dp[k], 0.0) / wsum);
            CHECK(greedy >= opt - 1e-12);
            if (opt > 1e-12)
                worst = std::max(worst, greedy / opt);
        }
    }
    CHECK(worst <= kRatioBound);
}

TEST_CASE("zero-density graphs use unit weights")
{
    TermGraph g = steps({0, 1, 5}, {0, 0, 0});
    const TermGraph c = coarsen_greedy(g, 2);
    REQUIRE(c.bins.size() == 2);
    CHECK(c.bins[0].score == 0.5);
    CHECK(distortion(g, c) == doctest::Approx(std::sqrt(0.5 / 3.0)));
}

TEST_CASE("over-budget fixture fits 2000 after simplification")
{
    const TermGraph g = testsupport::long_graph();
    CHECK(estimate_tokens(encode_graph(g)).tokens > 2000);
    const auto [s, report] = simplify_to_budget(g, 2000);
    CHECK(report.final_tokens <= 2000);
    CHECK(estimate_tokens(encode_graph(s)).tokens == report.final_tokens);
    CHECK(report.original_bins == 600);
}
