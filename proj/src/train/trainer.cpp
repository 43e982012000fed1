#include "gamtalk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "gamtalk/kernels.hpp"
#include "gamtalk/random.hpp"

namespace gamtalk {

using json = nlohmann::ordered_json;

namespace {

constexpr double kMinHessian = 1e-12;
constexpr double kImprovement = 1e-12;
constexpr double kCiZ = 1.96;

struct Split {
    double gain = 0.0;
    bool found = false;
    /// Bins (in split order) up to and including `last_left` go left.
    std::size_t last_left = 0;
    double left_value = 0.0;
    double right_value = 0.0;
};

// Best single split over bins taken in `order`.
Split best_split(const std::vector<std::size_t>& order, const std::vector<double>& G, const std::vector<double>& H,
                 const std::vector<double>& W, double min_samples)
{
    Split best;
    double gt = 0.0, ht = 0.0, wt = 0.0;
    for (std::size_t b : order) {
        gt += G[b];
        ht += H[b];
        wt += W[b];
    }
    if (wt < min_samples || ht <= kMinHessian)
        return best;
    const double parent = gt * gt / ht;
    double gl = 0.0, hl = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        gl += G[order[k]];
        hl += H[order[k]];
        const double gr = gt - gl, hr = ht - hl;
        if (hl <= kMinHessian || hr <= kMinHessian)
            continue;
        const double gain = gl * gl / hl + gr * gr / hr - parent;
        if (!best.found || gain > best.gain) {
            best.found = true;
            best.gain = gain;
            best.last_left = k;
            best.left_value = -gl / hl;
            best.right_value = -gr / hr;
        }
    }
    return best;
}

double clipped_logit(double p)
{
    p = std::clamp(p, 1e-6, 1.0 - 1e-6);
    return std::log(p / (1.0 - p));
}

struct BagResult {
    double intercept = 0.0;
    std::vector<std::vector<double>> scores;
    BagTrace trace;
};

BagResult fit_bag(const BinnedDataset& data, const TrainConfig& config, std::size_t bag)
{
    const std::size_t n = data.rows();
    SplitMix64 rng(derive_seed(config.seed, bag));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.below(i)]);
    auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

    std::vector<double> val_w(n, 0.0), w(n, 0.0);
    for (std::size_t i = 0; i < n_val; ++i)
        val_w[perm[i]] = 1.0;
    const std::size_t n_train = n - n_val;
    for (std::size_t i = 0; i < n_train; ++i)
        w[perm[n_val + rng.below(n_train)]] += 1.0;

    double pos = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pos += w[i] * data.labels[i];
        tot += w[i];
    }

    BoostState state = init_boost_state(data, std::move(w), clipped_logit(pos / tot), config.learning_rate,
                                        config.min_samples_per_split);

    BagResult out;
    out.intercept = state.intercept;
    out.scores = state.scores;
    auto& trace = out.trace;
    trace.train_loss.push_back(kernels::log_loss(state.margin, data.labels, state.weights));
    trace.best_validation_loss = kernels::log_loss(state.margin, data.labels, val_w);

    std::size_t since = 0;
    for (std::size_t round = 1; round <= config.max_rounds; ++round) {
        boost_one_round(state);
        trace.rounds_run = round;
        trace.train_loss.push_back(kernels::log_loss(state.margin, data.labels, state.weights));
        const double loss = kernels::log_loss(state.margin, data.labels, val_w);
        if (loss < trace.best_validation_loss - kImprovement) {
            trace.best_validation_loss = loss;
            trace.best_round = round;
            out.scores = state.scores;
            since = 0;
        } else if (++since >= config.early_stop_patience) {
            break;
        }
    }
    return out;
}

TermGraph make_graph(const FeatureBins& fb, const std::vector<std::uint64_t>& density)
{
    TermGraph g;
    g.feature = fb.name;
    g.kind = fb.kind;
    const std::size_t nb = fb.bin_count();
    for (std::size_t b = 0; b < nb; ++b) {
        Bin bin;
        if (fb.kind == FeatureKind::continuous) {
            bin.lower = b == 0 ? fb.min : fb.cuts[b - 1];
            bin.upper = b + 1 == nb ? fb.max : fb.cuts[b];
        } else {
            bin.label = fb.labels[b];
        }
        bin.density = density[b];
        g.bins.push_back(std::move(bin));
    }
    if (fb.has_missing) {
        MissingBin m;
        m.density = density[nb];
        g.missing = m;
    }
    return g;
}

} // namespace

void TrainConfig::validate() const
{
    auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (max_bins < 2)
        bad("max_bins must be >= 2");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        bad("learning_rate must be positive");
    if (max_rounds == 0)
        bad("max_rounds must be positive");
    if (early_stop_patience == 0)
        bad("early_stop_patience must be positive");
    if (!(validation_fraction > 0.0 && validation_fraction <= 0.5))
        bad("validation_fraction must be in (0, 0.5]");
    if (outer_bags == 0)
        bad("outer_bags must be positive");
    if (min_samples_per_split == 0)
        bad("min_samples_per_split must be positive");
    if (threads < 0)
        bad("threads must be >= 0");
}

json TrainConfig::to_json() const
{
    return {{"max_bins", max_bins},
            {"learning_rate", learning_rate},
            {"max_rounds", max_rounds},
            {"early_stop_patience", early_stop_patience},
            {"validation_fraction", validation_fraction},
            {"outer_bags", outer_bags},
            {"min_samples_per_split", min_samples_per_split},
            {"seed", seed}};
}

BoostState init_boost_state(const BinnedDataset& data, std::vector<double> weights, double intercept,
                            double learning_rate, std::size_t min_samples_per_split)
{
    BoostState s;
    s.data = &data;
    for (const auto& f : data.features)
        s.scores.emplace_back(f.bin_count() + 1, 0.0);
    s.intercept = intercept;
    s.margin.assign(data.rows(), intercept);
    s.weights = std::move(weights);
    s.learning_rate = learning_rate;
    s.min_samples_per_split = static_cast<double>(min_samples_per_split);
    s.grad.resize(data.rows());
    s.hess.resize(data.rows());
    return s;
}

RoundStats boost_one_round(BoostState& state)
{
    const BinnedDataset& data = *state.data;
    RoundStats stats;
    stats.gains.assign(data.features.size(), 0.0);

    for (std::size_t f = 0; f < data.features.size(); ++f) {
        const FeatureBins& fb = data.features[f];
        const std::size_t nb = fb.bin_count();
        const auto& codes = data.codes[f];

        kernels::gradients(state.margin, data.labels, state.weights, state.grad, state.hess);
        std::vector<double> G(nb + 1), H(nb + 1), W(nb + 1);
        kernels::histogram(codes, state.grad, state.hess, state.weights, G, H, W);

        std::vector<std::size_t> order(nb);
        std::iota(order.begin(), order.end(), std::size_t{0});
        if (fb.kind != FeatureKind::continuous) {
            // Categories have no natural order: sort by their Newton value.
            auto ratio = [&](std::size_t b) { return H[b] > kMinHessian ? G[b] / H[b] : 0.0; };
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return ratio(a) < ratio(b); });
        }

        std::vector<double> update(nb + 1, 0.0);
        const Split split = best_split(order, G, H, W, state.min_samples_per_split);
        if (split.found) {
            stats.gains[f] = split.gain;
            for (std::size_t k = 0; k < nb; ++k)
                update[order[k]] = state.learning_rate * (k <= split.last_left ? split.left_value : split.right_value);
        }
        if (H[nb] > kMinHessian)
            update[nb] = state.learning_rate * (-G[nb] / H[nb]);

        auto& scores = state.scores[f];
        for (std::size_t b = 0; b <= nb; ++b)
            scores[b] += update[b];
        kernels::add_update(codes, update, state.margin);
    }
    return stats;
}

FitResult fit_detailed(const Dataset& data, const TrainConfig& config)
{
    config.validate();
    if (data.rows() == 0)
        throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
    const auto positives = std::count(data.labels.begin(), data.labels.end(), std::uint8_t{1});
    if (positives == 0 || static_cast<std::size_t>(positives) == data.rows())
        throw Error(ErrorCode::SingleClassLabels, "labels contain a single class",
                    {{"positives", positives}, {"rows", data.rows()}});
    if (data.rows() < 2)
        throw Error(ErrorCode::EmptyDataset, "need at least two rows");

    const BinnedDataset binned = bin_features(data, config.max_bins);
    const std::size_t n = binned.rows();
    const std::size_t nf = binned.features.size();

    std::vector<std::vector<std::uint64_t>> density(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        density[f].assign(binned.features[f].bin_count() + 1, 0);
        for (std::uint32_t c : binned.codes[f])
            ++density[f][c];
    }

    const std::size_t bags = config.outer_bags;
    std::vector<BagResult> results(bags);
    std::vector<std::exception_ptr> errors(bags);
    const int threads = config.threads > 0 ? config.threads : kernels::max_threads();
    (void)threads;

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(bags); ++b) {
        try {
            results[static_cast<std::size_t>(b)] = fit_bag(binned, config, static_cast<std::size_t>(b));
        } catch (...) {
            errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    // Center each bag on the full-data densities so bags are comparable.
    for (auto& r : results) {
        for (std::size_t f = 0; f < nf; ++f) {
            double mean = 0.0;
            for (std::size_t c = 0; c < r.scores[f].size(); ++c)
                mean += static_cast<double>(density[f][c]) * r.scores[f][c];
            mean /= static_cast<double>(n);
            for (auto& s : r.scores[f])
                s -= mean;
            r.intercept += mean;
        }
    }

    FitResult out;
    GamModel& model = out.model;
    model.outcome.name = data.label_name;
    model.outcome.positive_label = data.positive_label;

    double intercept = 0.0;
    for (const auto& r : results)
        intercept += r.intercept;
    model.intercept = intercept / static_cast<double>(bags);

    for (std::size_t f = 0; f < nf; ++f) {
        const FeatureBins& fb = binned.features[f];
        model.feature_schema.push_back({fb.name, fb.kind});
        TermGraph g = make_graph(fb, density[f]);
        const std::size_t slots = fb.bin_count() + 1;
        for (std::size_t c = 0; c < slots; ++c) {
            double mean = 0.0;
            for (const auto& r : results)
                mean += r.scores[f][c];
            mean /= static_cast<double>(bags);
            double var = 0.0;
            for (const auto& r : results)
                var += (r.scores[f][c] - mean) * (r.scores[f][c] - mean);
            const double sd = bags > 1 ? std::sqrt(var / static_cast<double>(bags - 1)) : 0.0;
            if (c < fb.bin_count()) {
                g.bins[c].score = mean;
                g.bins[c].ci_low = mean - kCiZ * sd;
                g.bins[c].ci_high = mean + kCiZ * sd;
            } else if (g.missing) {
                g.missing->score = mean;
                g.missing->ci_low = mean - kCiZ * sd;
                g.missing->ci_high = mean + kCiZ * sd;
            }
        }
        model.terms.push_back(std::move(g));
    }

    model = recenter(model, CenteringPolicy::mean_zero);

    json bag_info = json::array();
    for (const auto& r : results)
        bag_info.push_back({{"best_round", r.trace.best_round},
                            {"rounds_run", r.trace.rounds_run},
                            {"best_validation_loss", r.trace.best_validation_loss}});
    model.provenance = "cyclic gradient boosting, " + std::to_string(bags) + " outer bags, " + std::to_string(n) +
                       " rows, seed " + std::to_string(config.seed);
    model.extra = json::object();
    model.extra["training"] = {{"config", config.to_json()}, {"rows", n}, {"bags", std::move(bag_info)}};

    out.bins = binned.features;
    for (auto& r : results)
        out.bags.push_back(std::move(r.trace));
    return out;
}

GamModel fit(const Dataset& data, const TrainConfig& config)
{
    return fit_detailed(data, config).model;
}

} // namespace gamtalk
