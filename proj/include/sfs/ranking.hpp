#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/dataset.hpp"
#include "sfs/gain.hpp"
#include "sfs/model.hpp"
#include "sfs/saliency.hpp"
#include "sfs/tensor.hpp"

// Iterative saliency-based feature elimination. Each round trains fresh
// models on the data with the dead columns zeroed, accumulates aggregated
// saliency over `reps` repetitions, and keeps the strongest gamma-fraction
// of the surviving features for the next round.

namespace sfs {

struct SfsConfig {
    double gamma = 0.0;         // fraction of alive features kept per round; 0 = single pass
    double epsilon_stop = 1.0;  // rounds stop once the alive count would fall to this or below
    std::size_t reps = 3;
    GainSpec gain;
    ModelSpec model_spec;
    TrainConfig train_config;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const {
        if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in [0, 1)");
        if (!(epsilon_stop >= 1.0)) throw ArgumentError("epsilon_stop must be >= 1");
        if (reps == 0) throw ArgumentError("reps must be positive");
        gain.validate();
        model_spec.validate();
        train_config.validate();
    }
};

struct RankingRound {
    std::size_t alive_count = 0;
    // Accumulated aggregated saliency, full feature length; dead features
    // hold zero.
    std::vector<double> saliency;
};

struct FeatureRanking {
    std::vector<std::size_t> order;  // permutation of {0..R-1}, most relevant first
    std::vector<RankingRound> history;

    bool is_permutation() const {
        std::vector<bool> seen(order.size(), false);
        for (std::size_t f : order) {
            if (f >= order.size() || seen[f]) return false;
            seen[f] = true;
        }
        return true;
    }
};

// Alive-feature counts per round: R, then repeated floor(prev * gamma),
// stopping before any count at or below max(epsilon_stop, 1). The first
// element is always present, so gamma = 0 gives the single-pass schedule.
inline std::vector<std::size_t> alive_schedule(std::size_t num_features, double gamma,
                                               double epsilon_stop) {
    if (num_features == 0) throw ContractError("alive_schedule: no features");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in [0, 1)");
    if (!(epsilon_stop >= 1.0)) throw ArgumentError("epsilon_stop must be >= 1");

    const double cut = std::max(epsilon_stop, 1.0);
    std::vector<std::size_t> schedule{num_features};
    double next = std::floor(static_cast<double>(num_features) * gamma);
    while (next > cut) {
        schedule.push_back(static_cast<std::size_t>(next));
        next = std::floor(next * gamma);
    }
    return schedule;
}

// Seed for round `iteration`, repetition `rep`; reproducible from cfg.seed so
// callers can replay any single training.
inline std::uint64_t derive_rank_seed(std::uint64_t seed, std::size_t iteration, std::size_t rep) {
    return combine_seed(combine_seed(seed, 0x5f5 + iteration), rep);
}

// X must already be standardized (zeroing a column then means imputing its
// mean). Y is one-hot for classifiers, n x 1 for regressors.
inline FeatureRanking rank(const Tensor& X, const Tensor& Y, const SfsConfig& cfg) {
    cfg.validate();
    const std::size_t n = X.rows();
    const std::size_t r = X.cols();
    if (n == 0 || r == 0) throw ContractError("rank: empty dataset");
    if (r != cfg.model_spec.input_dim)
        throw ShapeError("rank: model input_dim " + std::to_string(cfg.model_spec.input_dim) +
                         " does not match " + std::to_string(r) + " features");
    if (Y.rows() != n || Y.cols() != cfg.model_spec.output_dim)
        throw ShapeError("rank: Y shape " + shape_str(Y.shape()) + " does not match");

    const TaskKind task =
        cfg.model_spec.is_classifier() ? TaskKind::Classification : TaskKind::Regression;
    std::vector<int> labels;
    if (task == TaskKind::Classification) {
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < Y.cols(); ++c)
                if (Y.at(i, c) > Y.at(i, best)) best = c;
            labels.push_back(static_cast<int>(best));
        }
    }

    FeatureRanking result;
    result.order.resize(r);
    for (std::size_t j = 0; j < r; ++j) result.order[j] = j;

    const std::vector<std::size_t> schedule = alive_schedule(r, cfg.gamma, cfg.epsilon_stop);
    for (std::size_t round = 0; round < schedule.size(); ++round) {
        const std::size_t n_alive = schedule[round];

        Tensor x_masked = X;
        for (std::size_t pos = n_alive; pos < r; ++pos) {
            const std::size_t dead = result.order[pos];
            for (std::size_t i = 0; i < n; ++i) x_masked.at(i, dead) = 0.0;
        }

        std::vector<double> accum(r, 0.0);
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
            const std::uint64_t s = derive_rank_seed(cfg.seed, round, rep);
            TrainedModel model = init(cfg.model_spec, s);
            TrainConfig tc = cfg.train_config;
            tc.seed = s;
            try {
                model = train(model, x_masked, Y, tc);
            } catch (const NumericError& e) {
                throw NumericError("rank: round " + std::to_string(round) + " rep " +
                                   std::to_string(rep) + ": " + e.what());
            }
            const Tensor per_sample = saliency_matrix(model, cfg.gain, x_masked, Y, cfg.threads);
            const Tensor agg = task == TaskKind::Classification
                                   ? aggregate_classification(per_sample, labels)
                                   : aggregate_regression(per_sample);
            for (std::size_t pos = 0; pos < n_alive; ++pos) {
                const std::size_t f = result.order[pos];
                accum[f] += agg[f];
            }
        }

        // Re-rank the alive block; ties resolve to the lower original index.
        std::vector<std::size_t> alive(result.order.begin(), result.order.begin() + n_alive);
        std::sort(alive.begin(), alive.end());
        std::stable_sort(alive.begin(), alive.end(),
                         [&](std::size_t a, std::size_t b) { return accum[a] > accum[b]; });
        std::copy(alive.begin(), alive.end(), result.order.begin());

        result.history.push_back({n_alive, std::move(accum)});
    }
    return result;
}

}  // namespace sfs
