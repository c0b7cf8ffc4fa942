#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/dataset.hpp"
#include "sfs/model.hpp"
#include "sfs/ranking.hpp"
#include "sfs/tensor.hpp"

namespace sfs {

// Accuracy for classifiers (argmax over probability or margin rows), mean
// absolute error for regressors.
inline double score(const TrainedModel& model, const Dataset& test) {
    if (model.spec.is_classifier() != (test.task == TaskKind::Classification))
        throw ContractError("score: model task does not match dataset task");
    const Tensor pred = predict(model, test.X);
    const std::size_t n = test.n();
    if (test.task == TaskKind::Classification) {
        std::size_t hits = 0;
        const std::size_t c = model.spec.output_dim;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < c; ++j)
                if (pred.at(i, j) > pred.at(i, best)) best = j;
            if (static_cast<int>(best) == test.labels[i]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(n);
    }
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(pred[i] - test.targets[i]);
    return abs_sum / static_cast<double>(n);
}

// Fraction of the top-k ranked features that are truly relevant.
inline double precision_at_k(const FeatureRanking& ranking,
                             const std::optional<std::vector<bool>>& relevant_mask,
                             std::size_t k) {
    if (!relevant_mask) throw ContractError("precision_at_k: no relevant-feature ground truth");
    if (k == 0 || k > ranking.order.size())
        throw ArgumentError("precision_at_k: k must lie in [1, R]");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i)
        if ((*relevant_mask)[ranking.order[i]]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

struct FeatureCurve {
    std::vector<std::size_t> ks;
    std::vector<double> scores;
    std::string metric;  // "accuracy" or "mae"
    std::string ranker_desc;
    std::string classifier_desc;
};

inline std::string describe_spec(const ModelSpec& spec) {
    std::string s = model_kind_name(spec.kind);
    for (std::size_t i = 0; i < spec.hidden_layers.size(); ++i)
        s += (i ? "/" : " ") + std::to_string(spec.hidden_layers[i]);
    return s;
}

// Retrains the classifier on the top-k ranked features for every requested k
// and scores it on the test split. Masking zeroes the dead columns of the
// standardized data, the same convention the ranker uses, so k = R
// reproduces the no-selection baseline exactly.
inline FeatureCurve feature_curve(const FeatureRanking& ranking, const Dataset& train_ds,
                                  const Dataset& test_ds, const ModelSpec& classifier_spec,
                                  const TrainConfig& train_cfg, const std::vector<std::size_t>& ks,
                                  const std::string& ranker_desc = "") {
    if (train_ds.task != test_ds.task || train_ds.r() != test_ds.r())
        throw ContractError("feature_curve: train/test splits disagree");
    const std::size_t r = train_ds.r();
    if (ranking.order.size() != r) throw ContractError("feature_curve: ranking length mismatch");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == 0 || ks[i] > r) throw ArgumentError("feature_curve: k out of range");
        if (i > 0 && ks[i] <= ks[i - 1])
            throw ArgumentError("feature_curve: ks must be strictly increasing");
    }

    auto [std_train, stats] = standardize(train_ds);
    Dataset std_test = test_ds;
    std_test.X = apply_standardize(test_ds.X, stats);

    const Tensor y_train = std_train.target_matrix();

    FeatureCurve curve;
    curve.ks = ks;
    curve.metric = train_ds.task == TaskKind::Classification ? "accuracy" : "mae";
    curve.ranker_desc = ranker_desc;
    curve.classifier_desc = describe_spec(classifier_spec);

    for (std::size_t k : ks) {
        Tensor x_train = std_train.X;
        Dataset masked_test = std_test;
        for (std::size_t pos = k; pos < r; ++pos) {
            const std::size_t dead = ranking.order[pos];
            for (std::size_t i = 0; i < x_train.rows(); ++i) x_train.at(i, dead) = 0.0;
            for (std::size_t i = 0; i < masked_test.X.rows(); ++i) masked_test.X.at(i, dead) = 0.0;
        }
        TrainedModel model = init(classifier_spec, train_cfg.seed);
        model = train(model, x_train, y_train, train_cfg);
        curve.scores.push_back(score(model, masked_test));
    }
    return curve;
}

}  // namespace sfs
