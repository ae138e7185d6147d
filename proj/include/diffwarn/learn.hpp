#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace diffwarn::learn {

// Binary-labeled feature rows. Label 1 is the positive ("alarming") class.
struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t size() const { return rows.size(); }
    std::size_t arity() const { return rows.empty() ? 0 : rows.front().size(); }
    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   // feature value < threshold
    int right = -1;  // feature value >= threshold
    std::size_t count0 = 0;
    std::size_t count1 = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    int predict(std::span<const double> x) const;
};

struct EnsembleConfig {
    std::size_t trees = 100;
    std::size_t max_depth = 6;
    std::size_t min_leaf = 2;
};

struct TreeEnsemble {
    std::vector<DecisionTree> trees;
    EnsembleConfig config;
    std::uint64_t seed = 0;
    std::size_t arity = 0;
    std::vector<std::string> feature_names;
};

// Bagging: each tree trains on a bootstrap resample; split search is exact
// over midpoints of sorted distinct values, Gini impurity, ties broken toward
// the lowest feature index then lowest threshold. Deterministic given seed.
TreeEnsemble train_ensemble(const Dataset& data, const EnsembleConfig& config,
                            std::uint64_t seed);

// majority vote; exact ties predict 1 (alarming)
int predict(const TreeEnsemble& ensemble, std::span<const double> x);
// fraction of trees voting 1
double predict_proba(const TreeEnsemble& ensemble, std::span<const double> x);

struct CVReport {
    std::vector<double> fold_accuracy;
    double mean_accuracy = 0.0;
    std::vector<double> importance;  // per feature, sums to 1 when splits exist
};

// N-fold cross-validation on a random equal-size partition (remainder rows
// spread round-robin). Reported importance is averaged over the fold models.
CVReport cross_validate(const Dataset& data, std::size_t folds,
                        const EnsembleConfig& config, std::uint64_t seed,
                        bool stratified = false);

// Mean Gini impurity decrease per feature across trees, normalized to sum 1.
std::vector<double> feature_importance(const TreeEnsemble& ensemble);
// (feature index, importance), descending, index breaks ties
std::vector<std::pair<std::size_t, double>> ranked_importance(
    const TreeEnsemble& ensemble);

// Plain-text model format; round-trip stable.
std::string ensemble_text(const TreeEnsemble& ensemble);
TreeEnsemble ensemble_from_text(const std::string& text);

}  // namespace diffwarn::learn
