#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "diffwarn/learn.hpp"
#include "diffwarn/rng.hpp"

using namespace diffwarn;
using namespace diffwarn::learn;

namespace {

Dataset threshold_dataset(std::size_t n, double split, std::uint64_t seed) {
    Dataset d;
    d.feature_names = {"x"};
    RngStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform();
        d.rows.push_back({x});
        d.labels.push_back(x >= split ? 1 : 0);
    }
    return d;
}

Dataset xor_dataset(std::size_t per_cluster, std::uint64_t seed) {
    Dataset d;
    d.feature_names = {"x", "y"};
    RngStream rng(seed);
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
            for (std::size_t i = 0; i < per_cluster; ++i) {
                d.rows.push_back({cx + rng.uniform(-0.2, 0.2),
                                  cy + rng.uniform(-0.2, 0.2)});
                d.labels.push_back(cx ^ cy);
            }
    return d;
}

double training_accuracy(const TreeEnsemble& ens, const Dataset& d) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (predict(ens, d.rows[i]) == d.labels[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(d.size());
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("a single tree separates threshold data perfectly") {
    const Dataset d = threshold_dataset(200, 0.55, 7);
    const TreeEnsemble ens = train_ensemble(d, {1, 4, 1}, 3);
    CHECK(training_accuracy(ens, d) == 1.0);
}

TEST_CASE("training rejects degenerate inputs") {
    Dataset empty;
    CHECK_THROWS_AS(train_ensemble(empty, {}, 0), std::invalid_argument);
    Dataset single;
    single.rows = {{1.0}, {2.0}};
    single.labels = {1, 1};
    CHECK_THROWS_AS(train_ensemble(single, {}, 0), std::invalid_argument);
}

TEST_CASE("pure bootstrap samples yield single-leaf constant trees") {
    // one minority row: many bootstrap draws are single-class, and those
    // trees must degenerate to one leaf predicting the constant
    Dataset d;
    d.rows.assign(40, {0.5});
    d.labels.assign(40, 1);
    d.rows.push_back({0.5});
    d.labels.push_back(0);
    const TreeEnsemble ens = train_ensemble(d, {30, 6, 2}, 5);
    bool saw_single_leaf = false;
    for (const auto& tree : ens.trees)
        if (tree.nodes.size() == 1) {
            saw_single_leaf = true;
            CHECK(tree.nodes[0].count1 >= tree.nodes[0].count0);
            CHECK(tree.predict(std::vector<double>{0.5}) == 1);
        }
    CHECK(saw_single_leaf);
    CHECK(predict(ens, std::vector<double>{0.5}) == 1);
}

TEST_CASE("xor is learnable at depth two") {
    // min_leaf keeps edge-fluke splits out, so bootstrap imbalance steers
    // enough roots to the cluster boundary for the vote to settle xor
    const Dataset d = xor_dataset(30, 11);
    const TreeEnsemble ens = train_ensemble(d, {60, 2, 8}, 13);
    CHECK(training_accuracy(ens, d) >= 0.95);
}

TEST_CASE("votes, probabilities and the alarming tie rule") {
    const Dataset d = threshold_dataset(100, 0.5, 9);
    const TreeEnsemble ens = train_ensemble(d, {7, 4, 1}, 21);
    // manual vote count equals predict_proba
    const std::vector<double> x = {0.7};
    std::size_t votes = 0;
    for (const auto& t : ens.trees) votes += t.predict(x);
    CHECK(predict_proba(ens, x) ==
          doctest::Approx(static_cast<double>(votes) / 7.0));

    // all trees agreeing gives probability exactly 0 or 1
    const double lo = predict_proba(ens, std::vector<double>{0.05});
    const double hi = predict_proba(ens, std::vector<double>{0.95});
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);

    // a split vote resolves to alarming
    TreeEnsemble two;
    two.arity = 1;
    two.config.trees = 2;
    DecisionTree yes, no;
    yes.nodes.push_back({-1, 0.0, -1, -1, 0, 5});
    no.nodes.push_back({-1, 0.0, -1, -1, 5, 0});
    two.trees = {yes, no};
    CHECK(predict_proba(two, std::vector<double>{0.0}) == 0.5);
    CHECK(predict(two, std::vector<double>{0.0}) == 1);

    CHECK_THROWS_AS(predict(ens, std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("training and prediction are deterministic given the seed") {
    const Dataset d = xor_dataset(25, 3);
    const TreeEnsemble a = train_ensemble(d, {20, 5, 2}, 777);
    const TreeEnsemble b = train_ensemble(d, {20, 5, 2}, 777);
    CHECK(ensemble_text(a) == ensemble_text(b));
}

TEST_CASE("cross validation on separable and random labels") {
    const Dataset sep = threshold_dataset(120, 0.5, 15);
    const CVReport good = cross_validate(sep, 6, {25, 4, 2}, 2);
    CHECK(good.fold_accuracy.size() == 6);
    CHECK(good.mean_accuracy >= 0.95);
    CHECK(good.mean_accuracy <= 1.0);

    // random labels on 200 balanced rows hover near chance
    Dataset noise;
    noise.feature_names = {"a", "b"};
    RngStream rng(31);
    for (int i = 0; i < 200; ++i) {
        noise.rows.push_back({rng.uniform(), rng.uniform()});
        noise.labels.push_back(i % 2);
    }
    // shuffle labels against rows
    for (std::size_t i = noise.labels.size(); i > 1; --i)
        std::swap(noise.labels[i - 1], noise.labels[rng.uniform_index(i)]);
    const CVReport null = cross_validate(noise, 5, {25, 4, 2}, 8);
    CHECK(std::abs(null.mean_accuracy - 0.5) <= 0.15);

    // leave-one-out runs one fold per row
    const Dataset tiny = threshold_dataset(12, 0.5, 77);
    const CVReport loo = cross_validate(tiny, 12, {9, 3, 1}, 5);
    CHECK(loo.fold_accuracy.size() == 12);

    CHECK_THROWS_AS(cross_validate(tiny, 13, {5, 3, 1}, 5), std::invalid_argument);
    CHECK_THROWS_AS(cross_validate(tiny, 1, {5, 3, 1}, 5), std::invalid_argument);
}

TEST_CASE("feature importance") {
    // single informative feature takes importance 1
    const Dataset d = threshold_dataset(150, 0.5, 19);
    const TreeEnsemble ens = train_ensemble(d, {15, 4, 2}, 23);
    const auto imp = feature_importance(ens);
    REQUIRE(imp.size() == 1);
    CHECK(imp[0] == doctest::Approx(1.0));

    // an appended pure-noise feature stays below the informative one
    // (majority over 20 seeds)
    int informative_wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Dataset noisy = threshold_dataset(150, 0.5, 100 + seed);
        noisy.feature_names = {"x", "noise"};
        RngStream rng(seed);
        for (auto& row : noisy.rows) row.push_back(rng.uniform());
        const TreeEnsemble e2 = train_ensemble(noisy, {15, 4, 2}, 55 + seed);
        const auto imp2 = feature_importance(e2);
        if (imp2[0] > imp2[1]) ++informative_wins;
    }
    CHECK(informative_wins >= 11);

    // unused features score zero and the ranking is importance-descending
    Dataset with_constant = threshold_dataset(150, 0.5, 3);
    with_constant.feature_names = {"x", "constant"};
    for (auto& row : with_constant.rows) row.push_back(1.0);
    const TreeEnsemble e3 = train_ensemble(with_constant, {15, 4, 2}, 5);
    const auto imp3 = feature_importance(e3);
    CHECK(imp3[1] == 0.0);
    const auto ranked = ranked_importance(e3);
    CHECK(ranked[0].first == 0);
    double total = 0.0;
    for (const auto& [f, v] : ranked) total += v;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("single trees are invariant under monotone feature transforms") {
    // threshold splits are rank-based, so on the fixture rows themselves the
    // warped tree routes every point identically
    const Dataset d = threshold_dataset(100, 0.45, 29);
    Dataset warped = d;
    for (auto& row : warped.rows) row[0] = std::exp(3.0 * row[0]);  // monotone

    const TreeEnsemble plain = train_ensemble(d, {1, 5, 1}, 7);
    const TreeEnsemble trans = train_ensemble(warped, {1, 5, 1}, 7);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(plain.trees[0].predict(d.rows[i]) ==
              trans.trees[0].predict(warped.rows[i]));
}

TEST_CASE("model text serialization round trips") {
    const Dataset d = xor_dataset(20, 51);
    const TreeEnsemble ens = train_ensemble(d, {12, 4, 2}, 61);
    const std::string text = ensemble_text(ens);
    const TreeEnsemble back = ensemble_from_text(text);
    CHECK(ensemble_text(back) == text);
    RngStream rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> x = {rng.uniform(-0.3, 1.3), rng.uniform(-0.3, 1.3)};
        CHECK(predict(back, x) == predict(ens, x));
        CHECK(predict_proba(back, x) == predict_proba(ens, x));
    }
    CHECK_THROWS_AS(ensemble_from_text("garbage"), std::invalid_argument);
}

}  // TEST_SUITE
