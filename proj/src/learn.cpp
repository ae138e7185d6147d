#include "diffwarn/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "diffwarn/csv.hpp"
#include "diffwarn/rng.hpp"

namespace diffwarn::learn {

void Dataset::validate() const {
    if (rows.size() != labels.size())
        throw std::invalid_argument("dataset: rows/labels size mismatch");
    for (const auto& r : rows)
        if (r.size() != arity())
            throw std::invalid_argument("dataset: inconsistent feature arity");
    for (int l : labels)
        if (l != 0 && l != 1) throw std::invalid_argument("dataset: labels must be 0/1");
    if (!feature_names.empty() && feature_names.size() != arity())
        throw std::invalid_argument("dataset: feature name count mismatch");
}

int DecisionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        if (static_cast<std::size_t>(n.feature) >= x.size())
            throw std::invalid_argument("tree: feature arity mismatch");
        node = x[n.feature] < n.threshold ? n.left : n.right;
    }
    const TreeNode& leaf = nodes[node];
    if (leaf.count1 == leaf.count0) return 1;  // conservative tie
    return leaf.count1 > leaf.count0 ? 1 : 0;
}

namespace {

double gini(std::size_t c0, std::size_t c1) {
    const double n = static_cast<double>(c0 + c1);
    if (n == 0.0) return 0.0;
    const double p0 = static_cast<double>(c0) / n;
    const double p1 = static_cast<double>(c1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity_decrease = 0.0;  // weighted by node fraction of the root
};

// Grows one tree on the index subset; accumulates per-feature impurity
// decrease (weighted Gini gain, root-normalized) into `importance`.
class TreeBuilder {
  public:
    TreeBuilder(const Dataset& data, const EnsembleConfig& config,
                std::vector<double>& importance)
        : data_(data), config_(config), importance_(importance) {}

    DecisionTree build(std::vector<std::size_t> indices) {
        root_size_ = static_cast<double>(indices.size());
        tree_.nodes.clear();
        grow(std::move(indices), 0);
        return std::move(tree_);
    }

  private:
    int grow(std::vector<std::size_t> indices, std::size_t depth) {
        const int node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::size_t c0 = 0, c1 = 0;
        for (std::size_t i : indices) (data_.labels[i] ? c1 : c0) += 1;
        tree_.nodes[node_id].count0 = c0;
        tree_.nodes[node_id].count1 = c1;

        if (depth >= config_.max_depth || c0 == 0 || c1 == 0 ||
            indices.size() < 2 * config_.min_leaf)
            return node_id;

        const SplitChoice split = best_split(indices, c0, c1);
        if (!split.found) return node_id;

        std::vector<std::size_t> left, right;
        for (std::size_t i : indices)
            (data_.rows[i][split.feature] < split.threshold ? left : right).push_back(i);
        if (left.size() < config_.min_leaf || right.size() < config_.min_leaf)
            return node_id;

        importance_[split.feature] += split.impurity_decrease;
        tree_.nodes[node_id].feature = split.feature;
        tree_.nodes[node_id].threshold = split.threshold;
        indices.clear();
        indices.shrink_to_fit();
        const int l = grow(std::move(left), depth + 1);
        tree_.nodes[node_id].left = l;
        const int r = grow(std::move(right), depth + 1);
        tree_.nodes[node_id].right = r;
        return node_id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& indices, std::size_t c0,
                           std::size_t c1) {
        SplitChoice best;
        const double parent_gini = gini(c0, c1);
        const double n = static_cast<double>(indices.size());
        std::vector<std::pair<double, int>> column(indices.size());
        for (std::size_t f = 0; f < data_.arity(); ++f) {
            for (std::size_t k = 0; k < indices.size(); ++k)
                column[k] = {data_.rows[indices[k]][f], data_.labels[indices[k]]};
            std::sort(column.begin(), column.end());
            std::size_t l0 = 0, l1 = 0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                (column[k].second ? l1 : l0) += 1;
                if (column[k].first == column[k + 1].first) continue;
                const std::size_t left_n = k + 1;
                const std::size_t right_n = column.size() - left_n;
                if (left_n < config_.min_leaf || right_n < config_.min_leaf) continue;
                const double child =
                    (static_cast<double>(left_n) / n) * gini(l0, l1) +
                    (static_cast<double>(right_n) / n) * gini(c0 - l0, c1 - l1);
                const double gain = parent_gini - child;
                if (gain > best.impurity_decrease + 1e-15) {
                    best.found = gain > 1e-12;
                    best.feature = static_cast<int>(f);
                    best.threshold = column[k].first +
                                     (column[k + 1].first - column[k].first) / 2.0;
                    best.impurity_decrease = gain;
                }
            }
        }
        if (best.found) best.impurity_decrease *= n / root_size_;
        return best;
    }

    const Dataset& data_;
    const EnsembleConfig& config_;
    std::vector<double>& importance_;
    DecisionTree tree_;
    double root_size_ = 1.0;
};

}  // namespace

TreeEnsemble train_ensemble(const Dataset& data, const EnsembleConfig& config,
                            std::uint64_t seed) {
    data.validate();
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (config.trees == 0) throw std::invalid_argument("train: need at least one tree");
    bool has0 = false, has1 = false;
    for (int l : data.labels) (l ? has1 : has0) = true;
    if (!has0 || !has1)
        throw std::invalid_argument("train: both classes must be present");

    TreeEnsemble ens;
    ens.config = config;
    ens.seed = seed;
    ens.arity = data.arity();
    ens.feature_names = data.feature_names;
    std::vector<double> importance(data.arity(), 0.0);
    for (std::size_t b = 0; b < config.trees; ++b) {
        RngStream rng(derive_seed(seed, b));
        std::vector<std::size_t> boot(data.size());
        for (auto& i : boot) i = rng.uniform_index(data.size());
        TreeBuilder builder(data, config, importance);
        ens.trees.push_back(builder.build(std::move(boot)));
    }
    return ens;
}

int predict(const TreeEnsemble& ensemble, std::span<const double> x) {
    return predict_proba(ensemble, x) >= 0.5 ? 1 : 0;
}

double predict_proba(const TreeEnsemble& ensemble, std::span<const double> x) {
    if (x.size() != ensemble.arity)
        throw std::invalid_argument("predict: feature arity mismatch");
    std::size_t votes = 0;
    for (const auto& t : ensemble.trees) votes += t.predict(x);
    return static_cast<double>(votes) / static_cast<double>(ensemble.trees.size());
}

std::vector<double> feature_importance(const TreeEnsemble& ensemble) {
    // recompute by replaying the stored trees' split structure
    std::vector<double> imp(ensemble.arity, 0.0);
    for (const auto& tree : ensemble.trees) {
        // per-node impurity decrease from stored class counts
        for (const auto& n : tree.nodes) {
            if (n.feature < 0) continue;
            const auto& l = tree.nodes[n.left];
            const auto& r = tree.nodes[n.right];
            const double nn = static_cast<double>(n.count0 + n.count1);
            const double root =
                static_cast<double>(tree.nodes[0].count0 + tree.nodes[0].count1);
            const double child =
                (static_cast<double>(l.count0 + l.count1) / nn) * gini(l.count0, l.count1) +
                (static_cast<double>(r.count0 + r.count1) / nn) * gini(r.count0, r.count1);
            imp[n.feature] += (gini(n.count0, n.count1) - child) * (nn / root);
        }
    }
    double total = 0.0;
    for (double v : imp) total += v;
    if (total > 0.0)
        for (double& v : imp) v /= total;
    return imp;
}

std::vector<std::pair<std::size_t, double>> ranked_importance(
    const TreeEnsemble& ensemble) {
    const auto imp = feature_importance(ensemble);
    std::vector<std::pair<std::size_t, double>> ranked;
    for (std::size_t f = 0; f < imp.size(); ++f) ranked.emplace_back(f, imp[f]);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second > b.second;
    });
    return ranked;
}

CVReport cross_validate(const Dataset& data, std::size_t folds,
                        const EnsembleConfig& config, std::uint64_t seed,
                        bool stratified) {
    data.validate();
    if (folds < 2) throw std::invalid_argument("cv: need at least 2 folds");
    if (folds > data.size()) throw std::invalid_argument("cv: more folds than rows");

    // random permutation, then fold k gets rows k, k+folds, ... (equal sizes,
    // remainder spread round-robin)
    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), 0);
    RngStream rng(derive_seed(seed, 0xCF));
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    if (stratified) {
        std::vector<std::size_t> by_class[2];
        for (std::size_t i : perm) by_class[data.labels[i]].push_back(i);
        perm.clear();
        for (std::size_t k = 0; k < by_class[0].size() || k < by_class[1].size(); ++k) {
            if (k < by_class[1].size()) perm.push_back(by_class[1][k]);
            if (k < by_class[0].size()) perm.push_back(by_class[0][k]);
        }
    }
    std::vector<std::vector<std::size_t>> fold_rows(folds);
    for (std::size_t k = 0; k < perm.size(); ++k) fold_rows[k % folds].push_back(perm[k]);

    CVReport report;
    report.importance.assign(data.arity(), 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        Dataset train;
        train.feature_names = data.feature_names;
        for (std::size_t k = 0; k < folds; ++k) {
            if (k == f) continue;
            for (std::size_t i : fold_rows[k]) {
                train.rows.push_back(data.rows[i]);
                train.labels.push_back(data.labels[i]);
            }
        }
        const TreeEnsemble ens = train_ensemble(train, config, derive_seed(seed, 1 + f));
        std::size_t correct = 0;
        for (std::size_t i : fold_rows[f])
            if (predict(ens, data.rows[i]) == data.labels[i]) ++correct;
        report.fold_accuracy.push_back(
            fold_rows[f].empty()
                ? 0.0
                : static_cast<double>(correct) / static_cast<double>(fold_rows[f].size()));
        const auto imp = feature_importance(ens);
        for (std::size_t j = 0; j < imp.size(); ++j) report.importance[j] += imp[j];
    }
    double total = 0.0;
    for (double a : report.fold_accuracy) total += a;
    report.mean_accuracy = total / static_cast<double>(folds);
    double imp_total = 0.0;
    for (double v : report.importance) imp_total += v;
    if (imp_total > 0.0)
        for (double& v : report.importance) v /= imp_total;
    return report;
}

std::string ensemble_text(const TreeEnsemble& ensemble) {
    std::string s = "ensemble trees=" + std::to_string(ensemble.trees.size()) +
                    " max_depth=" + std::to_string(ensemble.config.max_depth) +
                    " min_leaf=" + std::to_string(ensemble.config.min_leaf) +
                    " seed=" + std::to_string(ensemble.seed) +
                    " arity=" + std::to_string(ensemble.arity) + "\n";
    s += "features";
    for (const auto& name : ensemble.feature_names) s += " " + name;
    s += "\n";
    for (const auto& tree : ensemble.trees) {
        s += "tree " + std::to_string(tree.nodes.size()) + "\n";
        for (const auto& n : tree.nodes)
            s += std::to_string(n.feature) + " " + fmt_double(n.threshold) + " " +
                 std::to_string(n.left) + " " + std::to_string(n.right) + " " +
                 std::to_string(n.count0) + " " + std::to_string(n.count1) + "\n";
    }
    return s;
}

TreeEnsemble ensemble_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    TreeEnsemble ens;
    std::size_t tree_count = 0;
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("model: empty text");
    {
        std::istringstream hs(header);
        hs >> tag;
        if (tag != "ensemble") throw std::invalid_argument("model: bad header");
        std::string kv;
        while (hs >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("model: bad header field");
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "trees") tree_count = std::stoull(val);
            else if (key == "max_depth") ens.config.max_depth = std::stoull(val);
            else if (key == "min_leaf") ens.config.min_leaf = std::stoull(val);
            else if (key == "seed") ens.seed = std::stoull(val);
            else if (key == "arity") ens.arity = std::stoull(val);
        }
        ens.config.trees = tree_count;
    }
    std::string feature_line;
    if (!std::getline(in, feature_line)) throw std::invalid_argument("model: missing features");
    {
        std::istringstream fs(feature_line);
        fs >> tag;
        if (tag != "features") throw std::invalid_argument("model: bad features line");
        std::string name;
        while (fs >> name) ens.feature_names.push_back(name);
    }
    for (std::size_t t = 0; t < tree_count; ++t) {
        std::size_t nodes = 0;
        if (!(in >> tag >> nodes) || tag != "tree")
            throw std::invalid_argument("model: bad tree header");
        DecisionTree tree;
        tree.nodes.resize(nodes);
        for (auto& n : tree.nodes)
            if (!(in >> n.feature >> n.threshold >> n.left >> n.right >> n.count0 >>
                  n.count1))
                throw std::invalid_argument("model: bad node line");
        ens.trees.push_back(std::move(tree));
    }
    return ens;
}

}  // namespace diffwarn::learn
