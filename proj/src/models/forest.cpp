#include "atmcast/models/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atmcast/error.hpp"

namespace atmcast {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t max_depth, std::size_t max_features,
                Rng& rng)
        : X_(X), y_(y), max_depth_(max_depth), max_features_(max_features), rng_(rng),
          features_(std::size_t(X.cols()))
    {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    RegressionTree build(std::vector<std::size_t> sample)
    {
        grow(sample, 0, sample.size(), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, std::size_t depth)
    {
        const int id = int(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const std::size_t n = hi - lo;

        bool constant = true;
        double sum = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            sum += y_(Eigen::Index(idx[k]));
            constant = constant && y_(Eigen::Index(idx[k])) == y_(Eigen::Index(idx[lo]));
        }
        const double mean = sum / double(n);
        tree_.nodes[std::size_t(id)].value = constant ? y_(Eigen::Index(idx[lo])) : mean;
        if (constant || n < 2 || (max_depth_ > 0 && depth >= max_depth_)) {
            return id;
        }

        const Split best = find_split(idx, lo, hi, mean);
        if (best.feature < 0) {
            return id;
        }
        auto mid = std::stable_partition(idx.begin() + std::ptrdiff_t(lo), idx.begin() + std::ptrdiff_t(hi),
                                         [&](std::size_t i) {
                                             return X_(Eigen::Index(i), best.feature) <= best.threshold;
                                         });
        const auto split_at = std::size_t(mid - idx.begin());
        const int left = grow(idx, lo, split_at, depth + 1);
        const int right = grow(idx, split_at, hi, depth + 1);
        auto& node = tree_.nodes[std::size_t(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    Split find_split(const std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, double mean)
    {
        const std::size_t p = features_.size();
        const std::size_t draw = std::min(p, max_features_ == 0 ? (p + 2) / 3 : max_features_);
        for (std::size_t k = 0; k < draw; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, p - 1);
            std::swap(features_[k], features_[pick(rng_)]);
        }

        const std::size_t n = hi - lo;
        std::vector<std::pair<double, double>> column(n);
        Split best;
        for (std::size_t k = 0; k < draw; ++k) {
            const auto f = Eigen::Index(features_[k]);
            for (std::size_t r = 0; r < n; ++r) {
                const auto i = Eigen::Index(idx[lo + r]);
                column[r] = {X_(i, f), y_(i) - mean};
            }
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double total = 0.0;
            for (const auto& c : column) total += c.second;
            double left_sum = 0.0;
            for (std::size_t r = 0; r + 1 < n; ++r) {
                left_sum += column[r].second;
                if (column[r].first == column[r + 1].first) {
                    continue;
                }
                const double nl = double(r + 1), nr = double(n - r - 1);
                const double diff = left_sum / nl - (total - left_sum) / nr;
                const double gain = nl * nr / double(n) * diff * diff;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = int(f);
                    best.threshold = 0.5 * (column[r].first + column[r + 1].first);
                    best.left_count = r + 1;
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    std::size_t max_depth_;
    std::size_t max_features_;
    Rng& rng_;
    std::vector<std::size_t> features_;
    RegressionTree tree_;
};

} // namespace

double RegressionTree::predict(const Eigen::MatrixXd& X, Eigen::Index row) const
{
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
        const auto& n = nodes[at];
        at = std::size_t(X(row, n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes[at].value;
}

std::size_t RegressionTree::leaves() const
{
    return std::size_t(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::size_t> sample,
                         std::size_t max_depth, std::size_t max_features, Rng& rng)
{
    if (sample.empty()) {
        throw Error(ErrorKind::fit, "rf: empty training set");
    }
    return TreeBuilder(X, y, max_depth, max_features, rng).build(std::move(sample));
}

ForestModel::ForestModel(std::vector<RegressionTree> trees) : trees_(std::move(trees))
{
    if (trees_.empty()) {
        throw Error(ErrorKind::fit, "rf: forest has no trees");
    }
}

std::shared_ptr<ForestModel> ForestModel::train(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                const ForestOptions& opt)
{
    const auto n = std::size_t(X.rows());
    if (n == 0) {
        throw Error(ErrorKind::fit, "rf: empty training set");
    }
    std::vector<RegressionTree> trees;
    trees.reserve(opt.n_estimators);
    for (std::size_t t = 0; t < opt.n_estimators; ++t) {
        Rng rng(derive_seed(opt.seed, {t}));
        std::vector<std::size_t> sample(n);
        if (opt.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& s : sample) s = pick(rng);
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        trees.push_back(grow_tree(X, y, std::move(sample), opt.max_depth, opt.max_features, rng));
    }
    return std::make_shared<ForestModel>(std::move(trees));
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const
{
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        double s = 0.0;
        for (const auto& t : trees_) s += t.predict(X, r);
        out(r) = s / double(trees_.size());
    }
    return out;
}

std::size_t ForestModel::n_params() const
{
    std::size_t total = 0;
    for (const auto& t : trees_) total += t.nodes.size();
    return total;
}

json ForestModel::parameters() const
{
    json trees = json::array();
    for (const auto& t : trees_) {
        std::vector<int> feature, left, right;
        std::vector<double> threshold, value;
        for (const auto& n : t.nodes) {
            feature.push_back(n.feature);
            left.push_back(n.left);
            right.push_back(n.right);
            threshold.push_back(n.threshold);
            value.push_back(n.value);
        }
        trees.push_back(
            {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
    }
    return {{"trees", trees}};
}

std::shared_ptr<const Regressor> ForestModel::load(const json& p)
{
    std::vector<RegressionTree> trees;
    for (const auto& jt : p.at("trees")) {
        const auto feature = jt.at("feature").get<std::vector<int>>();
        const auto left = jt.at("left").get<std::vector<int>>();
        const auto right = jt.at("right").get<std::vector<int>>();
        const auto threshold = jt.at("threshold").get<std::vector<double>>();
        const auto value = jt.at("value").get<std::vector<double>>();
        const std::size_t n = feature.size();
        if (left.size() != n || right.size() != n || threshold.size() != n || value.size() != n || n == 0) {
            throw Error(ErrorKind::parse, "rf: tree arrays have inconsistent sizes");
        }
        RegressionTree t;
        for (std::size_t i = 0; i < n; ++i) {
            const bool leaf = feature[i] < 0;
            if (!leaf && (left[i] <= int(i) || right[i] <= int(i) || left[i] >= int(n) || right[i] >= int(n))) {
                throw Error(ErrorKind::parse, "rf: tree node has invalid children");
            }
            t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
        }
        trees.push_back(std::move(t));
    }
    return std::make_shared<ForestModel>(std::move(trees));
}

FittedModel fit_forest(const ModelSpec& spec, const SupervisedDataset& train)
{
    const auto& h = spec.hyper;
    const ForestOptions opt{h.at("n_estimators").get<std::size_t>(), h.at("max_depth").get<std::size_t>(),
                            h.at("max_features").get<std::size_t>(), h.at("bootstrap").get<bool>(), spec.seed};
    return FittedModel(spec, train.feature_names, ForestModel::train(train.X, train.y, opt));
}

Eigen::VectorXd fit_predict_rf(const SupervisedDataset& train, std::size_t n_estimators, std::size_t max_depth,
                               std::size_t max_features, std::uint64_t seed, const Eigen::MatrixXd& query)
{
    const ModelSpec spec{
        Family::rf,
        {{"n_estimators", n_estimators}, {"max_depth", max_depth}, {"max_features", max_features}},
        seed};
    return fit_model(spec, train).predict(query);
}

} // namespace atmcast
