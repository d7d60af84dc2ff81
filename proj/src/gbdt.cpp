#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabaug/classify.hpp"

namespace tabaug {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct SplitChoice {
    bool valid = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double regularizedScore(double g, double h, double lambda) {
    return g * g / (h + lambda);
}

class TreeBuilder {
public:
    TreeBuilder(const TabularDataset& ds, const GbdtConfig& config,
                const std::vector<double>& grad, const std::vector<double>& hess)
        : ds_(ds), config_(config), grad_(grad), hess_(hess) {}

    GbdtTree build(const std::vector<std::size_t>& samples) {
        tree_.nodes.clear();
        buildNode(samples, 0);
        return std::move(tree_);
    }

private:
    int buildNode(const std::vector<std::size_t>& samples, int depth) {
        double sumG = 0.0, sumH = 0.0;
        for (const std::size_t i : samples) {
            sumG += grad_[i];
            sumH += hess_[i];
        }
        const int nodeId = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        GbdtNode node;
        node.value = -sumG / (sumH + config_.lambda);

        if (depth < config_.maxDepth) {
            const SplitChoice split = bestSplit(samples, sumG, sumH);
            if (split.valid && split.gain > 0.0) {
                std::vector<std::size_t> left, right;
                for (const std::size_t i : samples)
                    (ds_.rows[i][static_cast<std::size_t>(split.feature)] <
                             split.threshold
                         ? left
                         : right)
                        .push_back(i);
                node.feature = split.feature;
                node.threshold = split.threshold;
                node.gain = split.gain;
                node.left = buildNode(left, depth + 1);
                node.right = buildNode(right, depth + 1);
            }
        }
        tree_.nodes[static_cast<std::size_t>(nodeId)] = node;
        return nodeId;
    }

    SplitChoice bestSplit(const std::vector<std::size_t>& samples, double sumG,
                          double sumH) const {
        SplitChoice best;
        const double parent = regularizedScore(sumG, sumH, config_.lambda);
        std::vector<std::pair<double, std::size_t>> sorted;
        for (std::size_t j = 0; j < ds_.featureCount(); ++j) {
            sorted.clear();
            for (const std::size_t i : samples)
                sorted.emplace_back(ds_.rows[i][j], i);
            std::sort(sorted.begin(), sorted.end());

            double leftG = 0.0, leftH = 0.0;
            for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
                leftG += grad_[sorted[s].second];
                leftH += hess_[sorted[s].second];
                if (sorted[s].first == sorted[s + 1].first) continue;
                const std::size_t leftCount = s + 1;
                const std::size_t rightCount = sorted.size() - leftCount;
                if (leftCount < config_.minSamplesLeaf ||
                    rightCount < config_.minSamplesLeaf)
                    continue;
                const double threshold =
                    0.5 * (sorted[s].first + sorted[s + 1].first);
                // Guard against midpoints that round onto the left value.
                if (!(sorted[s].first < threshold)) continue;
                const double gain =
                    0.5 * (regularizedScore(leftG, leftH, config_.lambda) +
                           regularizedScore(sumG - leftG, sumH - leftH,
                                            config_.lambda) -
                           parent);
                if (!best.valid || gain > best.gain) {
                    best.valid = true;
                    best.feature = static_cast<int>(j);
                    best.threshold = threshold;
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    const TabularDataset& ds_;
    const GbdtConfig& config_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    GbdtTree tree_;
};

double treeValue(const GbdtTree& tree, const std::vector<double>& row) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].isLeaf()) {
        const GbdtNode& n = tree.nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                      : n.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].value;
}

}  // namespace

double GbdtModel::predictRaw(const std::vector<double>& row) const {
    double score = baseScore;
    for (const auto& tree : trees)
        score += config.learningRate * treeValue(tree, row);
    return score;
}

double GbdtModel::predictProbability(const std::vector<double>& row) const {
    return sigmoid(predictRaw(row));
}

GbdtModel gbdtTrain(const TabularDataset& train, const GbdtConfig& config) {
    train.validate();
    const std::size_t positives = train.classCount(1);
    const std::size_t negatives = train.classCount(0);
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("gbdt_train needs both classes");
    if (config.trees < 0) throw std::invalid_argument("trees must be >= 0");
    if (config.maxDepth < 1) throw std::invalid_argument("max depth must be >= 1");
    if (config.minSamplesLeaf < 1)
        throw std::invalid_argument("min samples per leaf must be >= 1");
    if (config.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (config.learningRate <= 0.0)
        throw std::invalid_argument("learning rate must be positive");

    GbdtModel model;
    model.config = config;
    model.baseScore = std::log(static_cast<double>(positives) /
                               static_cast<double>(negatives));

    const std::size_t n = train.rowCount();
    std::vector<double> score(n, model.baseScore);
    std::vector<double> grad(n), hess(n);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});

    for (int t = 0; t < config.trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            grad[i] = p - static_cast<double>(train.labels[i]);
            hess[i] = p * (1.0 - p);
        }
        TreeBuilder builder(train, config, grad, hess);
        GbdtTree tree = builder.build(all);
        for (std::size_t i = 0; i < n; ++i)
            score[i] += config.learningRate * treeValue(tree, train.rows[i]);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> gbdtScores(const GbdtModel& model,
                               const TabularDataset& ds) {
    std::vector<double> scores;
    scores.reserve(ds.rowCount());
    for (const auto& row : ds.rows)
        scores.push_back(model.predictProbability(row));
    return scores;
}

}  // namespace tabaug
