#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabaug/dataset.hpp"
#include "tabaug/embedding.hpp"
#include "tabaug/genmodels.hpp"
#include "tabaug/nn.hpp"
#include "tabaug/oversample.hpp"
#include "tabaug/pixelmap.hpp"

namespace tabaug {

/// Probability that a random positive outranks a random negative, ties
/// counted 1/2; O(N log N) rank statistic. Throws if a class is missing.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Second-order gradient-boosted trees on logistic loss.

struct GbdtConfig {
    int trees = 100;
    int maxDepth = 3;
    double learningRate = 0.1;
    std::size_t minSamplesLeaf = 1;
    double lambda = 1.0;  // L2 leaf regularization
    std::uint64_t seed = 0;
};

struct GbdtNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // unshrunk leaf weight -G/(H+lambda)

    bool isLeaf() const { return feature < 0; }
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;  // node 0 is the root
};

struct GbdtModel {
    GbdtConfig config;
    double baseScore = 0.0;  // class prior log-odds
    std::vector<GbdtTree> trees;

    double predictRaw(const std::vector<double>& row) const;
    double predictProbability(const std::vector<double>& row) const;
};

/// Exact greedy splits over sorted feature values; gain and leaf weights
/// follow the second-order formulas with L2 regularization.
GbdtModel gbdtTrain(const TabularDataset& train, const GbdtConfig& config);

std::vector<double> gbdtScores(const GbdtModel& model,
                               const TabularDataset& ds);

// ---------------------------------------------------------------------------
// CNN over transformed images.

struct ConvBlockSpec {
    std::size_t channels = 8;
    std::size_t kernel = 3;
};

struct CnnConfig {
    std::vector<ConvBlockSpec> convBlocks = {{8, 3}, {16, 3}};
    std::vector<std::size_t> denseWidths = {64};
    std::size_t batchSize = 32;
    int epochs = 30;
    double learningRate = 1e-3;
    std::uint64_t seed = 0;
};

struct CnnModel {
    CnnConfig config;
    int gridSize = 0;
    Network network;
};

/// Stride-2 conv blocks with relu, then the dense head; trained with
/// cross-entropy. Deterministic for a fixed config.
CnnModel cnnTrain(const std::vector<ImageSample>& images,
                  const CnnConfig& config);

/// Positive-class probabilities.
std::vector<double> cnnScores(const CnnModel& model,
                              const std::vector<ImageSample>& images);

// ---------------------------------------------------------------------------
// Cross-validation harness.

enum class AugmenterKind { None, Smote, Adasyn, Cgan, Vqvae, Vqgan };
enum class ClassifierKind { Gbdt, Cnn };

std::string augmenterName(AugmenterKind kind);
std::string classifierName(ClassifierKind kind);

struct PipelineConfig {
    AugmenterKind augmenter = AugmenterKind::None;
    ClassifierKind classifier = ClassifierKind::Gbdt;
    int gridSize = 16;
    EmbeddingConfig embedding;
    OversampleConfig oversample;
    GbdtConfig gbdt;
    CnnConfig cnn;
    CganConfig cgan;
    VqvaeConfig vqvae;
    PixelCnnConfig vqvaePrior;
    VqganConfig vqgan;
    std::uint64_t seed = 0;
    /// Report label; empty derives one like "XGBoost w/o Augmentation".
    std::string methodLabel;
};

struct EvalResult {
    std::string method;
    std::vector<double> foldAucs;
    double meanAuc = 0.0;
    double stdAuc = 0.0;  // sample standard deviation
};

EvalResult summarizeAucs(const std::vector<double>& aucs, std::string method);

/// "<method>, <dataset>: 0.7384 ± 0.0114"
std::string formatReportRow(const EvalResult& result,
                            const std::string& datasetName);

struct FoldRecord {
    int fold = 0;
    double aucValue = 0.0;
    std::size_t trainRows = 0;
    std::size_t testRows = 0;
    std::size_t syntheticRows = 0;
    /// Content hash of the held-out partition as scored; equals the hash of
    /// selectRows on the input dataset, which is the no-leak evidence.
    std::uint64_t testContentHash = 0;
    std::vector<double> testScores;
    std::vector<int> testLabels;
};

struct CrossValidationOutcome {
    EvalResult eval;
    std::vector<FoldRecord> folds;
};

/// Fits normalization, the feature embedding, and the pixel mapping on
/// `train` alone; `seed` scopes the embedding's random stream.
PixelMapping fitFoldMapping(const TabularDataset& train,
                            const PipelineConfig& pipeline,
                            std::uint64_t seed);

/// Closes the class gap of `train` in place per the configured augmenter
/// (raw feature space); generative kinds also return the decoded synthetic
/// images, which need a fitted `mapping`.
std::vector<ImageSample> augmentTraining(TabularDataset& train,
                                         const PixelMapping& mapping,
                                         const PipelineConfig& pipeline,
                                         std::uint64_t seed);

/// Per fold: fit normalization, feature embedding, pixel mapping, augmenter
/// and classifier on the training partition only, then score the held-out
/// fold. Synthetic rows never reach the test partition. Any stage failure is
/// rethrown with the fold index.
CrossValidationOutcome crossValidate(const TabularDataset& ds,
                                     const FoldSplit& folds,
                                     const PipelineConfig& pipeline);

struct GridSearchOutcome {
    CnnConfig best;
    std::size_t bestIndex = 0;
    std::vector<double> meanAucs;
};

/// Exhaustive evaluation of each candidate by cross-validated AUC with the
/// CNN classifier; ties keep the earliest lattice entry.
GridSearchOutcome gridSearchCnn(const TabularDataset& ds,
                                const FoldSplit& folds,
                                const std::vector<CnnConfig>& grid,
                                const PipelineConfig& base);

/// batch {32,64} x conv blocks {1,2} x dense width {64,128}.
std::vector<CnnConfig> defaultCnnGrid(std::uint64_t seed);

}  // namespace tabaug
