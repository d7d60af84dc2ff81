#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tabaug/classify.hpp"

using namespace tabaug;

namespace {

std::vector<ImageSample> cornerImages(std::size_t n, int grid, double noise,
                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ImageSample> images;
    for (std::size_t i = 0; i < n; ++i) {
        ImageSample img;
        img.gridSize = grid;
        img.label = static_cast<int>(i % 2);
        img.pixels.assign(static_cast<std::size_t>(grid) * grid, 0.15);
        for (int r = 0; r < grid / 2; ++r)
            for (int c = 0; c < grid / 2; ++c) {
                if (img.label == 1)
                    img.at(r, c) = 0.75;
                else
                    img.at(grid - 1 - r, grid - 1 - c) = 0.75;
            }
        for (auto& p : img.pixels)
            p = std::clamp(p + noise * (rng.uniform() - 0.5), 0.0, 1.0);
        images.push_back(img);
    }
    return images;
}

CnnConfig smallCnn() {
    CnnConfig cfg;
    cfg.convBlocks = {{4, 3}};
    cfg.denseWidths = {16};
    cfg.batchSize = 16;
    cfg.epochs = 30;
    cfg.learningRate = 3e-3;
    return cfg;
}

/// Gain of splitting `samples` on (feature, threshold) from first principles,
/// with gradients taken at the prior score.
double firstTreeGain(const TabularDataset& ds, double base, double lambda,
                     std::size_t feature, double threshold) {
    const double p = 1.0 / (1.0 + std::exp(-base));
    double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
    for (std::size_t i = 0; i < ds.rowCount(); ++i) {
        const double g = p - ds.labels[i];
        const double h = p * (1.0 - p);
        if (ds.rows[i][feature] < threshold) {
            gl += g;
            hl += h;
        } else {
            gr += g;
            hr += h;
        }
    }
    const double total = (gl + gr) * (gl + gr) / (hl + hr + lambda);
    return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - total);
}

}  // namespace

TEST_CASE("auc scores separable, mixed, and tied rankings") {
    CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == doctest::Approx(0.75));
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK(auc({0.9, 0.1}, {0, 1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {0}), std::invalid_argument);
}

TEST_CASE("auc agrees with the pairwise oracle on random tied instances") {
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.index(40);
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            // A coarse score lattice forces plenty of exact ties.
            scores.push_back(static_cast<double>(rng.index(6)) / 5.0);
            labels.push_back(static_cast<int>(rng.index(2)));
        }
        labels[0] = 0;
        labels[1] = 1;
        CHECK(std::abs(auc(scores, labels) - testutil::pairwiseAuc(scores, labels)) <=
              1e-12);
    }
}

TEST_CASE("auc is invariant under strictly increasing score transforms") {
    Rng rng(88);
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < 60; ++i) {
        scores.push_back(static_cast<double>(rng.index(10)));
        labels.push_back(static_cast<int>(rng.index(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    const double reference = auc(scores, labels);

    std::vector<double> affine = scores, expd = scores, arctan = scores;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        affine[i] = 3.0 * scores[i] + 7.0;
        expd[i] = std::exp(scores[i] * 0.25);
        arctan[i] = std::atan(scores[i] - 4.0);
    }
    CHECK(auc(affine, labels) == reference);
    CHECK(auc(expd, labels) == reference);
    CHECK(auc(arctan, labels) == reference);
}

TEST_CASE("gbdt stump separates one-feature threshold data") {
    TabularDataset ds;
    ds.featureNames = {"x"};
    for (int i = 0; i < 20; ++i) {
        const bool high = i % 2 == 1;
        ds.rows.push_back({high ? 1.0 + 0.1 * i : -1.0 - 0.1 * i});
        ds.labels.push_back(high ? 1 : 0);
    }
    GbdtConfig cfg;
    cfg.trees = 10;
    cfg.maxDepth = 1;
    const GbdtModel model = gbdtTrain(ds, cfg);
    CHECK(auc(gbdtScores(model, ds), ds.labels) == doctest::Approx(1.0));
}

TEST_CASE("gbdt zero trees scores the class prior log-odds") {
    TabularDataset ds;
    ds.featureNames = {"a", "b"};
    Rng rng(9);
    for (int i = 0; i < 12; ++i) {
        ds.rows.push_back({rng.uniform(), rng.uniform()});
        ds.labels.push_back(i < 4 ? 1 : 0);
    }
    GbdtConfig cfg;
    cfg.trees = 0;
    const GbdtModel model = gbdtTrain(ds, cfg);
    const double prior = std::log(4.0 / 8.0);
    const double priorProb = 1.0 / (1.0 + std::exp(-prior));
    CHECK(model.baseScore == doctest::Approx(prior).epsilon(1e-12));
    for (const auto& row : ds.rows) {
        CHECK(model.predictRaw(row) == prior);
        CHECK(model.predictProbability(row) == doctest::Approx(priorProb));
    }
}

TEST_CASE("gbdt reproduces the hand-computed split on four rows") {
    // x = 1,2,3,4 with labels 0,0,1,1 and lambda = 1. At the prior (log-odds
    // 0) every g is +-1/2 and every h is 1/4, so the three candidate gains are
    // 1/2*(1/4/(5/4) + 1/4/(7/4)) = 0.1714..., 1/2*(1/(3/2) + 1/(3/2)) = 2/3,
    // and 0.1714... again; the winner splits at 2.5 with leaves -+2/3.
    TabularDataset ds;
    ds.featureNames = {"x"};
    ds.rows = {{1.0}, {2.0}, {3.0}, {4.0}};
    ds.labels = {0, 0, 1, 1};
    GbdtConfig cfg;
    cfg.trees = 1;
    cfg.maxDepth = 1;
    cfg.lambda = 1.0;
    cfg.learningRate = 0.3;
    const GbdtModel model = gbdtTrain(ds, cfg);

    REQUIRE(model.trees.size() == 1);
    const GbdtTree& tree = model.trees[0];
    REQUIRE(tree.nodes.size() == 3);
    const GbdtNode& root = tree.nodes[0];
    CHECK_FALSE(root.isLeaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(root.gain == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(tree.nodes[root.left].value == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(tree.nodes[root.right].value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(model.baseScore == doctest::Approx(0.0));
    CHECK(model.predictRaw(ds.rows[0]) ==
          doctest::Approx(0.3 * -2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gbdt root split matches brute-force gain enumeration") {
    const TabularDataset ds = synthImbalanced(18, 9, 3, 1.5, 77);
    GbdtConfig cfg;
    cfg.trees = 1;
    cfg.maxDepth = 1;
    cfg.lambda = 2.0;
    const GbdtModel model = gbdtTrain(ds, cfg);
    const GbdtNode& root = model.trees[0].nodes[0];
    REQUIRE_FALSE(root.isLeaf());

    double bestGain = -1.0;
    std::size_t bestFeature = 0;
    double bestThreshold = 0.0;
    for (std::size_t j = 0; j < ds.featureCount(); ++j) {
        std::vector<double> values;
        for (const auto& row : ds.rows) values.push_back(row[j]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t v = 0; v + 1 < values.size(); ++v) {
            const double threshold = 0.5 * (values[v] + values[v + 1]);
            const double gain =
                firstTreeGain(ds, model.baseScore, cfg.lambda, j, threshold);
            if (gain > bestGain) {
                bestGain = gain;
                bestFeature = j;
                bestThreshold = threshold;
            }
        }
    }
    CHECK(root.gain == doctest::Approx(bestGain).epsilon(1e-12));
    CHECK(static_cast<std::size_t>(root.feature) == bestFeature);
    CHECK(root.threshold == doctest::Approx(bestThreshold).epsilon(1e-12));
}

TEST_CASE("gbdt degenerates to the prior on constant features") {
    TabularDataset ds;
    ds.featureNames = {"c1", "c2"};
    for (int i = 0; i < 10; ++i) {
        ds.rows.push_back({3.0, -1.0});
        ds.labels.push_back(i < 3 ? 1 : 0);
    }
    GbdtConfig cfg;
    cfg.trees = 5;
    const GbdtModel model = gbdtTrain(ds, cfg);
    REQUIRE(model.trees.size() == 5);
    for (const auto& tree : model.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].isLeaf());
        CHECK(tree.nodes[0].value == doctest::Approx(0.0).epsilon(1e-12));
    }
    for (const auto& row : ds.rows)
        CHECK(model.predictRaw(row) == doctest::Approx(model.baseScore));
}

TEST_CASE("gbdt validates configuration and class balance") {
    TabularDataset ds;
    ds.featureNames = {"x"};
    ds.rows = {{0.0}, {1.0}, {2.0}, {3.0}};
    ds.labels = {0, 0, 1, 1};

    GbdtConfig bad;
    bad.maxDepth = 0;
    CHECK_THROWS_AS(gbdtTrain(ds, bad), std::invalid_argument);
    bad = GbdtConfig{};
    bad.learningRate = 0.0;
    CHECK_THROWS_AS(gbdtTrain(ds, bad), std::invalid_argument);
    bad = GbdtConfig{};
    bad.lambda = -0.5;
    CHECK_THROWS_AS(gbdtTrain(ds, bad), std::invalid_argument);

    TabularDataset oneClass = ds;
    oneClass.labels = {0, 0, 0, 0};
    CHECK_THROWS_AS(gbdtTrain(oneClass, GbdtConfig{}), std::invalid_argument);
}

TEST_CASE("cnn memorizes distinguishable training images") {
    const auto images = cornerImages(50, 8, 0.2, 11);
    CnnConfig cfg = smallCnn();
    cfg.convBlocks = {{8, 3}};
    cfg.denseWidths = {32};
    cfg.epochs = 40;
    cfg.learningRate = 1e-3;
    cfg.seed = 3;
    const CnnModel model = cnnTrain(images, cfg);
    const auto scores = cnnScores(model, images);
    for (std::size_t i = 0; i < images.size(); ++i)
        CHECK((scores[i] > 0.5) == (images[i].label == 1));
}

TEST_CASE("cnn on identical images converges to the class prior") {
    std::vector<ImageSample> images;
    for (int i = 0; i < 12; ++i) {
        ImageSample img;
        img.gridSize = 4;
        img.pixels.assign(16, 0.5);
        img.label = i < 3 ? 1 : 0;
        images.push_back(img);
    }
    CnnConfig cfg;
    cfg.convBlocks = {{4, 3}};
    cfg.denseWidths = {8};
    cfg.batchSize = 12;
    cfg.epochs = 300;
    cfg.learningRate = 1e-2;
    cfg.seed = 5;
    const CnnModel model = cnnTrain(images, cfg);
    for (const double score : cnnScores(model, images))
        CHECK(score == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("cnn training is seed-deterministic") {
    const auto images = cornerImages(20, 8, 0.3, 6);
    CnnConfig cfg = smallCnn();
    cfg.epochs = 8;
    cfg.seed = 42;
    const auto a = cnnScores(cnnTrain(images, cfg), images);
    const auto b = cnnScores(cnnTrain(images, cfg), images);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    cfg.seed = 43;
    const auto c = cnnScores(cnnTrain(images, cfg), images);
    double delta = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) delta += std::abs(a[i] - c[i]);
    CHECK(delta > 0.0);
}

TEST_CASE("cnn rejects bad configurations and aborts on divergence") {
    const auto images = cornerImages(8, 8, 0.0, 7);

    CnnConfig noConv = smallCnn();
    noConv.convBlocks.clear();
    CHECK_THROWS_AS(cnnTrain(images, noConv), std::invalid_argument);

    CnnConfig noDense = smallCnn();
    noDense.denseWidths.clear();
    CHECK_THROWS_AS(cnnTrain(images, noDense), std::invalid_argument);

    auto oneClass = images;
    for (auto& img : oneClass) img.label = 0;
    CHECK_THROWS_AS(cnnTrain(oneClass, smallCnn()), std::invalid_argument);

    auto mixedGrids = images;
    mixedGrids[1].gridSize = 4;
    mixedGrids[1].pixels.assign(16, 0.0);
    CHECK_THROWS_AS(cnnTrain(mixedGrids, smallCnn()), std::invalid_argument);

    CnnConfig exploding;
    exploding.convBlocks = {{4, 3}, {8, 3}};
    exploding.denseWidths = {16, 16};
    exploding.batchSize = 8;
    exploding.epochs = 4;
    exploding.learningRate = 1e100;
    exploding.seed = 1;
    bool aborted = false;
    try {
        cnnTrain(images, exploding);
    } catch (const std::runtime_error& e) {
        aborted = std::string(e.what()).find("non-finite") != std::string::npos;
    }
    CHECK(aborted);
}

TEST_CASE("cross-validation scores a separable baseline near one") {
    const TabularDataset ds = synthImbalanced(60, 24, 4, 10.0, 5);
    const FoldSplit folds = kfoldSplit(ds, 5, 21);
    PipelineConfig pipeline;
    pipeline.augmenter = AugmenterKind::None;
    pipeline.classifier = ClassifierKind::Gbdt;
    pipeline.seed = 13;
    const CrossValidationOutcome outcome = crossValidate(ds, folds, pipeline);

    CHECK(outcome.eval.meanAuc > 0.95);
    CHECK(outcome.eval.method == "XGBoost w/o Augmentation");
    REQUIRE(outcome.folds.size() == 5);
    std::size_t testTotal = 0;
    for (const auto& fold : outcome.folds) {
        CHECK(fold.aucValue >= 0.0);
        CHECK(fold.aucValue <= 1.0);
        CHECK(fold.syntheticRows == 0);
        CHECK(fold.trainRows + fold.testRows == ds.rowCount());
        testTotal += fold.testRows;
    }
    CHECK(testTotal == ds.rowCount());
}

TEST_CASE("cross-validation statistics recompute from the fold list") {
    const TabularDataset ds = synthImbalanced(30, 12, 3, 2.0, 29);
    const FoldSplit folds = kfoldSplit(ds, 4, 3);
    PipelineConfig pipeline;
    pipeline.classifier = ClassifierKind::Gbdt;
    pipeline.gbdt.trees = 20;
    pipeline.seed = 7;
    const CrossValidationOutcome outcome = crossValidate(ds, folds, pipeline);

    REQUIRE(outcome.eval.foldAucs.size() == 4);
    double mean = 0.0;
    for (const double a : outcome.eval.foldAucs) mean += a;
    mean /= 4.0;
    double sq = 0.0;
    for (const double a : outcome.eval.foldAucs) sq += (a - mean) * (a - mean);
    const double sd = std::sqrt(sq / 3.0);
    CHECK(std::abs(outcome.eval.meanAuc - mean) <= 1e-12);
    CHECK(std::abs(outcome.eval.stdAuc - sd) <= 1e-12);
    for (std::size_t f = 0; f < outcome.folds.size(); ++f) {
        CHECK(outcome.folds[f].aucValue == outcome.eval.foldAucs[f]);
        CHECK(auc(outcome.folds[f].testScores, outcome.folds[f].testLabels) ==
              outcome.folds[f].aucValue);
    }
}

TEST_CASE("report rows match the published table layout") {
    EvalResult result;
    result.method = "XGBoost w/o Augmentation";
    result.meanAuc = 0.7384;
    result.stdAuc = 0.0114;
    CHECK(formatReportRow(result, "nuMoM2b") ==
          "XGBoost w/o Augmentation, nuMoM2b: 0.7384 ± 0.0114");

    result.method = "CNN + SMOTE";
    result.meanAuc = 1.0;
    result.stdAuc = 0.0;
    CHECK(formatReportRow(result, "synth") == "CNN + SMOTE, synth: 1.0000 ± 0.0000");
}

TEST_CASE("synthetic rows never reach the held-out partition") {
    const TabularDataset ds = synthImbalanced(40, 12, 3, 2.0, 9);
    const FoldSplit folds = kfoldSplit(ds, 4, 19);
    PipelineConfig pipeline;
    pipeline.augmenter = AugmenterKind::Smote;
    pipeline.classifier = ClassifierKind::Gbdt;
    pipeline.seed = 31;
    const CrossValidationOutcome outcome = crossValidate(ds, folds, pipeline);

    CHECK(outcome.eval.method == "XGBoost + SMOTE");
    for (int f = 0; f < folds.k; ++f) {
        const auto& fold = outcome.folds[static_cast<std::size_t>(f)];
        const TabularDataset test = selectRows(ds, folds.testIndices(f));
        // The scored partition hashes identically to the raw fold slice, so no
        // synthetic or modified row can have entered it.
        CHECK(fold.testContentHash == datasetContentHash(test));
        CHECK(fold.testLabels == test.labels);
        CHECK(fold.testRows == test.rowCount());

        const std::size_t realTrain = ds.rowCount() - test.rowCount();
        CHECK(fold.syntheticRows > 0);
        CHECK(fold.trainRows == realTrain + fold.syntheticRows);
    }

    pipeline.augmenter = AugmenterKind::Adasyn;
    const CrossValidationOutcome viaAdasyn = crossValidate(ds, folds, pipeline);
    CHECK(viaAdasyn.eval.method == "XGBoost + ADASYN");
    for (int f = 0; f < folds.k; ++f) {
        const auto& fold = viaAdasyn.folds[static_cast<std::size_t>(f)];
        CHECK(fold.testContentHash ==
              datasetContentHash(selectRows(ds, folds.testIndices(f))));
        CHECK(fold.syntheticRows > 0);
    }
}

TEST_CASE("cross-validation balances training folds with generated rows") {
    const TabularDataset ds = synthImbalanced(30, 10, 3, 3.0, 17);
    const FoldSplit folds = kfoldSplit(ds, 2, 41);
    PipelineConfig pipeline;
    pipeline.augmenter = AugmenterKind::Cgan;
    pipeline.classifier = ClassifierKind::Gbdt;
    pipeline.gridSize = 4;
    pipeline.embedding.iterations = 120;
    pipeline.embedding.exaggerationIters = 60;
    pipeline.cgan.epochs = 3;
    pipeline.cgan.batchSize = 8;
    pipeline.cgan.noiseDim = 8;
    pipeline.cgan.labelEmbedDim = 4;
    pipeline.cgan.hiddenWidths = {16};
    pipeline.seed = 23;
    const CrossValidationOutcome outcome = crossValidate(ds, folds, pipeline);

    CHECK(outcome.eval.method == "XGBoost + cGAN");
    for (const auto& fold : outcome.folds) {
        // Each training partition holds 15 majority and 5 minority real rows;
        // generation closes the gap exactly.
        CHECK(fold.syntheticRows == 10);
        CHECK(fold.trainRows == 30);
        CHECK(fold.testRows == 20);
    }

    const CrossValidationOutcome again = crossValidate(ds, folds, pipeline);
    for (std::size_t f = 0; f < outcome.folds.size(); ++f) {
        REQUIRE(again.folds[f].testScores.size() ==
                outcome.folds[f].testScores.size());
        for (std::size_t i = 0; i < outcome.folds[f].testScores.size(); ++i)
            CHECK(again.folds[f].testScores[i] == outcome.folds[f].testScores[i]);
    }
}

TEST_CASE("cross-validation reports the failing fold") {
    TabularDataset ds;
    ds.featureNames = {"x"};
    ds.rows = {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}};
    ds.labels = {0, 0, 0, 1, 1, 1};
    FoldSplit folds;
    folds.k = 2;
    folds.assignments = {0, 0, 0, 1, 1, 1};

    PipelineConfig pipeline;
    pipeline.classifier = ClassifierKind::Gbdt;
    bool sawFoldIndex = false;
    try {
        crossValidate(ds, folds, pipeline);
    } catch (const std::runtime_error& e) {
        sawFoldIndex = std::string(e.what()).find("fold 0") != std::string::npos;
    }
    CHECK(sawFoldIndex);

    FoldSplit tooFew;
    tooFew.k = 1;
    tooFew.assignments.assign(6, 0);
    CHECK_THROWS_AS(crossValidate(ds, tooFew, pipeline), std::invalid_argument);
    FoldSplit mismatched;
    mismatched.k = 2;
    mismatched.assignments = {0, 1};
    CHECK_THROWS_AS(crossValidate(ds, mismatched, pipeline),
                    std::invalid_argument);
}

TEST_CASE("grid search returns the dominating configuration") {
    const TabularDataset ds = synthImbalanced(40, 20, 6, 6.0, 7);
    const FoldSplit folds = kfoldSplit(ds, 3, 31);
    PipelineConfig base;
    base.gridSize = 4;
    base.embedding.iterations = 120;
    base.embedding.exaggerationIters = 60;
    base.seed = 99;

    CnnConfig good = smallCnn();
    CnnConfig frozen = smallCnn();
    frozen.learningRate = 1e-12;

    SUBCASE("single-config grid hands it back") {
        const GridSearchOutcome outcome = gridSearchCnn(ds, folds, {good}, base);
        CHECK(outcome.bestIndex == 0);
        CHECK(outcome.best.learningRate == good.learningRate);
        REQUIRE(outcome.meanAucs.size() == 1);
    }

    SUBCASE("dominating config wins over a frozen one") {
        const GridSearchOutcome outcome =
            gridSearchCnn(ds, folds, {frozen, good}, base);
        CHECK(outcome.bestIndex == 1);
        CHECK(outcome.meanAucs[1] > outcome.meanAucs[0]);
        CHECK(outcome.best.learningRate == good.learningRate);
    }

    SUBCASE("ties keep the earliest lattice entry") {
        const GridSearchOutcome outcome =
            gridSearchCnn(ds, folds, {good, good}, base);
        CHECK(outcome.meanAucs[0] == outcome.meanAucs[1]);
        CHECK(outcome.bestIndex == 0);
    }

    SUBCASE("empty grid is rejected") {
        CHECK_THROWS_AS(gridSearchCnn(ds, folds, {}, base),
                        std::invalid_argument);
    }
}

TEST_CASE("default grid spans the documented lattice") {
    const auto grid = defaultCnnGrid(55);
    REQUIRE(grid.size() == 8);
    CHECK(grid[0].batchSize == 32);
    CHECK(grid[0].convBlocks.size() == 1);
    CHECK(grid[0].denseWidths == std::vector<std::size_t>{64});
    CHECK(grid[7].batchSize == 64);
    CHECK(grid[7].convBlocks.size() == 2);
    CHECK(grid[7].convBlocks[1].channels == 16);
    CHECK(grid[7].denseWidths == std::vector<std::size_t>{128});
    for (const auto& cfg : grid) CHECK(cfg.seed == 55);
}

TEST_CASE("augmenter and classifier names cover every kind") {
    CHECK(augmenterName(AugmenterKind::None) == "none");
    CHECK(augmenterName(AugmenterKind::Smote) == "smote");
    CHECK(augmenterName(AugmenterKind::Adasyn) == "adasyn");
    CHECK(augmenterName(AugmenterKind::Cgan) == "cgan");
    CHECK(augmenterName(AugmenterKind::Vqvae) == "vqvae");
    CHECK(augmenterName(AugmenterKind::Vqgan) == "vqgan");
    CHECK(classifierName(ClassifierKind::Gbdt) == "gbdt");
    CHECK(classifierName(ClassifierKind::Cnn) == "cnn");
}
