#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tabaug/classify.hpp"

namespace tabaug {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc needs one label per score");
    const std::size_t n = scores.size();
    std::size_t positives = 0;
    for (const int y : labels) positives += static_cast<std::size_t>(y == 1);
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc needs both classes");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    double positiveRankSum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avgRank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) positiveRankSum += avgRank;
        i = j + 1;
    }
    const double u = positiveRankSum - 0.5 * static_cast<double>(positives) *
                                           static_cast<double>(positives + 1);
    return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

// ---------------------------------------------------------------------------
// CNN

CnnModel cnnTrain(const std::vector<ImageSample>& images,
                  const CnnConfig& config) {
    if (images.empty())
        throw std::invalid_argument("cnn_train needs at least one image");
    if (config.convBlocks.empty() || config.denseWidths.empty())
        throw std::invalid_argument(
            "cnn needs at least one conv block and one dense width");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batchSize < 1)
        throw std::invalid_argument("batch size must be >= 1");

    const int grid = images[0].gridSize;
    std::size_t positives = 0;
    for (const auto& image : images) {
        if (image.gridSize != grid)
            throw std::invalid_argument("images disagree on grid size");
        positives += static_cast<std::size_t>(image.label == 1);
    }
    if (positives == 0 || positives == images.size())
        throw std::invalid_argument("cnn_train needs both classes");

    NetworkSpec spec;
    std::size_t channels = 1;
    std::size_t side = static_cast<std::size_t>(grid);
    for (const auto& block : config.convBlocks) {
        if (block.channels < 1 || block.kernel < 1)
            throw std::invalid_argument("conv blocks need channels and kernel >= 1");
        const std::size_t pad = block.kernel / 2;
        if (side + 2 * pad < block.kernel)
            throw std::invalid_argument("conv kernel larger than the padded grid");
        spec.layers.push_back(
            layers::conv2d(channels, block.channels, block.kernel, 2, pad));
        spec.layers.push_back(layers::relu());
        channels = block.channels;
        side = (side + 2 * pad - block.kernel) / 2 + 1;
    }
    spec.layers.push_back(layers::flatten());
    std::size_t width = channels * side * side;
    for (const std::size_t dense : config.denseWidths) {
        if (dense < 1) throw std::invalid_argument("dense widths must be >= 1");
        spec.layers.push_back(layers::dense(width, dense));
        spec.layers.push_back(layers::relu());
        width = dense;
    }
    spec.layers.push_back(layers::dense(width, 2));
    spec.seed = deriveSeed(config.seed, "cnn/init");

    CnnModel model{config, grid, Network(spec)};
    OptimizerState optimizer = OptimizerState::adam(config.learningRate);
    Rng rng(deriveSeed(config.seed, "cnn/train"));
    const std::size_t pixels =
        static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);

    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += config.batchSize) {
            const std::size_t count =
                std::min(config.batchSize, order.size() - start);
            Tensor x({count, 1, static_cast<std::size_t>(grid),
                      static_cast<std::size_t>(grid)});
            Tensor target({count});
            for (std::size_t s = 0; s < count; ++s) {
                const ImageSample& image = images[order[start + s]];
                std::copy(image.pixels.begin(), image.pixels.end(),
                          x.values.begin() + static_cast<std::ptrdiff_t>(s * pixels));
                target.values[s] = static_cast<double>(image.label);
            }
            const double loss =
                trainStep(model.network, LossKind::Ce, x, target, optimizer);
            if (!std::isfinite(loss))
                throw std::runtime_error("non-finite cnn loss at epoch " +
                                         std::to_string(epoch));
        }
    }
    return model;
}

std::vector<double> cnnScores(const CnnModel& model,
                              const std::vector<ImageSample>& images) {
    const std::size_t grid = static_cast<std::size_t>(model.gridSize);
    const std::size_t pixels = grid * grid;
    std::vector<double> scores;
    scores.reserve(images.size());
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < images.size(); start += chunk) {
        const std::size_t count = std::min(chunk, images.size() - start);
        Tensor x({count, 1, grid, grid});
        for (std::size_t s = 0; s < count; ++s) {
            const ImageSample& image = images[start + s];
            if (static_cast<std::size_t>(image.gridSize) != grid)
                throw std::invalid_argument("image grid does not match the model");
            std::copy(image.pixels.begin(), image.pixels.end(),
                      x.values.begin() + static_cast<std::ptrdiff_t>(s * pixels));
        }
        const Tensor logits = model.network.infer(x);
        for (std::size_t s = 0; s < count; ++s) {
            const double l0 = logits.values[2 * s];
            const double l1 = logits.values[2 * s + 1];
            const double mx = std::max(l0, l1);
            const double e0 = std::exp(l0 - mx);
            const double e1 = std::exp(l1 - mx);
            scores.push_back(e1 / (e0 + e1));
        }
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Harness

std::string augmenterName(AugmenterKind kind) {
    switch (kind) {
        case AugmenterKind::None: return "none";
        case AugmenterKind::Smote: return "smote";
        case AugmenterKind::Adasyn: return "adasyn";
        case AugmenterKind::Cgan: return "cgan";
        case AugmenterKind::Vqvae: return "vqvae";
        case AugmenterKind::Vqgan: return "vqgan";
    }
    throw std::invalid_argument("unknown augmenter");
}

std::string classifierName(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Gbdt: return "gbdt";
        case ClassifierKind::Cnn: return "cnn";
    }
    throw std::invalid_argument("unknown classifier");
}

namespace {

std::string defaultMethodLabel(const PipelineConfig& pipeline) {
    const std::string classifier =
        pipeline.classifier == ClassifierKind::Gbdt ? "XGBoost" : "CNN";
    switch (pipeline.augmenter) {
        case AugmenterKind::None: return classifier + " w/o Augmentation";
        case AugmenterKind::Smote: return classifier + " + SMOTE";
        case AugmenterKind::Adasyn: return classifier + " + ADASYN";
        case AugmenterKind::Cgan: return classifier + " + cGAN";
        case AugmenterKind::Vqvae: return classifier + " + VQVAE";
        case AugmenterKind::Vqgan: return classifier + " + VQGAN";
    }
    throw std::invalid_argument("unknown augmenter");
}

/// Runs work(0..count-1) on a small thread pool; the first failing index's
/// message wins so errors are deterministic regardless of scheduling.
void runParallel(std::size_t count,
                 const std::function<void(std::size_t)>& work) {
    if (count == 0) return;
    const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(count, hardware);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(count);
    std::vector<char> failed(count, 0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count;
                 i = next.fetch_add(1)) {
                try {
                    work(i);
                } catch (const std::exception& e) {
                    failed[i] = 1;
                    errors[i] = e.what();
                } catch (...) {
                    failed[i] = 1;
                    errors[i] = "unknown error";
                }
            }
        });
    }
    for (auto& thread : pool) thread.join();
    for (std::size_t i = 0; i < count; ++i)
        if (failed[i]) throw std::runtime_error(errors[i]);
}

std::vector<ImageSample> imagesForRows(const TabularDataset& ds,
                                       std::size_t begin, std::size_t end,
                                       const PixelMapping& mapping) {
    std::vector<ImageSample> images;
    images.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        images.push_back(forwardTransform(normalizeRow(ds.rows[i], mapping.norm),
                                          mapping, ds.labels[i]));
        if (ds.isSynthetic(i)) images.back().synthetic = true;
    }
    return images;
}

bool isGenerative(AugmenterKind kind) {
    return kind == AugmenterKind::Cgan || kind == AugmenterKind::Vqvae ||
           kind == AugmenterKind::Vqgan;
}

FoldRecord evaluateFold(const TabularDataset& ds, const FoldSplit& folds,
                        const PipelineConfig& pipeline, int fold) {
    TabularDataset train = selectRows(ds, folds.trainIndices(fold));
    const TabularDataset test = selectRows(ds, folds.testIndices(fold));

    FoldRecord record;
    record.fold = fold;
    record.testRows = test.rowCount();
    record.testContentHash = datasetContentHash(test);
    record.testLabels = test.labels;

    const std::uint64_t foldSeed =
        deriveSeed(pipeline.seed, "fold/" + std::to_string(fold));
    const bool generative = isGenerative(pipeline.augmenter);
    const bool needsImages =
        generative || pipeline.classifier == ClassifierKind::Cnn;

    // Transform chain fitted on the real training partition only.
    PixelMapping mapping;
    if (needsImages) mapping = fitFoldMapping(train, pipeline, foldSeed);

    const std::size_t realRows = train.rowCount();
    std::vector<ImageSample> syntheticImages =
        augmentTraining(train, mapping, pipeline, foldSeed);

    record.trainRows = train.rowCount();
    for (std::size_t i = 0; i < train.rowCount(); ++i)
        record.syntheticRows += static_cast<std::size_t>(train.isSynthetic(i));

    if (pipeline.classifier == ClassifierKind::Gbdt) {
        GbdtConfig config = pipeline.gbdt;
        config.seed = foldSeed;
        const GbdtModel model = gbdtTrain(train, config);
        record.testScores = gbdtScores(model, test);
    } else {
        // Real rows go through the transform; generative synthetic rows reuse
        // the images they were decoded from.
        std::vector<ImageSample> trainImages = imagesForRows(
            train, 0, generative ? realRows : train.rowCount(), mapping);
        for (auto& image : syntheticImages) trainImages.push_back(std::move(image));
        CnnConfig config = pipeline.cnn;
        config.seed = foldSeed;
        const CnnModel model = cnnTrain(trainImages, config);
        const std::vector<ImageSample> testImages =
            imagesForRows(test, 0, test.rowCount(), mapping);
        record.testScores = cnnScores(model, testImages);
    }
    record.aucValue = auc(record.testScores, record.testLabels);
    return record;
}

}  // namespace

PixelMapping fitFoldMapping(const TabularDataset& train,
                            const PipelineConfig& pipeline,
                            std::uint64_t seed) {
    const NormalizedDataset normalized = normalize(train);
    std::vector<std::vector<double>> featureMatrix(
        train.featureCount(), std::vector<double>(train.rowCount()));
    for (std::size_t i = 0; i < train.rowCount(); ++i)
        for (std::size_t j = 0; j < train.featureCount(); ++j)
            featureMatrix[j][i] = normalized.dataset.rows[i][j];
    EmbeddingConfig embeddingConfig = pipeline.embedding;
    embeddingConfig.perplexity =
        clampedPerplexity(featureMatrix.size(), embeddingConfig.perplexity);
    embeddingConfig.seed = deriveSeed(seed, "tsne");
    const std::vector<double> affinities =
        calibrateAffinities(featureMatrix, embeddingConfig.perplexity);
    const FeatureEmbedding embedding =
        tsneOptimize(affinities, featureMatrix.size(), embeddingConfig);
    return buildMapping(embedding, pipeline.gridSize, normalized.params);
}

std::vector<ImageSample> augmentTraining(TabularDataset& train,
                                         const PixelMapping& mapping,
                                         const PipelineConfig& pipeline,
                                         std::uint64_t seed) {
    std::vector<ImageSample> syntheticImages;
    if (pipeline.augmenter == AugmenterKind::Smote ||
        pipeline.augmenter == AugmenterKind::Adasyn) {
        OversampleConfig config = pipeline.oversample;
        config.seed = seed;
        const OversampleResult result = pipeline.augmenter == AugmenterKind::Smote
                                            ? smote(train, config)
                                            : adasyn(train, config);
        appendRows(train, result.rows, 1, true);
    } else if (isGenerative(pipeline.augmenter)) {
        if (mapping.featureCount() == 0)
            throw std::invalid_argument(
                "generative augmentation needs a fitted pixel mapping");
        const std::vector<ImageSample> trainImages =
            imagesForRows(train, 0, train.rowCount(), mapping);
        GenerativeModel bundle;
        if (pipeline.augmenter == AugmenterKind::Cgan) {
            bundle.kind = GenerativeKind::Cgan;
            CganConfig config = pipeline.cgan;
            config.seed = seed;
            bundle.cgan = cganTrain(trainImages, config);
        } else if (pipeline.augmenter == AugmenterKind::Vqvae) {
            bundle.kind = GenerativeKind::Vqvae;
            VqvaeConfig config = pipeline.vqvae;
            config.seed = seed;
            bundle.vqvae = vqvaeTrain(trainImages, config);
            PixelCnnConfig priorConfig = pipeline.vqvaePrior;
            priorConfig.seed = seed;
            bundle.vqvaePrior = priorTrain(*bundle.vqvae, trainImages, priorConfig);
        } else {
            bundle.kind = GenerativeKind::Vqgan;
            VqganConfig config = pipeline.vqgan;
            config.seed = seed;
            bundle.vqgan = vqganTrain(trainImages, config);
        }
        MinorityGeneration generated = generateMinority(
            bundle, train, mapping, deriveSeed(seed, "generate"));
        syntheticImages = std::move(generated.images);
        appendRows(train, generated.rows, 1, true);
    }
    return syntheticImages;
}

EvalResult summarizeAucs(const std::vector<double>& aucs, std::string method) {
    if (aucs.empty())
        throw std::invalid_argument("no AUC values to summarize");
    EvalResult result;
    result.method = std::move(method);
    result.foldAucs = aucs;
    result.meanAuc = std::accumulate(aucs.begin(), aucs.end(), 0.0) /
                     static_cast<double>(aucs.size());
    if (aucs.size() > 1) {
        double sq = 0.0;
        for (const double a : aucs) sq += (a - result.meanAuc) * (a - result.meanAuc);
        result.stdAuc = std::sqrt(sq / static_cast<double>(aucs.size() - 1));
    }
    return result;
}

std::string formatReportRow(const EvalResult& result,
                            const std::string& datasetName) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f \xc2\xb1 %.4f", result.meanAuc,
                  result.stdAuc);
    return result.method + ", " + datasetName + ": " + buffer;
}

CrossValidationOutcome crossValidate(const TabularDataset& ds,
                                     const FoldSplit& folds,
                                     const PipelineConfig& pipeline) {
    ds.validate();
    if (folds.k < 2)
        throw std::invalid_argument("cross-validation needs k >= 2");
    if (folds.assignments.size() != ds.rowCount())
        throw std::invalid_argument("fold assignments do not match the dataset");

    CrossValidationOutcome outcome;
    outcome.folds.resize(static_cast<std::size_t>(folds.k));
    runParallel(static_cast<std::size_t>(folds.k), [&](std::size_t f) {
        try {
            outcome.folds[f] =
                evaluateFold(ds, folds, pipeline, static_cast<int>(f));
        } catch (const std::exception& e) {
            throw std::runtime_error("fold " + std::to_string(f) + ": " +
                                     e.what());
        }
    });

    std::vector<double> aucs;
    aucs.reserve(outcome.folds.size());
    for (const auto& fold : outcome.folds) aucs.push_back(fold.aucValue);
    outcome.eval = summarizeAucs(aucs, pipeline.methodLabel.empty()
                                           ? defaultMethodLabel(pipeline)
                                           : pipeline.methodLabel);
    return outcome;
}

GridSearchOutcome gridSearchCnn(const TabularDataset& ds,
                                const FoldSplit& folds,
                                const std::vector<CnnConfig>& grid,
                                const PipelineConfig& base) {
    if (grid.empty())
        throw std::invalid_argument("grid search needs at least one candidate");
    GridSearchOutcome outcome;
    outcome.meanAucs.resize(grid.size());
    runParallel(grid.size(), [&](std::size_t i) {
        PipelineConfig candidate = base;
        candidate.classifier = ClassifierKind::Cnn;
        candidate.cnn = grid[i];
        outcome.meanAucs[i] = crossValidate(ds, folds, candidate).eval.meanAuc;
    });
    std::size_t bestIndex = 0;
    for (std::size_t i = 1; i < outcome.meanAucs.size(); ++i)
        if (outcome.meanAucs[i] > outcome.meanAucs[bestIndex]) bestIndex = i;
    outcome.best = grid[bestIndex];
    outcome.bestIndex = bestIndex;
    return outcome;
}

std::vector<CnnConfig> defaultCnnGrid(std::uint64_t seed) {
    std::vector<CnnConfig> grid;
    for (const std::size_t batch : {std::size_t{32}, std::size_t{64}})
        for (const std::size_t blocks : {std::size_t{1}, std::size_t{2}})
            for (const std::size_t width : {std::size_t{64}, std::size_t{128}}) {
                CnnConfig config;
                config.batchSize = batch;
                config.convBlocks.clear();
                for (std::size_t b = 0; b < blocks; ++b)
                    config.convBlocks.push_back({std::size_t{8} << b, 3});
                config.denseWidths = {width};
                config.seed = seed;
                grid.push_back(config);
            }
    return grid;
}

}  // namespace tabaug
