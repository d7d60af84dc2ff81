#include "tabaug/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include "tabaug/pixelmap.hpp"
#include "tabaug/report.hpp"
#include "tabaug/rng.hpp"

namespace tabaug {

namespace {

using nlohmann::json;

std::string trimmed(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

bool parseBool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw std::invalid_argument("config key " + key +
                                " expects true or false, got: " + value);
}

long long parseInteger(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long parsed = 0;
    try {
        parsed = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key +
                                    " expects an integer, got: " + value);
    }
    if (used != value.size())
        throw std::invalid_argument("config key " + key +
                                    " expects an integer, got: " + value);
    return parsed;
}

int parseInt(const std::string& key, const std::string& value) {
    return static_cast<int>(parseInteger(key, value));
}

std::size_t parseSize(const std::string& key, const std::string& value) {
    const long long parsed = parseInteger(key, value);
    if (parsed < 0)
        throw std::invalid_argument("config key " + key +
                                    " expects a non-negative integer, got: " +
                                    value);
    return static_cast<std::size_t>(parsed);
}

std::uint64_t parseSeed(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    std::uint64_t parsed = 0;
    try {
        parsed = std::stoull(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key +
                                    " expects an unsigned integer, got: " +
                                    value);
    }
    if (used != value.size())
        throw std::invalid_argument("config key " + key +
                                    " expects an unsigned integer, got: " +
                                    value);
    return parsed;
}

double parseDouble(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key " + key +
                                    " expects a number, got: " + value);
    }
    if (used != value.size())
        throw std::invalid_argument("config key " + key +
                                    " expects a number, got: " + value);
    return parsed;
}

std::vector<std::size_t> parseSizeList(const std::string& key,
                                       const std::string& value) {
    std::vector<std::size_t> parsed;
    std::istringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ','))
        parsed.push_back(parseSize(key, trimmed(item)));
    if (parsed.empty())
        throw std::invalid_argument("config key " + key +
                                    " expects a comma-separated list, got: " +
                                    value);
    return parsed;
}

AugmenterKind augmenterFromName(const std::string& name) {
    if (name == "none") return AugmenterKind::None;
    if (name == "smote") return AugmenterKind::Smote;
    if (name == "adasyn") return AugmenterKind::Adasyn;
    if (name == "cgan") return AugmenterKind::Cgan;
    if (name == "vqvae") return AugmenterKind::Vqvae;
    if (name == "vqgan") return AugmenterKind::Vqgan;
    throw std::invalid_argument("unknown augmenter: " + name);
}

ClassifierKind classifierFromName(const std::string& name) {
    if (name == "gbdt") return ClassifierKind::Gbdt;
    if (name == "cnn") return ClassifierKind::Cnn;
    throw std::invalid_argument("unknown classifier: " + name);
}

std::string formatDouble(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string formatSizeList(const std::vector<std::size_t>& values) {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) joined += ",";
        joined += std::to_string(values[i]);
    }
    return joined;
}

/// Applies one key=value setting; throws on unknown keys or bad values so a
/// config file cannot silently misspell anything.
void applyConfigKey(ExperimentConfig& c, const std::string& key,
                    const std::string& value) {
    PipelineConfig& p = c.pipeline;
    if (key == "dataset") c.datasetPath = value;
    else if (key == "dataset_name") c.datasetName = value;
    else if (key == "label_column") c.labelColumn = value;
    else if (key == "missing_token") c.missingToken = value;
    else if (key == "max_missing_per_feature")
        c.maxMissingPerFeature = parseSize(key, value);
    else if (key == "folds") c.folds = parseInt(key, value);
    else if (key == "image_limit") c.imageLimit = parseSize(key, value);
    else if (key == "out") c.outDir = value;
    else if (key == "seed") p.seed = parseSeed(key, value);
    else if (key == "grid_size") p.gridSize = parseInt(key, value);
    else if (key == "augmenter") p.augmenter = augmenterFromName(value);
    else if (key == "classifier") p.classifier = classifierFromName(value);
    else if (key == "method_label") p.methodLabel = value;
    else if (key == "embedding.perplexity")
        p.embedding.perplexity = parseDouble(key, value);
    else if (key == "embedding.learning_rate")
        p.embedding.learningRate = parseDouble(key, value);
    else if (key == "embedding.iterations")
        p.embedding.iterations = parseInt(key, value);
    else if (key == "embedding.early_exaggeration")
        p.embedding.earlyExaggeration = parseDouble(key, value);
    else if (key == "embedding.exaggeration_iters")
        p.embedding.exaggerationIters = parseInt(key, value);
    else if (key == "embedding.momentum")
        p.embedding.momentum = parseDouble(key, value);
    else if (key == "oversample.k_neighbors")
        p.oversample.kNeighbors = parseSize(key, value);
    else if (key == "gbdt.trees") p.gbdt.trees = parseInt(key, value);
    else if (key == "gbdt.max_depth") p.gbdt.maxDepth = parseInt(key, value);
    else if (key == "gbdt.learning_rate")
        p.gbdt.learningRate = parseDouble(key, value);
    else if (key == "gbdt.min_samples_leaf")
        p.gbdt.minSamplesLeaf = parseSize(key, value);
    else if (key == "gbdt.lambda") p.gbdt.lambda = parseDouble(key, value);
    else if (key == "cnn.conv_channels") {
        const std::vector<std::size_t> channels = parseSizeList(key, value);
        p.cnn.convBlocks.resize(channels.size());
        for (std::size_t i = 0; i < channels.size(); ++i)
            p.cnn.convBlocks[i].channels = channels[i];
    } else if (key == "cnn.conv_kernels") {
        const std::vector<std::size_t> kernels = parseSizeList(key, value);
        p.cnn.convBlocks.resize(kernels.size());
        for (std::size_t i = 0; i < kernels.size(); ++i)
            p.cnn.convBlocks[i].kernel = static_cast<int>(kernels[i]);
    } else if (key == "cnn.dense_widths")
        p.cnn.denseWidths = parseSizeList(key, value);
    else if (key == "cnn.batch_size") p.cnn.batchSize = parseSize(key, value);
    else if (key == "cnn.epochs") p.cnn.epochs = parseInt(key, value);
    else if (key == "cnn.learning_rate")
        p.cnn.learningRate = parseDouble(key, value);
    else if (key == "cgan.epochs") p.cgan.epochs = parseInt(key, value);
    else if (key == "cgan.batch_size") p.cgan.batchSize = parseSize(key, value);
    else if (key == "cgan.learning_rate")
        p.cgan.learningRate = parseDouble(key, value);
    else if (key == "cgan.noise_dim") p.cgan.noiseDim = parseSize(key, value);
    else if (key == "cgan.label_embed_dim")
        p.cgan.labelEmbedDim = parseSize(key, value);
    else if (key == "cgan.hidden_widths")
        p.cgan.hiddenWidths = parseSizeList(key, value);
    else if (key == "vqvae.epochs") p.vqvae.epochs = parseInt(key, value);
    else if (key == "vqvae.codebook_k")
        p.vqvae.codebookK = parseSize(key, value);
    else if (key == "vqvae.code_dim") p.vqvae.codeDim = parseSize(key, value);
    else if (key == "vqvae.beta") p.vqvae.beta = parseDouble(key, value);
    else if (key == "vqvae.learning_rate")
        p.vqvae.learningRate = parseDouble(key, value);
    else if (key == "vqvae.batch_size")
        p.vqvae.batchSize = parseSize(key, value);
    else if (key == "vqvae.channels") p.vqvae.channels = parseSize(key, value);
    else if (key == "prior.epochs") p.vqvaePrior.epochs = parseInt(key, value);
    else if (key == "prior.channels")
        p.vqvaePrior.channels = parseSize(key, value);
    else if (key == "prior.learning_rate")
        p.vqvaePrior.learningRate = parseDouble(key, value);
    else if (key == "prior.batch_size")
        p.vqvaePrior.batchSize = parseSize(key, value);
    else if (key == "vqgan.epochs") p.vqgan.epochs = parseInt(key, value);
    else if (key == "vqgan.codebook_k")
        p.vqgan.codebookK = parseSize(key, value);
    else if (key == "vqgan.code_dim") p.vqgan.codeDim = parseSize(key, value);
    else if (key == "vqgan.beta") p.vqgan.beta = parseDouble(key, value);
    else if (key == "vqgan.adversarial_weight")
        p.vqgan.adversarialWeight = parseDouble(key, value);
    else if (key == "vqgan.learning_rate")
        p.vqgan.learningRate = parseDouble(key, value);
    else if (key == "vqgan.discriminator_learning_rate")
        p.vqgan.discriminatorLearningRate = parseDouble(key, value);
    else if (key == "vqgan.batch_size")
        p.vqgan.batchSize = parseSize(key, value);
    else if (key == "vqgan.channels") p.vqgan.channels = parseSize(key, value);
    else if (key == "vqgan.prior_epochs")
        p.vqgan.priorEpochs = parseInt(key, value);
    else if (key == "vqgan.prior_width")
        p.vqgan.priorWidth = parseSize(key, value);
    else if (key == "vqgan.prior_heads")
        p.vqgan.priorHeads = parseSize(key, value);
    else if (key == "vqgan.prior_learning_rate")
        p.vqgan.priorLearningRate = parseDouble(key, value);
    else if (key == "bn.enabled") c.bn.enabled = parseBool(key, value);
    else if (key == "bn.bins") c.bn.bins = parseSize(key, value);
    else if (key == "bn.max_iterations")
        c.bn.search.maxIterations = parseInt(key, value);
    else if (key == "bn.tenure") c.bn.search.tenure = parseInt(key, value);
    else if (key == "bn.restarts") c.bn.search.restarts = parseInt(key, value);
    else if (key == "bn.target") c.bn.target = value;
    else
        throw std::invalid_argument("unknown config key: " + key);
}

void writeTextFile(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string readTextFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Runs one named phase, records its wall time, and rethrows failures with
/// the phase name attached.
void runPhase(ExperimentManifest& manifest, const std::string& phase,
              const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& error) {
        throw std::runtime_error("phase " + phase + ": " + error.what());
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    manifest.timings.push_back({phase, elapsed.count()});
}

std::filesystem::path ensureOutDir(const ExperimentConfig& config) {
    if (config.outDir.empty())
        throw std::invalid_argument("output directory must not be empty");
    std::filesystem::path dir(config.outDir);
    std::filesystem::create_directories(dir);
    return dir;
}

ExperimentManifest startManifest(const ExperimentConfig& config,
                                 const std::string& command) {
    ExperimentManifest manifest;
    manifest.command = command;
    manifest.configText = explainConfig(config);
    manifest.datasetName = config.datasetName;
    manifest.masterSeed = config.pipeline.seed;
    return manifest;
}

void recordSeed(ExperimentManifest& manifest, std::uint64_t master,
                const std::string& tag) {
    manifest.seeds.emplace_back(tag, deriveSeed(master, tag));
}

TabularDataset loadPhaseDataset(const ExperimentConfig& config,
                                ExperimentManifest& manifest) {
    if (config.datasetPath.empty())
        throw std::invalid_argument("no dataset path configured");
    TabularDataset ds =
        loadCsv(config.datasetPath, config.labelColumn, config.missingToken);
    if (ds.hasMissing()) {
        const std::size_t before = ds.rowCount();
        const std::size_t featuresBefore = ds.featureCount();
        ds = dropMissing(ds, config.maxMissingPerFeature);
        manifest.warnings.push_back(
            "dropped incomplete data: " + std::to_string(before) + " -> " +
            std::to_string(ds.rowCount()) + " rows, " +
            std::to_string(featuresBefore) + " -> " +
            std::to_string(ds.featureCount()) + " features");
    }
    manifest.datasetHash = datasetContentHash(ds);
    return ds;
}

/// Index of the blanket target; defaults to the label node (last column).
std::size_t blanketTargetIndex(const DiscreteData& data,
                               const std::string& target) {
    if (target.empty()) return data.columnCount() - 1;
    for (std::size_t i = 0; i < data.columns.size(); ++i)
        if (data.columns[i].name == target) return i;
    throw std::invalid_argument("unknown blanket target: " + target);
}

struct StructureRun {
    SearchResult search;
    std::size_t targetIndex = 0;
    std::size_t blanketSize = 0;
};

StructureRun learnStructure(const TabularDataset& ds, const BnOptions& bn,
                            std::uint64_t seed) {
    const DiscreteData data = discretize(ds, bn.bins);
    SearchConfig search = bn.search;
    search.seed = seed;
    StructureRun run;
    run.search = tabuSearch(data, search);
    run.targetIndex = blanketTargetIndex(data, bn.target);
    run.blanketSize = markovBlanket(run.search.dag, run.targetIndex).size();
    return run;
}

void writeStructureArtifacts(const StructureRun& run,
                             const std::filesystem::path& dir,
                             const std::string& prefix,
                             ExperimentManifest& manifest) {
    const std::string dotName = prefix + "_structure.dot";
    const std::string jsonName = prefix + "_structure.json";
    const std::string blanketDotName = prefix + "_blanket.dot";
    const std::string blanketTextName = prefix + "_blanket.txt";
    writeTextFile((dir / dotName).string(), dagToDot(run.search.dag));
    writeTextFile((dir / jsonName).string(), dagToJson(run.search.dag));
    writeTextFile((dir / blanketDotName).string(),
                  blanketToDot(run.search.dag, run.targetIndex));
    writeTextFile((dir / blanketTextName).string(),
                  blanketReportText(run.search.dag, run.targetIndex));
    manifest.artifacts.push_back(dotName);
    manifest.artifacts.push_back(jsonName);
    manifest.artifacts.push_back(blanketDotName);
    manifest.artifacts.push_back(blanketTextName);
}

/// Shared cross-validation phase for the classify and pipeline commands.
void runCvPhase(const ExperimentConfig& config, const TabularDataset& ds,
                ExperimentManifest& manifest) {
    const FoldSplit folds =
        kfoldSplit(ds, config.folds, deriveSeed(config.pipeline.seed, "folds"));
    recordSeed(manifest, config.pipeline.seed, "folds");
    for (int f = 0; f < config.folds; ++f)
        recordSeed(manifest, config.pipeline.seed,
                   "fold/" + std::to_string(f));
    const CrossValidationOutcome outcome =
        crossValidate(ds, folds, config.pipeline);
    manifest.eval = outcome.eval;
    manifest.folds = outcome.folds;
    manifest.metrics.emplace_back("mean_auc", outcome.eval.meanAuc);
    manifest.metrics.emplace_back("std_auc", outcome.eval.stdAuc);
}

/// Augments a copy of the full dataset the same way a training fold would
/// be; used by the augment command and the BN comparison.
std::vector<ImageSample> augmentFullDataset(const ExperimentConfig& config,
                                            TabularDataset& ds,
                                            std::uint64_t mapSeed,
                                            std::uint64_t augmentSeed) {
    PixelMapping mapping;
    const AugmenterKind kind = config.pipeline.augmenter;
    if (kind == AugmenterKind::Cgan || kind == AugmenterKind::Vqvae ||
        kind == AugmenterKind::Vqgan)
        mapping = fitFoldMapping(ds, config.pipeline, mapSeed);
    return augmentTraining(ds, mapping, config.pipeline, augmentSeed);
}

json manifestJson(const ExperimentManifest& m, bool includeTimings) {
    json j;
    j["command"] = m.command;
    j["config"] = m.configText;
    j["dataset_name"] = m.datasetName;
    j["dataset_hash"] = m.datasetHash;
    j["master_seed"] = m.masterSeed;
    json seeds = json::array();
    for (const auto& [tag, value] : m.seeds)
        seeds.push_back({{"tag", tag}, {"value", value}});
    j["seeds"] = seeds;
    if (includeTimings) {
        json timings = json::array();
        for (const PhaseTiming& t : m.timings)
            timings.push_back({{"phase", t.phase}, {"seconds", t.seconds}});
        j["timings"] = timings;
    }
    json metrics = json::array();
    for (const auto& [name, value] : m.metrics)
        metrics.push_back({{"name", name}, {"value", value}});
    j["metrics"] = metrics;
    j["eval"] = {{"method", m.eval.method},
                 {"fold_aucs", m.eval.foldAucs},
                 {"mean_auc", m.eval.meanAuc},
                 {"std_auc", m.eval.stdAuc}};
    json folds = json::array();
    for (const FoldRecord& f : m.folds)
        folds.push_back({{"fold", f.fold},
                         {"auc", f.aucValue},
                         {"train_rows", f.trainRows},
                         {"test_rows", f.testRows},
                         {"synthetic_rows", f.syntheticRows},
                         {"test_content_hash", f.testContentHash},
                         {"test_scores", f.testScores},
                         {"test_labels", f.testLabels}});
    j["folds"] = folds;
    j["bn"] = {{"ran", m.bn.ran},
               {"score_original", m.bn.scoreOriginal},
               {"score_augmented", m.bn.scoreAugmented},
               {"blanket_original", m.bn.blanketOriginal},
               {"blanket_augmented", m.bn.blanketAugmented}};
    j["artifacts"] = m.artifacts;
    j["warnings"] = m.warnings;
    return j;
}

}  // namespace

ExperimentConfig parseExperimentConfig(const std::string& text,
                                       ExperimentConfig base) {
    ExperimentConfig config = std::move(base);
    std::istringstream stream(text);
    std::string line;
    std::size_t lineNumber = 0;
    while (std::getline(stream, line)) {
        ++lineNumber;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trimmed(line);
        if (line.empty()) continue;
        const std::size_t equals = line.find('=');
        if (equals == std::string::npos)
            throw std::invalid_argument(
                "config line " + std::to_string(lineNumber) +
                " is not a key = value pair: " + line);
        const std::string key = trimmed(line.substr(0, equals));
        std::string value = trimmed(line.substr(equals + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw std::invalid_argument("config line " +
                                        std::to_string(lineNumber) +
                                        " has an empty key");
        applyConfigKey(config, key, value);
    }
    return config;
}

ExperimentConfig loadExperimentConfig(const std::string& path,
                                      ExperimentConfig base) {
    return parseExperimentConfig(readTextFile(path), std::move(base));
}

void setConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
    applyConfigKey(config, key, value);
}

std::string explainConfig(const ExperimentConfig& c) {
    const PipelineConfig& p = c.pipeline;
    std::ostringstream out;
    out << "dataset = " << c.datasetPath << "\n";
    out << "dataset_name = " << c.datasetName << "\n";
    out << "label_column = " << c.labelColumn << "\n";
    out << "missing_token = " << c.missingToken << "\n";
    out << "max_missing_per_feature = " << c.maxMissingPerFeature << "\n";
    out << "folds = " << c.folds << "\n";
    out << "image_limit = " << c.imageLimit << "\n";
    out << "out = " << c.outDir << "\n";
    out << "seed = " << p.seed << "\n";
    out << "grid_size = " << p.gridSize << "\n";
    out << "augmenter = " << augmenterName(p.augmenter) << "\n";
    out << "classifier = " << classifierName(p.classifier) << "\n";
    out << "method_label = " << p.methodLabel << "\n";
    out << "embedding.perplexity = " << formatDouble(p.embedding.perplexity)
        << "\n";
    out << "embedding.learning_rate = "
        << formatDouble(p.embedding.learningRate) << "\n";
    out << "embedding.iterations = " << p.embedding.iterations << "\n";
    out << "embedding.early_exaggeration = "
        << formatDouble(p.embedding.earlyExaggeration) << "\n";
    out << "embedding.exaggeration_iters = " << p.embedding.exaggerationIters
        << "\n";
    out << "embedding.momentum = " << formatDouble(p.embedding.momentum)
        << "\n";
    out << "oversample.k_neighbors = " << p.oversample.kNeighbors << "\n";
    out << "gbdt.trees = " << p.gbdt.trees << "\n";
    out << "gbdt.max_depth = " << p.gbdt.maxDepth << "\n";
    out << "gbdt.learning_rate = " << formatDouble(p.gbdt.learningRate)
        << "\n";
    out << "gbdt.min_samples_leaf = " << p.gbdt.minSamplesLeaf << "\n";
    out << "gbdt.lambda = " << formatDouble(p.gbdt.lambda) << "\n";
    std::vector<std::size_t> channels;
    std::vector<std::size_t> kernels;
    for (const ConvBlockSpec& block : p.cnn.convBlocks) {
        channels.push_back(block.channels);
        kernels.push_back(static_cast<std::size_t>(block.kernel));
    }
    out << "cnn.conv_channels = " << formatSizeList(channels) << "\n";
    out << "cnn.conv_kernels = " << formatSizeList(kernels) << "\n";
    out << "cnn.dense_widths = " << formatSizeList(p.cnn.denseWidths) << "\n";
    out << "cnn.batch_size = " << p.cnn.batchSize << "\n";
    out << "cnn.epochs = " << p.cnn.epochs << "\n";
    out << "cnn.learning_rate = " << formatDouble(p.cnn.learningRate) << "\n";
    out << "cgan.epochs = " << p.cgan.epochs << "\n";
    out << "cgan.batch_size = " << p.cgan.batchSize << "\n";
    out << "cgan.learning_rate = " << formatDouble(p.cgan.learningRate)
        << "\n";
    out << "cgan.noise_dim = " << p.cgan.noiseDim << "\n";
    out << "cgan.label_embed_dim = " << p.cgan.labelEmbedDim << "\n";
    out << "cgan.hidden_widths = " << formatSizeList(p.cgan.hiddenWidths)
        << "\n";
    out << "vqvae.epochs = " << p.vqvae.epochs << "\n";
    out << "vqvae.codebook_k = " << p.vqvae.codebookK << "\n";
    out << "vqvae.code_dim = " << p.vqvae.codeDim << "\n";
    out << "vqvae.beta = " << formatDouble(p.vqvae.beta) << "\n";
    out << "vqvae.learning_rate = " << formatDouble(p.vqvae.learningRate)
        << "\n";
    out << "vqvae.batch_size = " << p.vqvae.batchSize << "\n";
    out << "vqvae.channels = " << p.vqvae.channels << "\n";
    out << "prior.epochs = " << p.vqvaePrior.epochs << "\n";
    out << "prior.channels = " << p.vqvaePrior.channels << "\n";
    out << "prior.learning_rate = " << formatDouble(p.vqvaePrior.learningRate)
        << "\n";
    out << "prior.batch_size = " << p.vqvaePrior.batchSize << "\n";
    out << "vqgan.epochs = " << p.vqgan.epochs << "\n";
    out << "vqgan.codebook_k = " << p.vqgan.codebookK << "\n";
    out << "vqgan.code_dim = " << p.vqgan.codeDim << "\n";
    out << "vqgan.beta = " << formatDouble(p.vqgan.beta) << "\n";
    out << "vqgan.adversarial_weight = "
        << formatDouble(p.vqgan.adversarialWeight) << "\n";
    out << "vqgan.learning_rate = " << formatDouble(p.vqgan.learningRate)
        << "\n";
    out << "vqgan.discriminator_learning_rate = "
        << formatDouble(p.vqgan.discriminatorLearningRate) << "\n";
    out << "vqgan.batch_size = " << p.vqgan.batchSize << "\n";
    out << "vqgan.channels = " << p.vqgan.channels << "\n";
    out << "vqgan.prior_epochs = " << p.vqgan.priorEpochs << "\n";
    out << "vqgan.prior_width = " << p.vqgan.priorWidth << "\n";
    out << "vqgan.prior_heads = " << p.vqgan.priorHeads << "\n";
    out << "vqgan.prior_learning_rate = "
        << formatDouble(p.vqgan.priorLearningRate) << "\n";
    out << "bn.enabled = " << (c.bn.enabled ? "true" : "false") << "\n";
    out << "bn.bins = " << c.bn.bins << "\n";
    out << "bn.max_iterations = " << c.bn.search.maxIterations << "\n";
    out << "bn.tenure = " << c.bn.search.tenure << "\n";
    out << "bn.restarts = " << c.bn.search.restarts << "\n";
    out << "bn.target = " << c.bn.target << "\n";
    return out.str();
}

std::string manifestToJson(const ExperimentManifest& manifest) {
    return manifestJson(manifest, true).dump(2) + "\n";
}

ExperimentManifest manifestFromJson(const std::string& text) {
    const json j = json::parse(text);
    ExperimentManifest m;
    m.command = j.at("command").get<std::string>();
    m.configText = j.at("config").get<std::string>();
    m.datasetName = j.at("dataset_name").get<std::string>();
    m.datasetHash = j.at("dataset_hash").get<std::uint64_t>();
    m.masterSeed = j.at("master_seed").get<std::uint64_t>();
    for (const json& seed : j.at("seeds"))
        m.seeds.emplace_back(seed.at("tag").get<std::string>(),
                             seed.at("value").get<std::uint64_t>());
    for (const json& timing : j.at("timings"))
        m.timings.push_back({timing.at("phase").get<std::string>(),
                             timing.at("seconds").get<double>()});
    for (const json& metric : j.at("metrics"))
        m.metrics.emplace_back(metric.at("name").get<std::string>(),
                               metric.at("value").get<double>());
    const json& eval = j.at("eval");
    m.eval.method = eval.at("method").get<std::string>();
    m.eval.foldAucs = eval.at("fold_aucs").get<std::vector<double>>();
    m.eval.meanAuc = eval.at("mean_auc").get<double>();
    m.eval.stdAuc = eval.at("std_auc").get<double>();
    for (const json& fold : j.at("folds")) {
        FoldRecord record;
        record.fold = fold.at("fold").get<int>();
        record.aucValue = fold.at("auc").get<double>();
        record.trainRows = fold.at("train_rows").get<std::size_t>();
        record.testRows = fold.at("test_rows").get<std::size_t>();
        record.syntheticRows = fold.at("synthetic_rows").get<std::size_t>();
        record.testContentHash =
            fold.at("test_content_hash").get<std::uint64_t>();
        record.testScores = fold.at("test_scores").get<std::vector<double>>();
        record.testLabels = fold.at("test_labels").get<std::vector<int>>();
        m.folds.push_back(std::move(record));
    }
    const json& bn = j.at("bn");
    m.bn.ran = bn.at("ran").get<bool>();
    m.bn.scoreOriginal = bn.at("score_original").get<double>();
    m.bn.scoreAugmented = bn.at("score_augmented").get<double>();
    m.bn.blanketOriginal = bn.at("blanket_original").get<std::size_t>();
    m.bn.blanketAugmented = bn.at("blanket_augmented").get<std::size_t>();
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

std::uint64_t manifestContentHash(const ExperimentManifest& manifest) {
    return fnv1a(manifestJson(manifest, false).dump());
}

void saveManifest(const ExperimentManifest& manifest, const std::string& path) {
    writeTextFile(path, manifestToJson(manifest));
}

ExperimentManifest loadManifest(const std::string& path) {
    return manifestFromJson(readTextFile(path));
}

ExperimentManifest runTransform(const ExperimentConfig& config) {
    const std::filesystem::path dir = ensureOutDir(config);
    ExperimentManifest manifest = startManifest(config, "transform");
    TabularDataset ds;
    runPhase(manifest, "load",
             [&] { ds = loadPhaseDataset(config, manifest); });

    PixelMapping mapping;
    runPhase(manifest, "transform", [&] {
        recordSeed(manifest, config.pipeline.seed, "transform");
        mapping = fitFoldMapping(ds, config.pipeline,
                                 deriveSeed(config.pipeline.seed, "transform"));
    });

    runPhase(manifest, "emit", [&] {
        writeTextFile((dir / "mapping.json").string(),
                      mappingToJson(mapping, ds.featureNames));
        manifest.artifacts.push_back("mapping.json");
        std::filesystem::create_directories(dir / "images");
        const std::size_t count =
            config.imageLimit == 0
                ? ds.rowCount()
                : std::min(config.imageLimit, ds.rowCount());
        for (std::size_t i = 0; i < count; ++i) {
            const ImageSample image = forwardTransform(
                normalizeRow(ds.rows[i], mapping.norm), mapping, ds.labels[i]);
            char name[32];
            std::snprintf(name, sizeof(name), "images/row_%04zu.pgm", i);
            writePgm(image, (dir / name).string());
            manifest.artifacts.emplace_back(name);
        }
        manifest.metrics.emplace_back("rows",
                                      static_cast<double>(ds.rowCount()));
        manifest.metrics.emplace_back("features",
                                      static_cast<double>(ds.featureCount()));
        manifest.metrics.emplace_back(
            "collisions", static_cast<double>(mapping.collisionCount));
    });
    saveManifest(manifest, (dir / "manifest.json").string());
    return manifest;
}

ExperimentManifest runAugment(const ExperimentConfig& config) {
    const std::filesystem::path dir = ensureOutDir(config);
    ExperimentManifest manifest = startManifest(config, "augment");
    TabularDataset ds;
    runPhase(manifest, "load",
             [&] { ds = loadPhaseDataset(config, manifest); });

    const std::size_t rowsBefore = ds.rowCount();
    std::vector<ImageSample> syntheticImages;
    PixelMapping mapping;
    runPhase(manifest, "augment", [&] {
        recordSeed(manifest, config.pipeline.seed, "augment/map");
        recordSeed(manifest, config.pipeline.seed, "augment");
        const AugmenterKind kind = config.pipeline.augmenter;
        if (kind == AugmenterKind::Cgan || kind == AugmenterKind::Vqvae ||
            kind == AugmenterKind::Vqgan)
            mapping = fitFoldMapping(
                ds, config.pipeline,
                deriveSeed(config.pipeline.seed, "augment/map"));
        syntheticImages =
            augmentTraining(ds, mapping, config.pipeline,
                            deriveSeed(config.pipeline.seed, "augment"));
        if (kind == AugmenterKind::None)
            manifest.warnings.push_back(
                "augmenter none leaves the dataset unchanged");
    });

    runPhase(manifest, "emit", [&] {
        writeCsv(ds, (dir / "augmented.csv").string(), config.labelColumn);
        manifest.artifacts.push_back("augmented.csv");
        if (!syntheticImages.empty()) {
            std::vector<ImageSample> realMinority;
            for (std::size_t i = 0; i < rowsBefore; ++i) {
                if (ds.labels[i] != 1) continue;
                realMinority.push_back(forwardTransform(
                    normalizeRow(ds.rows[i], mapping.norm), mapping, 1));
                if (realMinority.size() == 8) break;
            }
            const std::size_t panels =
                std::min(realMinority.size(), syntheticImages.size());
            realMinority.resize(panels);
            std::vector<ImageSample> syntheticPanels(
                syntheticImages.begin(),
                syntheticImages.begin() + static_cast<long>(panels));
            writeImageGridPgm(realMinority, syntheticPanels,
                              (dir / "real_vs_synthetic.pgm").string());
            manifest.artifacts.push_back("real_vs_synthetic.pgm");
        }
        std::size_t synthetic = 0;
        for (std::size_t i = 0; i < ds.rowCount(); ++i)
            synthetic += static_cast<std::size_t>(ds.isSynthetic(i));
        manifest.metrics.emplace_back("rows_before",
                                      static_cast<double>(rowsBefore));
        manifest.metrics.emplace_back("rows_after",
                                      static_cast<double>(ds.rowCount()));
        manifest.metrics.emplace_back("synthetic_rows",
                                      static_cast<double>(synthetic));
    });
    saveManifest(manifest, (dir / "manifest.json").string());
    return manifest;
}

ExperimentManifest runClassify(const ExperimentConfig& config) {
    const std::filesystem::path dir = ensureOutDir(config);
    ExperimentManifest manifest = startManifest(config, "classify");
    TabularDataset ds;
    runPhase(manifest, "load",
             [&] { ds = loadPhaseDataset(config, manifest); });
    runPhase(manifest, "cv", [&] { runCvPhase(config, ds, manifest); });
    runPhase(manifest, "emit", [&] {
        appendResultsCsv((dir / "results.csv").string(), manifest);
        manifest.artifacts.push_back("results.csv");
    });
    saveManifest(manifest, (dir / "manifest.json").string());
    return manifest;
}

ExperimentManifest runBnlearn(const ExperimentConfig& config) {
    const std::filesystem::path dir = ensureOutDir(config);
    ExperimentManifest manifest = startManifest(config, "bnlearn");
    TabularDataset ds;
    runPhase(manifest, "load",
             [&] { ds = loadPhaseDataset(config, manifest); });

    StructureRun run;
    runPhase(manifest, "bn", [&] {
        recordSeed(manifest, config.pipeline.seed, "bn/search");
        run = learnStructure(ds, config.bn,
                             deriveSeed(config.pipeline.seed, "bn/search"));
        manifest.bn.ran = true;
        manifest.bn.scoreOriginal = run.search.score;
        manifest.bn.blanketOriginal = run.blanketSize;
    });

    runPhase(manifest, "emit", [&] {
        writeStructureArtifacts(run, dir, "bn", manifest);
        std::size_t edges = 0;
        for (const auto& parents : run.search.dag.parents)
            edges += parents.size();
        manifest.metrics.emplace_back("bic_score", run.search.score);
        manifest.metrics.emplace_back("edges", static_cast<double>(edges));
        manifest.metrics.emplace_back("blanket_size",
                                      static_cast<double>(run.blanketSize));
    });
    saveManifest(manifest, (dir / "manifest.json").string());
    return manifest;
}

ExperimentManifest runPipeline(const ExperimentConfig& config) {
    const std::filesystem::path dir = ensureOutDir(config);
    ExperimentManifest manifest = startManifest(config, "pipeline");
    TabularDataset ds;
    runPhase(manifest, "load",
             [&] { ds = loadPhaseDataset(config, manifest); });
    runPhase(manifest, "cv", [&] { runCvPhase(config, ds, manifest); });

    StructureRun original;
    StructureRun augmented;
    if (config.bn.enabled) {
        runPhase(manifest, "bn", [&] {
            recordSeed(manifest, config.pipeline.seed, "bn/original");
            recordSeed(manifest, config.pipeline.seed, "bn/map");
            recordSeed(manifest, config.pipeline.seed, "bn/augment");
            recordSeed(manifest, config.pipeline.seed, "bn/augmented");
            original =
                learnStructure(ds, config.bn,
                               deriveSeed(config.pipeline.seed, "bn/original"));
            TabularDataset enlarged = ds;
            augmentFullDataset(config, enlarged,
                               deriveSeed(config.pipeline.seed, "bn/map"),
                               deriveSeed(config.pipeline.seed, "bn/augment"));
            augmented = learnStructure(
                enlarged, config.bn,
                deriveSeed(config.pipeline.seed, "bn/augmented"));
            manifest.bn.ran = true;
            manifest.bn.scoreOriginal = original.search.score;
            manifest.bn.scoreAugmented = augmented.search.score;
            manifest.bn.blanketOriginal = original.blanketSize;
            manifest.bn.blanketAugmented = augmented.blanketSize;
        });
    }

    runPhase(manifest, "emit", [&] {
        appendResultsCsv((dir / "results.csv").string(), manifest);
        manifest.artifacts.push_back("results.csv");
        if (config.bn.enabled) {
            writeStructureArtifacts(original, dir, "bn_original", manifest);
            writeStructureArtifacts(augmented, dir, "bn_augmented", manifest);
        }
    });
    saveManifest(manifest, (dir / "manifest.json").string());
    return manifest;
}

}  // namespace tabaug
