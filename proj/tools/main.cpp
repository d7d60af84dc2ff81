#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tabaug/pipeline.hpp"
#include "tabaug/report.hpp"

using namespace tabaug;

namespace {

/// Storage for the options every data-driven subcommand shares. Explicit
/// flags override --config values, which override the built-in defaults.
struct CommonFlags {
    std::string configPath;
    std::string dataset;
    std::string datasetName;
    std::string labelColumn;
    std::string out;
    std::string augmenter;
    std::string classifier;
    std::string methodLabel;
    std::uint64_t seed = 0;
    int folds = 5;
    int gridSize = 28;
    bool explain = false;

    CLI::Option* configOpt = nullptr;
    CLI::Option* datasetOpt = nullptr;
    CLI::Option* datasetNameOpt = nullptr;
    CLI::Option* labelOpt = nullptr;
    CLI::Option* outOpt = nullptr;
    CLI::Option* augmenterOpt = nullptr;
    CLI::Option* classifierOpt = nullptr;
    CLI::Option* methodLabelOpt = nullptr;
    CLI::Option* seedOpt = nullptr;
    CLI::Option* foldsOpt = nullptr;
    CLI::Option* gridOpt = nullptr;
};

void addCommonFlags(CLI::App* cmd, CommonFlags& f) {
    f.configOpt = cmd->add_option("--config", f.configPath,
                                  "Config file with key = value lines");
    f.datasetOpt = cmd->add_option("--dataset", f.dataset, "CSV dataset path");
    f.datasetNameOpt = cmd->add_option("--dataset-name", f.datasetName,
                                       "Dataset label used in reports");
    f.labelOpt =
        cmd->add_option("--label-column", f.labelColumn, "Label column name");
    f.outOpt = cmd->add_option("--out", f.out, "Output directory");
    f.augmenterOpt = cmd->add_option(
        "--augmenter", f.augmenter, "none|smote|adasyn|cgan|vqvae|vqgan");
    f.classifierOpt =
        cmd->add_option("--classifier", f.classifier, "gbdt|cnn");
    f.methodLabelOpt = cmd->add_option("--method-label", f.methodLabel,
                                       "Report label override");
    f.seedOpt = cmd->add_option("--seed", f.seed, "Master seed");
    f.foldsOpt = cmd->add_option("--folds", f.folds,
                                 "Cross-validation folds (default 5)");
    f.gridOpt = cmd->add_option("--grid-size", f.gridSize,
                                "Image grid side (default 28)");
    cmd->add_flag("--explain", f.explain,
                  "Print the effective configuration and exit");
}

ExperimentConfig assembleConfig(const CommonFlags& f) {
    ExperimentConfig base;
    base.pipeline.gridSize = 28;  // command-line default; config may override
    ExperimentConfig config = f.configOpt->count() > 0
                                  ? loadExperimentConfig(f.configPath, base)
                                  : base;
    if (f.datasetOpt->count() > 0) config.datasetPath = f.dataset;
    if (f.datasetNameOpt->count() > 0) config.datasetName = f.datasetName;
    if (f.labelOpt->count() > 0) config.labelColumn = f.labelColumn;
    if (f.outOpt->count() > 0) config.outDir = f.out;
    if (f.augmenterOpt->count() > 0)
        setConfigValue(config, "augmenter", f.augmenter);
    if (f.classifierOpt->count() > 0)
        setConfigValue(config, "classifier", f.classifier);
    if (f.methodLabelOpt->count() > 0)
        config.pipeline.methodLabel = f.methodLabel;
    if (f.seedOpt->count() > 0) config.pipeline.seed = f.seed;
    if (f.foldsOpt->count() > 0) config.folds = f.folds;
    if (f.gridOpt->count() > 0) config.pipeline.gridSize = f.gridSize;
    return config;
}

void printEvalSummary(const ExperimentManifest& manifest,
                      const std::string& outDir) {
    std::cout << formatReportRow(manifest.eval, manifest.datasetName) << "\n";
    for (const FoldRecord& fold : manifest.folds) {
        char line[128];
        std::snprintf(line, sizeof(line),
                      "  fold %d: auc %.4f (train %zu, test %zu, synthetic "
                      "%zu)",
                      fold.fold, fold.aucValue, fold.trainRows, fold.testRows,
                      fold.syntheticRows);
        std::cout << line << "\n";
    }
    std::cout << "manifest: " << outDir << "/manifest.json\n";
}

void printBnSummary(const BnPhaseResult& bn) {
    char line[128];
    std::snprintf(line, sizeof(line),
                  "BIC original %.4f -> augmented %.4f; blanket size %zu -> "
                  "%zu",
                  bn.scoreOriginal, bn.scoreAugmented, bn.blanketOriginal,
                  bn.blanketAugmented);
    std::cout << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Invertible image transforms, generative augmentation and "
                 "dual classifiers for imbalanced tabular data"};
    app.require_subcommand(1);

    CommonFlags transformFlags;
    std::size_t imageLimit = 16;
    CLI::App* transform = app.add_subcommand(
        "transform", "Fit the feature-to-pixel mapping and dump images");
    addCommonFlags(transform, transformFlags);
    CLI::Option* imageLimitOpt = transform->add_option(
        "--image-limit", imageLimit, "Per-row PGM cap, 0 keeps all rows");

    CommonFlags augmentFlags;
    CLI::App* augment = app.add_subcommand(
        "augment", "Balance the dataset once and write the combined CSV");
    addCommonFlags(augment, augmentFlags);

    CommonFlags classifyFlags;
    CLI::App* classify = app.add_subcommand(
        "classify", "Cross-validated AUC for the configured method");
    addCommonFlags(classify, classifyFlags);

    CommonFlags bnlearnFlags;
    std::size_t bins = 3;
    std::string target;
    CLI::App* bnlearn = app.add_subcommand(
        "bnlearn", "Learn a Bayesian network and report the Markov blanket");
    addCommonFlags(bnlearn, bnlearnFlags);
    CLI::Option* binsOpt =
        bnlearn->add_option("--bins", bins, "Discretization bins (default 3)");
    CLI::Option* targetOpt = bnlearn->add_option(
        "--target", target, "Blanket target node (default: label)");

    CommonFlags pipelineFlags;
    bool bnEnabled = false;
    std::size_t pipelineBins = 3;
    std::string pipelineTarget;
    CLI::App* pipeline = app.add_subcommand(
        "pipeline", "Full run: folds, augmentation, scoring, optional BN");
    addCommonFlags(pipeline, pipelineFlags);
    CLI::Option* bnFlag = pipeline->add_flag(
        "--bn", bnEnabled, "Also learn structures on original vs augmented");
    CLI::Option* pipelineBinsOpt = pipeline->add_option(
        "--bins", pipelineBins, "Discretization bins (default 3)");
    CLI::Option* pipelineTargetOpt = pipeline->add_option(
        "--target", pipelineTarget, "Blanket target node (default: label)");

    std::vector<std::string> manifestPaths;
    std::string reportOut = "out";
    CLI::App* report = app.add_subcommand(
        "report", "Summarize manifests into a table, CSV and ROC curves");
    report->add_option("manifests", manifestPaths, "Manifest JSON paths")
        ->required();
    report->add_option("--out", reportOut, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (transform->parsed()) {
            ExperimentConfig config = assembleConfig(transformFlags);
            if (imageLimitOpt->count() > 0) config.imageLimit = imageLimit;
            if (transformFlags.explain) {
                std::cout << explainConfig(config);
                return 0;
            }
            const ExperimentManifest manifest = runTransform(config);
            std::cout << "wrote mapping and " << manifest.artifacts.size() - 1
                      << " images to " << config.outDir << "\n";
        } else if (augment->parsed()) {
            const ExperimentConfig config = assembleConfig(augmentFlags);
            if (augmentFlags.explain) {
                std::cout << explainConfig(config);
                return 0;
            }
            const ExperimentManifest manifest = runAugment(config);
            double before = 0.0;
            double after = 0.0;
            double synthetic = 0.0;
            for (const auto& [name, value] : manifest.metrics) {
                if (name == "rows_before") before = value;
                if (name == "rows_after") after = value;
                if (name == "synthetic_rows") synthetic = value;
            }
            std::cout << "augmented " << config.datasetName << ": "
                      << static_cast<std::size_t>(before) << " -> "
                      << static_cast<std::size_t>(after) << " rows ("
                      << static_cast<std::size_t>(synthetic)
                      << " synthetic), csv in " << config.outDir << "\n";
        } else if (classify->parsed()) {
            const ExperimentConfig config = assembleConfig(classifyFlags);
            if (classifyFlags.explain) {
                std::cout << explainConfig(config);
                return 0;
            }
            printEvalSummary(runClassify(config), config.outDir);
        } else if (bnlearn->parsed()) {
            ExperimentConfig config = assembleConfig(bnlearnFlags);
            if (binsOpt->count() > 0) config.bn.bins = bins;
            if (targetOpt->count() > 0) config.bn.target = target;
            if (bnlearnFlags.explain) {
                std::cout << explainConfig(config);
                return 0;
            }
            const ExperimentManifest manifest = runBnlearn(config);
            double edges = 0.0;
            double blanket = 0.0;
            for (const auto& [name, value] : manifest.metrics) {
                if (name == "edges") edges = value;
                if (name == "blanket_size") blanket = value;
            }
            char line[128];
            std::snprintf(line, sizeof(line),
                          "BIC %.4f, %zu edges, blanket size %zu",
                          manifest.bn.scoreOriginal,
                          static_cast<std::size_t>(edges),
                          static_cast<std::size_t>(blanket));
            std::cout << line << "\nexports in " << config.outDir << "\n";
        } else if (pipeline->parsed()) {
            ExperimentConfig config = assembleConfig(pipelineFlags);
            if (bnFlag->count() > 0) config.bn.enabled = bnEnabled;
            if (pipelineBinsOpt->count() > 0) config.bn.bins = pipelineBins;
            if (pipelineTargetOpt->count() > 0)
                config.bn.target = pipelineTarget;
            if (pipelineFlags.explain) {
                std::cout << explainConfig(config);
                return 0;
            }
            const ExperimentManifest manifest = runPipeline(config);
            printEvalSummary(manifest, config.outDir);
            if (manifest.bn.ran) printBnSummary(manifest.bn);
        } else if (report->parsed()) {
            const std::vector<std::string> written =
                writeReport(manifestPaths, reportOut);
            std::cout << "wrote " << written.size() << " report files to "
                      << reportOut << "\n";
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
