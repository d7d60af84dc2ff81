#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tabaug/bayesnet.hpp"
#include "tabaug/classify.hpp"

namespace tabaug {

/// Options for the optional Bayesian-network phase of a run.
struct BnOptions {
    bool enabled = false;
    std::size_t bins = 3;
    SearchConfig search;
    /// Blanket target node; empty means the appended label node.
    std::string target;
};

/// Run-level configuration: dataset source and preprocessing, the per-fold
/// pipeline, the BN phase, and the output directory. pipeline.seed is the
/// master seed every sub-seed derives from.
struct ExperimentConfig {
    std::string datasetPath;
    std::string datasetName = "dataset";
    std::string labelColumn = "label";
    std::string missingToken;
    std::size_t maxMissingPerFeature = 0;
    int folds = 5;
    /// Per-row PGM dump cap for the transform command; 0 keeps every row.
    std::size_t imageLimit = 16;
    std::string outDir = "out";
    PipelineConfig pipeline;
    BnOptions bn;
};

/// Parses the plain-text key-value config format ("key = value" lines, '#'
/// comments) on top of `base`. Unknown keys and malformed values throw.
ExperimentConfig parseExperimentConfig(const std::string& text,
                                       ExperimentConfig base = {});
ExperimentConfig loadExperimentConfig(const std::string& path,
                                      ExperimentConfig base = {});

/// Applies one schema key to a config; the same validation the file parser
/// uses, so command-line overrides share its error messages.
void setConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

/// Renders every effective setting, defaults included, in the same key-value
/// format parseExperimentConfig accepts; parse(explain(c)) reproduces c.
std::string explainConfig(const ExperimentConfig& config);

struct PhaseTiming {
    std::string phase;
    double seconds = 0.0;
};

/// Outcome of learning structures on original vs augmented data.
struct BnPhaseResult {
    bool ran = false;
    double scoreOriginal = 0.0;
    double scoreAugmented = 0.0;
    std::size_t blanketOriginal = 0;
    std::size_t blanketAugmented = 0;
};

/// Record of one command invocation: config snapshot, dataset hash, derived
/// seeds, timings, metrics, artifact paths, warnings. Serializes to JSON
/// losslessly; the content hash skips timings so identical (config, seed)
/// runs hash identically regardless of wall-clock noise.
struct ExperimentManifest {
    std::string command;
    std::string configText;
    std::string datasetName;
    std::uint64_t datasetHash = 0;
    std::uint64_t masterSeed = 0;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::vector<PhaseTiming> timings;
    std::vector<std::pair<std::string, double>> metrics;
    EvalResult eval;
    std::vector<FoldRecord> folds;
    BnPhaseResult bn;
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
};

std::string manifestToJson(const ExperimentManifest& manifest);
ExperimentManifest manifestFromJson(const std::string& text);

/// FNV-1a over the canonical JSON with timings stripped.
std::uint64_t manifestContentHash(const ExperimentManifest& manifest);

void saveManifest(const ExperimentManifest& manifest, const std::string& path);
ExperimentManifest loadManifest(const std::string& path);

/// Fits the transform on the full dataset and dumps mapping JSON plus
/// per-row PGM images under config.outDir.
ExperimentManifest runTransform(const ExperimentConfig& config);

/// Augments the full dataset once and writes the combined CSV; generative
/// augmenters also emit a real-vs-synthetic image grid.
ExperimentManifest runAugment(const ExperimentConfig& config);

/// Cross-validated evaluation of the configured augmenter + classifier;
/// appends a results.csv row and stores per-fold records in the manifest.
ExperimentManifest runClassify(const ExperimentConfig& config);

/// Discretizes, learns a structure by tabu search, and writes DOT/JSON
/// exports plus the Markov-blanket report.
ExperimentManifest runBnlearn(const ExperimentConfig& config);

/// Full run: cross-validated evaluation plus, when enabled, BN learning on
/// original vs augmented data with both scores and blanket diagrams.
ExperimentManifest runPipeline(const ExperimentConfig& config);

}  // namespace tabaug
