#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tabaug {

struct EmbeddingConfig {
    double perplexity = 30.0;
    double learningRate = 200.0;
    int iterations = 1000;
    double earlyExaggeration = 12.0;
    int exaggerationIters = 250;
    /// Momentum after the exaggeration phase; 0.5 is used during it.
    double momentum = 0.8;
    std::uint64_t seed = 0;
};

struct FeatureEmbedding {
    std::vector<std::array<double, 2>> positions;
    double finalKl = 0.0;
};

/// Default perplexity 30 clamped into a valid range for small feature counts.
double clampedPerplexity(std::size_t featureCount, double requested = 30.0);

/// Symmetric, normalized affinity matrix (row-major d*d) over the feature
/// rows of `featureMatrix` (d rows of length n). Per-row Gaussian bandwidths
/// are bisected until each conditional distribution's perplexity is within
/// 1e-4 of the target.
std::vector<double> calibrateAffinities(
    const std::vector<std::vector<double>>& featureMatrix, double perplexity);

/// Same calibration starting from a precomputed squared-distance matrix.
std::vector<double> calibrateAffinitiesFromDistances(
    const std::vector<double>& squaredDistances, std::size_t d,
    double perplexity);

/// Gradient descent on KL(P||Q) with the Student-t low-dimensional kernel,
/// early exaggeration and a 0.5 -> momentum switch when it ends.
FeatureEmbedding tsneOptimize(const std::vector<double>& affinities,
                              std::size_t d, const EmbeddingConfig& config);

/// KL(P||Q) for the given positions; exposed for the descent and
/// finite-difference tests.
double klDivergence(const std::vector<double>& affinities,
                    const std::vector<std::array<double, 2>>& positions);

/// Analytic gradient of klDivergence with respect to the positions.
std::vector<std::array<double, 2>> klGradient(
    const std::vector<double>& affinities,
    const std::vector<std::array<double, 2>>& positions);

void writeEmbeddingCsv(const std::string& path,
                       const std::vector<std::string>& featureNames,
                       const FeatureEmbedding& embedding);

}  // namespace tabaug
