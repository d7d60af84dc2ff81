#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tabaug/dataset.hpp"
#include "tabaug/embedding.hpp"

namespace tabaug {

/// Injective feature -> grid-cell assignment. One pixel per feature, so the
/// row -> image transform is exactly invertible.
struct PixelMapping {
    int gridSize = 28;
    std::vector<std::array<int, 2>> cellOfFeature;  // (row, col)
    int collisionCount = 0;
    NormalizationParams norm;

    std::size_t featureCount() const { return cellOfFeature.size(); }
};

struct ImageSample {
    int gridSize = 0;
    std::vector<double> pixels;  // row-major, gridSize*gridSize
    int label = 0;
    bool synthetic = false;

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * gridSize + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * gridSize + c]; }
};

/// Quantizes embedding positions to grid cells. Positions are min-max scaled
/// per axis first, so any positive per-axis affine transform of the embedding
/// yields the identical assignment. Collisions are resolved in feature-index
/// order: the second feature moves to the nearest free cell by Euclidean
/// center distance, ties broken by (row, col).
PixelMapping buildMapping(const FeatureEmbedding& embedding, int gridSize,
                          const NormalizationParams& norm);

/// row[j] lands at cellOfFeature[j]; all other pixels are 0. Values must be
/// normalized to [0,1].
ImageSample forwardTransform(const std::vector<double>& row,
                             const PixelMapping& mapping, int label = 0);

/// Reads back row[j] = pixels[cellOfFeature[j]]; values on non-feature cells
/// are ignored. Set denormalizeOutput to map back to the original scale.
std::vector<double> inverseTransform(const ImageSample& image,
                                     const PixelMapping& mapping,
                                     bool denormalizeOutput = false);

/// Clamps all pixels into [0,1] in place; returns how many were out of range.
std::size_t clampPixels(ImageSample& image);

std::string mappingToJson(const PixelMapping& mapping,
                          const std::vector<std::string>& featureNames);
PixelMapping mappingFromJson(const std::string& text);

/// Binary PGM (P5, maxval 255).
void writePgm(const ImageSample& image, const std::string& path);

/// Single PGM with one row of real panels above one row of synthetic panels.
void writeImageGridPgm(const std::vector<ImageSample>& real,
                       const std::vector<ImageSample>& synthetic,
                       const std::string& path);

}  // namespace tabaug
