#include "tabaug/pixelmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace tabaug {

PixelMapping buildMapping(const FeatureEmbedding& embedding, int gridSize,
                          const NormalizationParams& norm) {
    const std::size_t d = embedding.positions.size();
    if (gridSize < 1) throw std::invalid_argument("grid size must be >= 1");
    const std::size_t cells =
        static_cast<std::size_t>(gridSize) * static_cast<std::size_t>(gridSize);
    if (d > cells)
        throw std::invalid_argument(
            "grid too small for lossless mapping: " + std::to_string(d) +
            " features > " + std::to_string(cells) + " cells");

    // Per-axis min-max scale to [0, gridSize), then floor to a cell. The
    // scaling removes translation and positive per-axis scaling of the
    // embedding.
    std::array<double, 2> lo{std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity()};
    std::array<double, 2> hi{-std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
    for (const auto& p : embedding.positions)
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }

    auto quantize = [&](double v, int axis) {
        if (hi[axis] <= lo[axis]) return 0;
        const double t = (v - lo[axis]) / (hi[axis] - lo[axis]);
        int c = static_cast<int>(t * gridSize);
        return std::min(c, gridSize - 1);
    };

    PixelMapping mapping;
    mapping.gridSize = gridSize;
    mapping.norm = norm;
    mapping.cellOfFeature.resize(d);
    std::vector<char> taken(cells, 0);

    for (std::size_t j = 0; j < d; ++j) {
        // axis 0 of the embedding -> column, axis 1 -> row
        const int col = quantize(embedding.positions[j][0], 0);
        const int row = quantize(embedding.positions[j][1], 1);
        int bestR = row, bestC = col;
        if (taken[static_cast<std::size_t>(row) * gridSize + col]) {
            ++mapping.collisionCount;
            double bestDist = std::numeric_limits<double>::infinity();
            bestR = -1;
            for (int r = 0; r < gridSize; ++r)
                for (int c = 0; c < gridSize; ++c) {
                    if (taken[static_cast<std::size_t>(r) * gridSize + c]) continue;
                    const double dr = r - row, dc = c - col;
                    const double dist = dr * dr + dc * dc;
                    if (dist < bestDist) {
                        bestDist = dist;
                        bestR = r;
                        bestC = c;
                    }
                }
        }
        taken[static_cast<std::size_t>(bestR) * gridSize + bestC] = 1;
        mapping.cellOfFeature[j] = {bestR, bestC};
    }
    return mapping;
}

ImageSample forwardTransform(const std::vector<double>& row,
                             const PixelMapping& mapping, int label) {
    if (row.size() != mapping.featureCount())
        throw std::invalid_argument("row length does not match mapping");
    ImageSample img;
    img.gridSize = mapping.gridSize;
    img.label = label;
    img.pixels.assign(
        static_cast<std::size_t>(mapping.gridSize) * mapping.gridSize, 0.0);
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (!(row[j] >= 0.0 && row[j] <= 1.0))
            throw std::invalid_argument(
                "feature " + std::to_string(j) +
                " outside [0,1]; normalize before transforming");
        img.at(mapping.cellOfFeature[j][0], mapping.cellOfFeature[j][1]) = row[j];
    }
    return img;
}

std::vector<double> inverseTransform(const ImageSample& image,
                                     const PixelMapping& mapping,
                                     bool denormalizeOutput) {
    if (image.gridSize != mapping.gridSize)
        throw std::invalid_argument("image grid does not match mapping grid");
    std::vector<double> row(mapping.featureCount());
    for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = image.at(mapping.cellOfFeature[j][0], mapping.cellOfFeature[j][1]);
    if (denormalizeOutput) return denormalizeRow(row, mapping.norm);
    return row;
}

std::size_t clampPixels(ImageSample& image) {
    std::size_t clamped = 0;
    for (double& v : image.pixels) {
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        } else if (v > 1.0) {
            v = 1.0;
            ++clamped;
        }
    }
    return clamped;
}

std::string mappingToJson(const PixelMapping& mapping,
                          const std::vector<std::string>& featureNames) {
    nlohmann::json j;
    j["grid_size"] = mapping.gridSize;
    j["collision_count"] = mapping.collisionCount;
    auto cells = nlohmann::json::array();
    for (const auto& cell : mapping.cellOfFeature)
        cells.push_back({cell[0], cell[1]});
    j["cells"] = cells;
    j["feature_names"] = featureNames;
    j["normalization"]["min"] = mapping.norm.minValue;
    j["normalization"]["max"] = mapping.norm.maxValue;
    return j.dump(2);
}

PixelMapping mappingFromJson(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PixelMapping mapping;
    mapping.gridSize = j.at("grid_size").get<int>();
    mapping.collisionCount = j.at("collision_count").get<int>();
    for (const auto& cell : j.at("cells"))
        mapping.cellOfFeature.push_back({cell[0].get<int>(), cell[1].get<int>()});
    mapping.norm.minValue = j.at("normalization").at("min").get<std::vector<double>>();
    mapping.norm.maxValue = j.at("normalization").at("max").get<std::vector<double>>();
    return mapping;
}

void writePgm(const ImageSample& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "P5\n" << image.gridSize << ' ' << image.gridSize << "\n255\n";
    for (double v : image.pixels) {
        const double c = std::clamp(v, 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
    }
}

void writeImageGridPgm(const std::vector<ImageSample>& real,
                       const std::vector<ImageSample>& synthetic,
                       const std::string& path) {
    if (real.empty() || real.size() != synthetic.size())
        throw std::invalid_argument(
            "image grid needs equal nonzero counts of real and synthetic panels");
    const int g = real.front().gridSize;
    const int cols = static_cast<int>(real.size());
    const int pad = 1;
    const int width = cols * g + (cols - 1) * pad;
    const int height = 2 * g + pad;
    std::vector<unsigned char> canvas(
        static_cast<std::size_t>(width) * height, 255);
    auto blit = [&](const ImageSample& img, int top, int left) {
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                const double v = std::clamp(img.at(r, c), 0.0, 1.0);
                canvas[static_cast<std::size_t>(top + r) * width + left + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    };
    for (int i = 0; i < cols; ++i) {
        blit(real[static_cast<std::size_t>(i)], 0, i * (g + pad));
        blit(synthetic[static_cast<std::size_t>(i)], g + pad, i * (g + pad));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(canvas.data()),
              static_cast<std::streamsize>(canvas.size()));
}

}  // namespace tabaug
