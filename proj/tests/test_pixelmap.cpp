#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "tabaug/pixelmap.hpp"
#include "tabaug/rng.hpp"

using namespace tabaug;

namespace {

NormalizationParams identityNorm(std::size_t d) {
    NormalizationParams norm;
    norm.minValue.assign(d, 0.0);
    norm.maxValue.assign(d, 1.0);
    return norm;
}

FeatureEmbedding randomEmbedding(std::size_t d, std::uint64_t seed) {
    FeatureEmbedding emb;
    Rng rng(seed);
    emb.positions.resize(d);
    for (auto& p : emb.positions) {
        p[0] = rng.uniform(-5.0, 5.0);
        p[1] = rng.uniform(-5.0, 5.0);
    }
    return emb;
}

}  // namespace

TEST_CASE("single feature maps to its quantized cell") {
    FeatureEmbedding emb;
    emb.positions = {{0.3, 0.8}};
    const auto m = buildMapping(emb, 28, identityNorm(1));
    CHECK(m.featureCount() == 1);
    CHECK(m.collisionCount == 0);
    // degenerate axes quantize to cell (0,0)
    CHECK(m.cellOfFeature[0][0] == 0);
    CHECK(m.cellOfFeature[0][1] == 0);
}

TEST_CASE("mapping refuses grids with fewer cells than features") {
    const auto emb = randomEmbedding(360, 1);
    CHECK_THROWS_WITH_AS(buildMapping(emb, 10, identityNorm(360)),
                         doctest::Contains("grid too small"),
                         std::invalid_argument);
}

TEST_CASE("full grid of distinct positions is a bijection") {
    const int g = 6;
    FeatureEmbedding emb;
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < g; ++c)
            emb.positions.push_back({c + 0.5, r + 0.5});
    const auto m = buildMapping(emb, g, identityNorm(g * g));
    std::set<std::pair<int, int>> cells;
    for (const auto& cell : m.cellOfFeature)
        cells.insert({cell[0], cell[1]});
    CHECK(cells.size() == static_cast<std::size_t>(g * g));
}

TEST_CASE("collision moves the later feature to the nearest free cell") {
    // Brute-force oracle: replay the greedy rule with an exhaustive scan.
    const std::size_t d = 40;
    const int g = 7;
    const auto emb = randomEmbedding(d, 33);
    const auto m = buildMapping(emb, g, identityNorm(d));

    std::array<double, 2> lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const auto& p : emb.positions)
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    std::set<std::pair<int, int>> taken;
    int collisions = 0;
    for (std::size_t j = 0; j < d; ++j) {
        auto cellFor = [&](int axis) {
            const double t =
                (emb.positions[j][axis] - lo[axis]) / (hi[axis] - lo[axis]);
            return std::min(static_cast<int>(t * g), g - 1);
        };
        const int col = cellFor(0), row = cellFor(1);
        std::pair<int, int> chosen{row, col};
        if (taken.count(chosen)) {
            ++collisions;
            double best = 1e300;
            chosen = {-1, -1};
            for (int r = 0; r < g; ++r)
                for (int c = 0; c < g; ++c) {
                    if (taken.count({r, c})) continue;
                    const double dist = double(r - row) * (r - row) +
                                        double(c - col) * (c - col);
                    if (dist < best) {
                        best = dist;
                        chosen = {r, c};
                    }
                }
        }
        taken.insert(chosen);
        CHECK(m.cellOfFeature[j][0] == chosen.first);
        CHECK(m.cellOfFeature[j][1] == chosen.second);
    }
    CHECK(m.collisionCount == collisions);
    CHECK(collisions > 0);
}

TEST_CASE("cell assignment is injective") {
    for (std::uint64_t seed : {2u, 3u, 4u}) {
        const std::size_t d = 100;
        const auto m = buildMapping(randomEmbedding(d, seed), 12, identityNorm(d));
        std::set<std::pair<int, int>> cells;
        for (const auto& cell : m.cellOfFeature)
            cells.insert({cell[0], cell[1]});
        CHECK(cells.size() == d);
    }
}

TEST_CASE("mapping is invariant to positive affine transforms") {
    const std::size_t d = 60;
    const auto emb = randomEmbedding(d, 8);
    const auto base = buildMapping(emb, 10, identityNorm(d));
    Rng rng(91);
    for (int trial = 0; trial < 4; ++trial) {
        FeatureEmbedding warped = emb;
        const double ax = rng.uniform(0.1, 10.0), bx = rng.uniform(-50.0, 50.0);
        const double ay = rng.uniform(0.1, 10.0), by = rng.uniform(-50.0, 50.0);
        for (auto& p : warped.positions) {
            p[0] = ax * p[0] + bx;
            p[1] = ay * p[1] + by;
        }
        const auto m = buildMapping(warped, 10, identityNorm(d));
        CHECK(m.cellOfFeature == base.cellOfFeature);
    }
}

TEST_CASE("all-zero row transforms to an all-zero image") {
    const std::size_t d = 20;
    const auto m = buildMapping(randomEmbedding(d, 5), 8, identityNorm(d));
    const auto img = forwardTransform(std::vector<double>(d, 0.0), m);
    for (double v : img.pixels) CHECK(v == 0.0);
}

TEST_CASE("unit vector lights exactly one pixel") {
    const std::size_t d = 20;
    const auto m = buildMapping(randomEmbedding(d, 5), 8, identityNorm(d));
    std::vector<double> row(d, 0.0);
    row[7] = 1.0;
    const auto img = forwardTransform(row, m);
    int nonzero = 0;
    for (double v : img.pixels) nonzero += (v != 0.0);
    CHECK(nonzero == 1);
    CHECK(img.at(m.cellOfFeature[7][0], m.cellOfFeature[7][1]) == 1.0);
}

TEST_CASE("a 360-feature row occupies 360 cells of a 28x28 grid") {
    const std::size_t d = 360;
    const auto m = buildMapping(randomEmbedding(d, 13), 28, identityNorm(d));
    const auto img = forwardTransform(std::vector<double>(d, 0.5), m);
    int nonzero = 0;
    for (double v : img.pixels) nonzero += (v != 0.0);
    CHECK(nonzero == 360);
}

TEST_CASE("out-of-range values are rejected") {
    const std::size_t d = 4;
    const auto m = buildMapping(randomEmbedding(d, 5), 4, identityNorm(d));
    CHECK_THROWS_AS(forwardTransform({0.1, 1.2, 0.3, 0.4}, m),
                    std::invalid_argument);
    CHECK_THROWS_AS(forwardTransform({0.1, -0.2, 0.3, 0.4}, m),
                    std::invalid_argument);
}

TEST_CASE("inverse ignores noise on non-feature cells") {
    const std::size_t d = 6;
    const auto m = buildMapping(randomEmbedding(d, 15), 6, identityNorm(d));
    std::vector<double> row{0.1, 0.9, 0.3, 0.7, 0.5, 0.2};
    auto img = forwardTransform(row, m);
    std::set<std::pair<int, int>> used;
    for (const auto& cell : m.cellOfFeature) used.insert({cell[0], cell[1]});
    Rng rng(4);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
            if (!used.count({r, c})) img.at(r, c) = rng.uniform();
    CHECK(inverseTransform(img, m) == row);
}

TEST_CASE("round trip is exact, including denormalization") {
    Rng rng(100);
    const std::size_t d = 30;
    NormalizationParams norm;
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = rng.uniform(-100.0, 0.0);
        norm.minValue.push_back(lo);
        norm.maxValue.push_back(lo + rng.uniform(0.5, 100.0));
    }
    const auto m = buildMapping(randomEmbedding(d, 44), 8, norm);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> row(d);
        for (auto& v : row) v = rng.uniform();
        const auto img = forwardTransform(row, m);
        CHECK(inverseTransform(img, m) == row);  // bitwise
        const auto denorm = inverseTransform(img, m, true);
        for (std::size_t j = 0; j < d; ++j) {
            const double expect =
                norm.minValue[j] + row[j] * (norm.maxValue[j] - norm.minValue[j]);
            CHECK(std::abs(denorm[j] - expect) <=
                  1e-9 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("mapping json round trips") {
    const std::size_t d = 9;
    const auto m = buildMapping(randomEmbedding(d, 3), 5, identityNorm(d));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
    const auto text = mappingToJson(m, names);
    const auto back = mappingFromJson(text);
    CHECK(back.gridSize == m.gridSize);
    CHECK(back.cellOfFeature == m.cellOfFeature);
    CHECK(back.collisionCount == m.collisionCount);
    CHECK(back.norm.minValue == m.norm.minValue);
}

TEST_CASE("pgm writer emits a valid P5 header and payload") {
    ImageSample img;
    img.gridSize = 3;
    img.pixels = {0.0, 0.5, 1.0, 0.25, 0.75, 0.1, 0.9, 0.0, 1.0};
    const auto path = (testutil::tempDir() / "img.pgm").string();
    writePgm(img, path);
    std::ifstream in(path, std::ios::binary);
    std::string magic, dims;
    std::getline(in, magic);
    CHECK(magic == "P5");
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    CHECK(w == 3);
    CHECK(h == 3);
    CHECK(maxval == 255);
    in.get();
    std::vector<unsigned char> data(9);
    in.read(reinterpret_cast<char*>(data.data()), 9);
    CHECK(data[0] == 0);
    CHECK(data[2] == 255);
    CHECK(data[1] == 128);
}

TEST_CASE("clampPixels counts and fixes out-of-range values") {
    ImageSample img;
    img.gridSize = 2;
    img.pixels = {-0.5, 0.5, 1.5, 1.0};
    CHECK(clampPixels(img) == 2);
    CHECK(img.pixels[0] == 0.0);
    CHECK(img.pixels[2] == 1.0);
    CHECK(clampPixels(img) == 0);
}
