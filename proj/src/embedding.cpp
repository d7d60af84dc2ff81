#include "tabaug/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tabaug/rng.hpp"

namespace tabaug {

double clampedPerplexity(std::size_t featureCount, double requested) {
    double p = std::min(requested, static_cast<double>(featureCount - 1) / 3.0);
    p = std::max(p, 2.0);
    p = std::min(p, static_cast<double>(featureCount) - 1.0 - 1e-6);
    return p;
}

namespace {

/// Conditional distribution and its perplexity for one row at precision beta.
double rowPerplexity(const std::vector<double>& sqDist, std::size_t d,
                     std::size_t i, double beta, std::vector<double>& p) {
    double sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == i) {
            p[j] = 0.0;
            continue;
        }
        p[j] = std::exp(-beta * sqDist[i * d + j]);
        sum += p[j];
    }
    if (sum <= 0.0) sum = std::numeric_limits<double>::min();
    double entropy = 0.0;  // in bits
    for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        p[j] /= sum;
        if (p[j] > 1e-300) entropy -= p[j] * std::log2(p[j]);
    }
    return std::exp2(entropy);
}

}  // namespace

std::vector<double> calibrateAffinitiesFromDistances(
    const std::vector<double>& squaredDistances, std::size_t d,
    double perplexity) {
    if (d < 3) throw std::invalid_argument("affinity calibration needs d >= 3");
    if (perplexity <= 1.0 || perplexity >= static_cast<double>(d))
        throw std::invalid_argument("perplexity must be in (1, d)");
    if (squaredDistances.size() != d * d)
        throw std::invalid_argument("distance matrix has wrong size");

    std::vector<double> conditional(d * d, 0.0);
    std::vector<double> p(d, 0.0);
    constexpr double kTol = 1e-4;
    constexpr int kMaxSteps = 200;

    for (std::size_t i = 0; i < d; ++i) {
        double beta = 1.0, betaLo = 0.0, betaHi = std::numeric_limits<double>::infinity();
        double perp = rowPerplexity(squaredDistances, d, i, beta, p);
        int step = 0;
        while (std::abs(perp - perplexity) > kTol && step < kMaxSteps) {
            if (perp > perplexity) {
                betaLo = beta;
                beta = std::isinf(betaHi) ? beta * 2.0 : 0.5 * (betaLo + betaHi);
            } else {
                betaHi = beta;
                beta = (betaLo == 0.0) ? beta / 2.0 : 0.5 * (betaLo + betaHi);
            }
            perp = rowPerplexity(squaredDistances, d, i, beta, p);
            ++step;
        }
        if (std::abs(perp - perplexity) > kTol)
            throw std::runtime_error(
                "perplexity bisection did not converge for feature " +
                std::to_string(i));
        for (std::size_t j = 0; j < d; ++j) conditional[i * d + j] = p[j];
    }

    // Symmetrize and normalize to sum 1; each conditional row sums to 1 so the
    // total is exact.
    std::vector<double> joint(d * d, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j)
                joint[i * d + j] =
                    (conditional[i * d + j] + conditional[j * d + i]) * scale;
    return joint;
}

std::vector<double> calibrateAffinities(
    const std::vector<std::vector<double>>& featureMatrix, double perplexity) {
    const std::size_t d = featureMatrix.size();
    if (d < 3) throw std::invalid_argument("affinity calibration needs d >= 3");
    std::vector<double> sq(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < featureMatrix[i].size(); ++t) {
                const double diff = featureMatrix[i][t] - featureMatrix[j][t];
                s += diff * diff;
            }
            sq[i * d + j] = sq[j * d + i] = s;
        }
    return calibrateAffinitiesFromDistances(sq, d, perplexity);
}

double klDivergence(const std::vector<double>& affinities,
                    const std::vector<std::array<double, 2>>& positions) {
    const std::size_t d = positions.size();
    double sumW = 0.0;
    std::vector<double> w(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            const double dx = positions[i][0] - positions[j][0];
            const double dy = positions[i][1] - positions[j][1];
            w[i * d + j] = 1.0 / (1.0 + dx * dx + dy * dy);
            sumW += w[i * d + j];
        }
    double kl = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            const double p = affinities[i * d + j];
            if (p <= 0.0) continue;
            const double q = std::max(w[i * d + j] / sumW, 1e-300);
            kl += p * std::log(p / q);
        }
    return kl;
}

std::vector<std::array<double, 2>> klGradient(
    const std::vector<double>& affinities,
    const std::vector<std::array<double, 2>>& positions) {
    const std::size_t d = positions.size();
    std::vector<double> w(d * d, 0.0);
    double sumW = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            const double dx = positions[i][0] - positions[j][0];
            const double dy = positions[i][1] - positions[j][1];
            w[i * d + j] = 1.0 / (1.0 + dx * dx + dy * dy);
            sumW += w[i * d + j];
        }
    std::vector<std::array<double, 2>> grad(d, {0.0, 0.0});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            const double q = w[i * d + j] / sumW;
            const double mult = 4.0 * (affinities[i * d + j] - q) * w[i * d + j];
            grad[i][0] += mult * (positions[i][0] - positions[j][0]);
            grad[i][1] += mult * (positions[i][1] - positions[j][1]);
        }
    return grad;
}

FeatureEmbedding tsneOptimize(const std::vector<double>& affinities,
                              std::size_t d, const EmbeddingConfig& config) {
    if (config.iterations < config.exaggerationIters || config.exaggerationIters < 0)
        throw std::invalid_argument("iterations must be >= exaggeration iterations");
    if (affinities.size() != d * d)
        throw std::invalid_argument("affinity matrix has wrong size");

    Rng rng(config.seed);
    std::vector<std::array<double, 2>> pos(d), inc(d, {0.0, 0.0}),
        gains(d, {1.0, 1.0});
    for (auto& p : pos) {
        p[0] = 1e-4 * rng.normal();
        p[1] = 1e-4 * rng.normal();
    }

    std::vector<double> p = affinities;
    bool exaggerated = config.exaggerationIters > 0;
    if (exaggerated)
        for (double& v : p) v *= config.earlyExaggeration;

    for (int iter = 0; iter < config.iterations; ++iter) {
        if (exaggerated && iter >= config.exaggerationIters) {
            p = affinities;
            exaggerated = false;
        }
        const double momentum =
            iter < config.exaggerationIters ? 0.5 : config.momentum;
        auto grad = klGradient(p, pos);
        for (std::size_t i = 0; i < d; ++i)
            for (int a = 0; a < 2; ++a) {
                if (!std::isfinite(grad[i][a]))
                    throw std::runtime_error("NaN gradient at iteration " +
                                             std::to_string(iter));
                // vdM adaptive gains
                const bool sameSign = (grad[i][a] > 0.0) == (inc[i][a] > 0.0);
                gains[i][a] = sameSign ? std::max(gains[i][a] * 0.8, 0.01)
                                       : gains[i][a] + 0.2;
                inc[i][a] = momentum * inc[i][a] -
                            config.learningRate * gains[i][a] * grad[i][a];
                pos[i][a] += inc[i][a];
            }
        // re-center
        double cx = 0.0, cy = 0.0;
        for (const auto& q : pos) {
            cx += q[0];
            cy += q[1];
        }
        cx /= static_cast<double>(d);
        cy /= static_cast<double>(d);
        for (auto& q : pos) {
            q[0] -= cx;
            q[1] -= cy;
        }
    }

    FeatureEmbedding out;
    out.positions = std::move(pos);
    out.finalKl = klDivergence(affinities, out.positions);
    return out;
}

void writeEmbeddingCsv(const std::string& path,
                       const std::vector<std::string>& featureNames,
                       const FeatureEmbedding& embedding) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "feature,x,y\n";
    out.precision(17);
    for (std::size_t i = 0; i < embedding.positions.size(); ++i)
        out << featureNames[i] << ',' << embedding.positions[i][0] << ','
            << embedding.positions[i][1] << '\n';
}

}  // namespace tabaug
