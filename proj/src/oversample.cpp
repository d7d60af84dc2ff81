#include "tabaug/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabaug/rng.hpp"

namespace tabaug {

namespace {

double squaredDistance(const std::vector<double>& a,
                       const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sum += d * d;
    }
    return sum;
}

std::vector<std::size_t> minorityIndices(const TabularDataset& ds) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] == 1) idx.push_back(i);
    return idx;
}

void validate(const TabularDataset& ds, const OversampleConfig& config,
              std::size_t minorityCount) {
    if (ds.hasMissing())
        throw std::invalid_argument(
            "oversampling needs a complete dataset; drop missing rows first");
    if (config.kNeighbors < 1)
        throw std::invalid_argument("k_neighbors must be >= 1");
    if (minorityCount <= config.kNeighbors)
        throw std::invalid_argument(
            "k_neighbors must be smaller than the minority count");
}

/// For each listed row, the k nearest rows from `pool` (dataset indices,
/// self excluded), ordered by distance then index.
std::vector<std::vector<std::size_t>> nearestNeighbors(
    const TabularDataset& ds, const std::vector<std::size_t>& queries,
    const std::vector<std::size_t>& pool, std::size_t k) {
    std::vector<std::vector<std::size_t>> result;
    result.reserve(queries.size());
    std::vector<std::pair<double, std::size_t>> scored;
    for (const std::size_t q : queries) {
        scored.clear();
        for (const std::size_t c : pool) {
            if (c == q) continue;
            scored.emplace_back(squaredDistance(ds.rows[q], ds.rows[c]), c);
        }
        std::sort(scored.begin(), scored.end());
        std::vector<std::size_t> nearest;
        for (std::size_t i = 0; i < k && i < scored.size(); ++i)
            nearest.push_back(scored[i].second);
        result.push_back(std::move(nearest));
    }
    return result;
}

std::vector<double> interpolate(const std::vector<double>& from,
                                const std::vector<double>& to, double lambda) {
    std::vector<double> row(from.size());
    for (std::size_t j = 0; j < from.size(); ++j)
        row[j] = from[j] + lambda * (to[j] - from[j]);
    return row;
}

std::size_t balanceGap(const TabularDataset& ds, std::size_t minorityCount) {
    const std::size_t majorityCount = ds.rowCount() - minorityCount;
    return majorityCount > minorityCount ? majorityCount - minorityCount : 0;
}

}  // namespace

OversampleResult smote(const TabularDataset& ds,
                       const OversampleConfig& config) {
    const auto minority = minorityIndices(ds);
    validate(ds, config, minority.size());
    OversampleResult result;
    const std::size_t gap = balanceGap(ds, minority.size());
    if (gap == 0) return result;

    const auto neighbors =
        nearestNeighbors(ds, minority, minority, config.kNeighbors);
    Rng rng(deriveSeed(config.seed, "smote"));
    result.rows.reserve(gap);
    for (std::size_t g = 0; g < gap; ++g) {
        const std::size_t pick = rng.index(minority.size());
        const std::size_t nn = neighbors[pick][rng.index(neighbors[pick].size())];
        result.rows.push_back(interpolate(ds.rows[minority[pick]], ds.rows[nn],
                                          rng.uniform()));
    }
    return result;
}

std::vector<double> adasynDifficulty(const TabularDataset& ds,
                                     std::size_t kNeighbors) {
    const auto minority = minorityIndices(ds);
    std::vector<std::size_t> all(ds.rowCount());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto neighbors = nearestNeighbors(ds, minority, all, kNeighbors);
    std::vector<double> difficulty(minority.size(), 0.0);
    for (std::size_t i = 0; i < minority.size(); ++i) {
        std::size_t majorityHits = 0;
        for (const std::size_t n : neighbors[i])
            if (ds.labels[n] != 1) ++majorityHits;
        difficulty[i] = static_cast<double>(majorityHits) /
                        static_cast<double>(kNeighbors);
    }
    return difficulty;
}

std::vector<std::size_t> adasynAllocation(const std::vector<double>& difficulty,
                                          std::size_t gap) {
    const double total =
        std::accumulate(difficulty.begin(), difficulty.end(), 0.0);
    std::vector<double> ideal(difficulty.size());
    if (total == 0.0) {
        const double share =
            static_cast<double>(gap) / static_cast<double>(difficulty.size());
        std::fill(ideal.begin(), ideal.end(), share);
    } else {
        for (std::size_t i = 0; i < difficulty.size(); ++i)
            ideal[i] = difficulty[i] / total * static_cast<double>(gap);
    }

    std::vector<std::size_t> counts(ideal.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        counts[i] = static_cast<std::size_t>(std::floor(ideal[i]));
        assigned += counts[i];
    }
    std::vector<std::size_t> order(ideal.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         const double ra = ideal[a] - std::floor(ideal[a]);
                         const double rb = ideal[b] - std::floor(ideal[b]);
                         if (ra != rb) return ra > rb;
                         return a < b;
                     });
    for (std::size_t i = 0; assigned < gap; ++i, ++assigned)
        ++counts[order[i % order.size()]];
    return counts;
}

OversampleResult adasyn(const TabularDataset& ds,
                        const OversampleConfig& config) {
    const auto minority = minorityIndices(ds);
    validate(ds, config, minority.size());
    OversampleResult result;
    const std::size_t gap = balanceGap(ds, minority.size());
    if (gap == 0) return result;

    const auto difficulty = adasynDifficulty(ds, config.kNeighbors);
    if (std::accumulate(difficulty.begin(), difficulty.end(), 0.0) == 0.0)
        result.warnings.push_back(
            "all ADASYN difficulty scores are zero; falling back to uniform "
            "allocation");
    const auto counts = adasynAllocation(difficulty, gap);

    const auto neighbors =
        nearestNeighbors(ds, minority, minority, config.kNeighbors);
    Rng rng(deriveSeed(config.seed, "adasyn"));
    result.rows.reserve(gap);
    for (std::size_t i = 0; i < minority.size(); ++i)
        for (std::size_t c = 0; c < counts[i]; ++c) {
            const std::size_t nn = neighbors[i][rng.index(neighbors[i].size())];
            result.rows.push_back(interpolate(ds.rows[minority[i]], ds.rows[nn],
                                              rng.uniform()));
        }
    return result;
}

}  // namespace tabaug
