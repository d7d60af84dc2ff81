#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tabaug/dataset.hpp"

namespace tabaug {

struct OversampleConfig {
    std::size_t kNeighbors = 5;
    std::uint64_t seed = 0;
};

struct OversampleResult {
    /// Synthetic class-1 rows; count is exactly the majority/minority gap.
    std::vector<std::vector<double>> rows;
    std::vector<std::string> warnings;
};

/// Classic SMOTE: each synthetic row interpolates a random minority row
/// toward one of its k minority nearest neighbors with lambda ~ U[0,1].
/// Requires a complete dataset with minority count > kNeighbors >= 1.
OversampleResult smote(const TabularDataset& ds, const OversampleConfig& config);

/// ADASYN: like SMOTE, but the per-point synthetic budget is proportional to
/// classification difficulty (fraction of majority points among the k nearest
/// neighbors in the full dataset), rounded by largest remainder. If every
/// difficulty is zero the allocation falls back to uniform with a warning.
OversampleResult adasyn(const TabularDataset& ds, const OversampleConfig& config);

/// Difficulty scores r_i in [0,1] for each minority row, in minority order.
std::vector<double> adasynDifficulty(const TabularDataset& ds,
                                     std::size_t kNeighbors);

/// Largest-remainder allocation of `gap` samples proportional to the scores;
/// all-zero scores allocate uniformly. Remainder ties go to the lower index.
std::vector<std::size_t> adasynAllocation(const std::vector<double>& difficulty,
                                          std::size_t gap);

}  // namespace tabaug
