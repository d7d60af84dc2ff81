#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tabaug {

/// Per-feature min/max recorded at normalization time so rows can be mapped
/// back to their original scale exactly.
struct NormalizationParams {
    std::vector<double> minValue;
    std::vector<double> maxValue;

    std::size_t featureCount() const { return minValue.size(); }
    bool isConstant(std::size_t j) const { return minValue[j] == maxValue[j]; }
};

/// Numeric rows with binary labels. The minority class is always label 1;
/// loadCsv relabels automatically and records the original label strings in
/// labelValues. syntheticRow is empty for purely real datasets.
struct TabularDataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::string> featureNames;
    std::vector<std::vector<char>> missingMask;  // empty => no missing cells
    std::vector<char> syntheticRow;              // empty => all rows real
    std::array<std::string, 2> labelValues{"0", "1"};

    std::size_t rowCount() const { return rows.size(); }
    std::size_t featureCount() const { return featureNames.size(); }
    std::size_t classCount(int label) const;
    bool hasMissing() const;
    bool isSynthetic(std::size_t i) const {
        return !syntheticRow.empty() && syntheticRow[i] != 0;
    }
    /// Throws if the invariants (rectangular rows, binary labels, N>=1, d>=1)
    /// do not hold.
    void validate() const;
};

struct FoldSplit {
    int k = 0;
    std::vector<int> assignments;

    std::vector<std::size_t> testIndices(int fold) const;
    std::vector<std::size_t> trainIndices(int fold) const;
};

struct NormalizedDataset {
    TabularDataset dataset;
    NormalizationParams params;
};

struct ImbalanceResult {
    TabularDataset dataset;
    /// Set when the minority class was already at or below the requested
    /// fraction and the call was a no-op.
    bool alreadyBelowTarget = false;
};

/// Reads a headered CSV. Cells equal to missingToken (or empty) set the
/// missing mask. The label column must hold exactly two distinct values; the
/// rarer one becomes class 1.
TabularDataset loadCsv(const std::string& path, const std::string& labelColumn,
                       const std::string& missingToken = "");

void writeCsv(const TabularDataset& ds, const std::string& path,
              const std::string& labelColumn = "label");

/// Drops features whose missing count exceeds the threshold, then every row
/// that still has a missing cell. Throws if nothing survives.
TabularDataset dropMissing(const TabularDataset& ds,
                           std::size_t maxMissingPerFeature);

/// Min-max scaling to [0,1]; constant features map to 0 and stay flagged in
/// the returned params.
NormalizedDataset normalize(const TabularDataset& ds);

/// Applies fitted min-max params to one row, clamping into [0,1] so rows
/// outside the fitted range (e.g. held-out data) stay valid pixel values.
std::vector<double> normalizeRow(const std::vector<double>& row,
                                 const NormalizationParams& params);

std::vector<double> denormalizeRow(const std::vector<double>& row,
                                   const NormalizationParams& params);
TabularDataset denormalize(const TabularDataset& ds,
                           const NormalizationParams& params);

/// Removes class-1 rows uniformly at random until the minority share is as
/// close as achievable to minorityFraction. Class-0 rows are never touched.
ImbalanceResult induceImbalance(const TabularDataset& ds,
                                double minorityFraction, std::uint64_t seed);

/// Stratified k-fold assignment; every fold's class ratio is within one
/// sample of the global ratio.
FoldSplit kfoldSplit(const TabularDataset& ds, int k, std::uint64_t seed);

/// Two Gaussian clusters with unit variance whose means are `separation`
/// apart; cluster 0 is the majority.
TabularDataset synthImbalanced(std::size_t nMajor, std::size_t nMinor,
                               std::size_t d, double separation,
                               std::uint64_t seed);

TabularDataset selectRows(const TabularDataset& ds,
                          const std::vector<std::size_t>& indices);

/// Appends rows with the given label; `synthetic` tags them as generated.
void appendRows(TabularDataset& ds, const std::vector<std::vector<double>>& rows,
                int label, bool synthetic);

std::uint64_t datasetContentHash(const TabularDataset& ds);

/// JSON manifest string: N, d, class counts, normalization params (optional),
/// content hash.
std::string datasetManifestJson(const TabularDataset& ds,
                                const NormalizationParams* params);

}  // namespace tabaug
