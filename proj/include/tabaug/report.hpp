#pragma once

#include <string>
#include <vector>

#include "tabaug/pipeline.hpp"

namespace tabaug {

/// Appends one "method,dataset,folds,mean_auc,std_auc" row; writes the
/// header first when the file does not exist yet.
void appendResultsCsv(const std::string& path,
                      const ExperimentManifest& manifest);

/// Plain-text method x dataset table with "mean ± std" cells at four
/// decimals. Manifests must carry evaluation results; two manifests naming
/// the same dataset with different content hashes are incompatible and
/// throw.
std::string reportTable(const std::vector<ExperimentManifest>& manifests);

/// ROC polyline as a standalone SVG document, diagonal reference included.
std::string rocSvg(const std::vector<double>& scores,
                   const std::vector<int>& labels);

/// Loads every manifest, then writes report.txt, results.csv, per-fold ROC
/// SVGs and copies of any image-grid artifacts into outDir. Returns the
/// written file names.
std::vector<std::string> writeReport(
    const std::vector<std::string>& manifestPaths, const std::string& outDir);

}  // namespace tabaug
