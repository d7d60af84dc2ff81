#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

// Shared test utilities.
namespace testutil {

inline std::filesystem::path tempDir() {
    auto dir = std::filesystem::temp_directory_path() / "tabaug_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string writeTempFile(const std::string& name,
                                 const std::string& contents) {
    const auto path = tempDir() / name;
    std::ofstream out(path);
    out << contents;
    return path.string();
}

/// O(N^2) pairwise AUC oracle, ties counted 1/2. Independent of the
/// rank-statistic implementation under test.
inline double pairwiseAuc(const std::vector<double>& scores,
                          const std::vector<int>& labels) {
    double num = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                num += 1.0;
            else if (scores[i] == scores[j])
                num += 0.5;
        }
    }
    return num / static_cast<double>(pairs);
}

}  // namespace testutil
