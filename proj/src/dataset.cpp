#include "tabaug/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tabaug/rng.hpp"
#include <json.hpp>

namespace tabaug {

std::size_t TabularDataset::classCount(int label) const {
    std::size_t n = 0;
    for (int y : labels)
        if (y == label) ++n;
    return n;
}

bool TabularDataset::hasMissing() const {
    for (const auto& row : missingMask)
        for (char m : row)
            if (m) return true;
    return false;
}

void TabularDataset::validate() const {
    if (rows.empty()) throw std::invalid_argument("dataset has no rows");
    if (featureNames.empty()) throw std::invalid_argument("dataset has no features");
    if (labels.size() != rows.size())
        throw std::invalid_argument("label count does not match row count");
    for (const auto& row : rows)
        if (row.size() != featureNames.size())
            throw std::invalid_argument("ragged row in dataset");
    for (int y : labels)
        if (y != 0 && y != 1)
            throw std::invalid_argument("labels must be 0 or 1");
    if (!missingMask.empty() && missingMask.size() != rows.size())
        throw std::invalid_argument("missing mask does not match row count");
}

std::vector<std::size_t> FoldSplit::testIndices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::trainIndices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

TabularDataset loadCsv(const std::string& path, const std::string& labelColumn,
                       const std::string& missingToken) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file");
    const auto header = splitCsvLine(line);

    std::ptrdiff_t labelIdx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == labelColumn) labelIdx = static_cast<std::ptrdiff_t>(j);
    if (labelIdx < 0)
        throw std::runtime_error(path + ": label column '" + labelColumn +
                                 "' not found");

    TabularDataset ds;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<std::ptrdiff_t>(j) != labelIdx)
            ds.featureNames.push_back(header[j]);

    std::vector<std::string> rawLabels;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r") continue;
        const auto cells = splitCsvLine(line);
        if (cells.size() != header.size())
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": expected " + std::to_string(header.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        std::vector<char> miss;
        row.reserve(header.size() - 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (static_cast<std::ptrdiff_t>(j) == labelIdx) {
                if (cells[j].empty())
                    throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                             ": missing label");
                rawLabels.push_back(cells[j]);
                continue;
            }
            if (cells[j].empty() || cells[j] == missingToken) {
                row.push_back(0.0);
                miss.push_back(1);
                continue;
            }
            try {
                std::size_t pos = 0;
                double v = std::stod(cells[j], &pos);
                if (pos != cells[j].size()) throw std::invalid_argument("trailing");
                row.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                         ": cannot parse '" + cells[j] +
                                         "' as a number");
            }
            miss.push_back(0);
        }
        ds.rows.push_back(std::move(row));
        ds.missingMask.push_back(std::move(miss));
    }
    if (ds.rows.empty()) throw std::runtime_error(path + ": no data rows");

    std::map<std::string, std::size_t> labelCounts;
    for (const auto& s : rawLabels) ++labelCounts[s];
    if (labelCounts.size() != 2)
        throw std::runtime_error(path + ": label column has " +
                                 std::to_string(labelCounts.size()) +
                                 " distinct values, need exactly 2");

    // Rarer label becomes class 1; ties resolved toward the lexicographically
    // larger value so "1" beats "0" in the balanced case.
    auto it = labelCounts.begin();
    const auto first = *it;
    const auto second = *++it;
    std::string minority =
        (second.second < first.second) ? second.first : (first.second < second.second) ? first.first : second.first;
    for (const auto& s : rawLabels) ds.labels.push_back(s == minority ? 1 : 0);
    ds.labelValues = {minority == first.first ? second.first : first.first, minority};

    bool anyMissing = false;
    for (const auto& m : ds.missingMask)
        for (char c : m) anyMissing |= (c != 0);
    if (!anyMissing) ds.missingMask.clear();

    ds.validate();
    return ds;
}

void writeCsv(const TabularDataset& ds, const std::string& path,
              const std::string& labelColumn) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& name : ds.featureNames) out << name << ',';
    out << labelColumn << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < ds.rowCount(); ++i) {
        for (double v : ds.rows[i]) out << v << ',';
        out << ds.labelValues[static_cast<std::size_t>(ds.labels[i])] << '\n';
    }
}

TabularDataset dropMissing(const TabularDataset& ds,
                           std::size_t maxMissingPerFeature) {
    if (ds.missingMask.empty()) return ds;
    const std::size_t d = ds.featureCount();

    std::vector<std::size_t> missingPerFeature(d, 0);
    for (const auto& row : ds.missingMask)
        for (std::size_t j = 0; j < d; ++j)
            if (row[j]) ++missingPerFeature[j];

    std::vector<std::size_t> keepFeatures;
    for (std::size_t j = 0; j < d; ++j)
        if (missingPerFeature[j] <= maxMissingPerFeature) keepFeatures.push_back(j);

    TabularDataset out;
    out.labelValues = ds.labelValues;
    for (std::size_t j : keepFeatures) out.featureNames.push_back(ds.featureNames[j]);
    if (out.featureNames.empty())
        throw std::runtime_error("no complete rows remain");

    for (std::size_t i = 0; i < ds.rowCount(); ++i) {
        bool anyMissing = false;
        for (std::size_t j : keepFeatures) anyMissing |= (ds.missingMask[i][j] != 0);
        if (anyMissing) continue;
        std::vector<double> row;
        row.reserve(keepFeatures.size());
        for (std::size_t j : keepFeatures) row.push_back(ds.rows[i][j]);
        out.rows.push_back(std::move(row));
        out.labels.push_back(ds.labels[i]);
        if (ds.isSynthetic(i)) {
            out.syntheticRow.resize(out.rows.size(), 0);
            out.syntheticRow.back() = 1;
        }
    }
    if (out.rows.empty()) throw std::runtime_error("no complete rows remain");
    if (!out.syntheticRow.empty()) out.syntheticRow.resize(out.rows.size(), 0);
    out.validate();
    return out;
}

NormalizedDataset normalize(const TabularDataset& ds) {
    if (ds.hasMissing())
        throw std::invalid_argument("normalize requires a dataset without missing values");
    const std::size_t d = ds.featureCount();
    NormalizationParams params;
    params.minValue.assign(d, 0.0);
    params.maxValue.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = ds.rows[0][j], hi = ds.rows[0][j];
        for (const auto& row : ds.rows) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        params.minValue[j] = lo;
        params.maxValue[j] = hi;
    }
    NormalizedDataset out{ds, params};
    for (auto& row : out.dataset.rows)
        for (std::size_t j = 0; j < d; ++j)
            row[j] = params.isConstant(j)
                         ? 0.0
                         : (row[j] - params.minValue[j]) /
                               (params.maxValue[j] - params.minValue[j]);
    return out;
}

std::vector<double> normalizeRow(const std::vector<double>& row,
                                 const NormalizationParams& params) {
    if (row.size() != params.featureCount())
        throw std::invalid_argument("row width does not match the params");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (params.isConstant(j)) {
            out[j] = 0.0;
            continue;
        }
        const double scaled = (row[j] - params.minValue[j]) /
                              (params.maxValue[j] - params.minValue[j]);
        out[j] = std::clamp(scaled, 0.0, 1.0);
    }
    return out;
}

std::vector<double> denormalizeRow(const std::vector<double>& row,
                                   const NormalizationParams& params) {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = params.isConstant(j)
                     ? params.minValue[j]
                     : params.minValue[j] +
                           row[j] * (params.maxValue[j] - params.minValue[j]);
    return out;
}

TabularDataset denormalize(const TabularDataset& ds,
                           const NormalizationParams& params) {
    TabularDataset out = ds;
    for (auto& row : out.rows) row = denormalizeRow(row, params);
    return out;
}

ImbalanceResult induceImbalance(const TabularDataset& ds,
                                double minorityFraction, std::uint64_t seed) {
    if (minorityFraction <= 0.0 || minorityFraction >= 0.5)
        throw std::invalid_argument("minority fraction must be in (0, 0.5)");
    const std::size_t majority = ds.classCount(0);
    const std::size_t minority = ds.classCount(1);

    // Closest achievable integer minority count m for target m/(m+majority);
    // ties resolved toward the smaller count.
    const double ideal =
        minorityFraction * static_cast<double>(majority) / (1.0 - minorityFraction);
    std::size_t target = static_cast<std::size_t>(std::llround(ideal));
    const auto err = [&](std::size_t m) {
        return std::abs(static_cast<double>(m) /
                            static_cast<double>(m + majority) -
                        minorityFraction);
    };
    if (target > 0 && err(target - 1) <= err(target)) --target;
    if (err(target + 1) < err(target)) ++target;

    if (target >= minority)
        return {ds, target > minority};

    std::vector<std::size_t> minorityIdx;
    for (std::size_t i = 0; i < ds.rowCount(); ++i)
        if (ds.labels[i] == 1) minorityIdx.push_back(i);
    Rng rng(seed);
    rng.shuffle(minorityIdx);
    minorityIdx.resize(target);
    std::vector<char> keep(ds.rowCount(), 0);
    for (std::size_t i = 0; i < ds.rowCount(); ++i)
        if (ds.labels[i] == 0) keep[i] = 1;
    for (std::size_t i : minorityIdx) keep[i] = 1;

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < ds.rowCount(); ++i)
        if (keep[i]) kept.push_back(i);
    return {selectRows(ds, kept), false};
}

FoldSplit kfoldSplit(const TabularDataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("fold count must be >= 2");
    for (int label : {0, 1})
        if (ds.classCount(label) < static_cast<std::size_t>(k))
            throw std::invalid_argument(
                "class " + std::to_string(label) + " has fewer than " +
                std::to_string(k) + " members");

    FoldSplit split;
    split.k = k;
    split.assignments.assign(ds.rowCount(), 0);
    Rng rng(seed);
    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.rowCount(); ++i)
            if (ds.labels[i] == label) idx.push_back(i);
        rng.shuffle(idx);
        for (std::size_t p = 0; p < idx.size(); ++p)
            split.assignments[idx[p]] = static_cast<int>(p % k);
    }
    return split;
}

TabularDataset synthImbalanced(std::size_t nMajor, std::size_t nMinor,
                               std::size_t d, double separation,
                               std::uint64_t seed) {
    if (nMajor < 1 || nMinor < 1 || d < 1)
        throw std::invalid_argument("counts must be >= 1");
    TabularDataset ds;
    for (std::size_t j = 0; j < d; ++j)
        ds.featureNames.push_back("f" + std::to_string(j));
    Rng rng(seed);
    const double shift = separation / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < nMajor + nMinor; ++i) {
        const int label = i < nMajor ? 0 : 1;
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j)
            row[j] = rng.normal() + (label ? shift : 0.0);
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(label);
    }
    ds.validate();
    return ds;
}

TabularDataset selectRows(const TabularDataset& ds,
                          const std::vector<std::size_t>& indices) {
    TabularDataset out;
    out.featureNames = ds.featureNames;
    out.labelValues = ds.labelValues;
    for (std::size_t i : indices) {
        out.rows.push_back(ds.rows[i]);
        out.labels.push_back(ds.labels[i]);
        if (!ds.missingMask.empty()) out.missingMask.push_back(ds.missingMask[i]);
        if (!ds.syntheticRow.empty()) out.syntheticRow.push_back(ds.syntheticRow[i]);
    }
    return out;
}

void appendRows(TabularDataset& ds, const std::vector<std::vector<double>>& rows,
                int label, bool synthetic) {
    if (rows.empty()) return;
    if (ds.syntheticRow.empty() && synthetic)
        ds.syntheticRow.assign(ds.rowCount(), 0);
    for (const auto& row : rows) {
        if (row.size() != ds.featureCount())
            throw std::invalid_argument("appended row has wrong width");
        ds.rows.push_back(row);
        ds.labels.push_back(label);
        if (!ds.missingMask.empty())
            ds.missingMask.emplace_back(ds.featureCount(), 0);
        if (!ds.syntheticRow.empty()) ds.syntheticRow.push_back(synthetic ? 1 : 0);
    }
}

std::uint64_t datasetContentHash(const TabularDataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mixDouble = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h = fnv1a(&bits, sizeof bits, h);
    };
    for (const auto& name : ds.featureNames) h = fnv1a(name, h);
    for (std::size_t i = 0; i < ds.rowCount(); ++i) {
        for (double v : ds.rows[i]) mixDouble(v);
        h = fnv1a(&ds.labels[i], sizeof(int), h);
    }
    return h;
}

std::string datasetManifestJson(const TabularDataset& ds,
                                const NormalizationParams* params) {
    nlohmann::json j;
    j["n"] = ds.rowCount();
    j["d"] = ds.featureCount();
    j["class_counts"] = {ds.classCount(0), ds.classCount(1)};
    j["label_values"] = {ds.labelValues[0], ds.labelValues[1]};
    if (params) {
        j["normalization"]["min"] = params->minValue;
        j["normalization"]["max"] = params->maxValue;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(datasetContentHash(ds)));
    j["content_hash"] = buf;
    return j.dump(2);
}

}  // namespace tabaug
