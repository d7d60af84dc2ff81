#include "tabaug/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tabaug {

namespace {

std::string formatCell(double mean, double std) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f \xc2\xb1 %.4f", mean, std);
    return buffer;
}

/// Column width in glyphs; the only multi-byte character in play is the
/// two-byte "±", whose lead byte 0xc2 marks one glyph.
std::size_t displayWidth(const std::string& text) {
    std::size_t continuations = 0;
    for (const char c : text)
        if (static_cast<unsigned char>(c) == 0xc2) ++continuations;
    return text.size() - continuations;
}

void appendPadded(std::string& line, const std::string& cell,
                  std::size_t width) {
    line += cell;
    line.append(width - displayWidth(cell) + 2, ' ');
}

/// ROC points from (0,0) to (1,1): thresholds sweep distinct scores from
/// high to low, tied scores advancing as one group.
std::vector<std::pair<double, double>> rocPoints(
    const std::vector<double>& scores, const std::vector<int>& labels) {
    std::size_t positives = 0;
    for (const int label : labels)
        positives += static_cast<std::size_t>(label == 1);
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("ROC needs both classes present");

    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1)
                ++tp;
            else
                ++fp;
            ++j;
        }
        points.emplace_back(static_cast<double>(fp) / negatives,
                            static_cast<double>(tp) / positives);
        i = j;
    }
    return points;
}

std::string sanitizedToken(const std::string& text) {
    std::string token;
    for (const char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            token += static_cast<char>(
                std::tolower(static_cast<unsigned char>(c)));
        else if (!token.empty() && token.back() != '_')
            token += '_';
    }
    while (!token.empty() && token.back() == '_') token.pop_back();
    return token;
}

}  // namespace

void appendResultsCsv(const std::string& path,
                      const ExperimentManifest& manifest) {
    if (manifest.eval.foldAucs.empty())
        throw std::invalid_argument(
            "manifest carries no evaluation results to record");
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (fresh) out << "method,dataset,folds,mean_auc,std_auc\n";
    char numbers[64];
    std::snprintf(numbers, sizeof(numbers), "%.6f,%.6f",
                  manifest.eval.meanAuc, manifest.eval.stdAuc);
    out << '"' << manifest.eval.method << '"' << ',' << '"'
        << manifest.datasetName << '"' << ','
        << manifest.eval.foldAucs.size() << ',' << numbers << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string reportTable(const std::vector<ExperimentManifest>& manifests) {
    if (manifests.empty())
        throw std::invalid_argument("report needs at least one manifest");

    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::map<std::string, std::uint64_t> datasetHashes;
    std::map<std::pair<std::string, std::string>, std::string> cells;
    for (const ExperimentManifest& m : manifests) {
        if (m.eval.foldAucs.empty())
            throw std::invalid_argument("manifest for command " + m.command +
                                        " carries no evaluation results");
        const auto known = datasetHashes.find(m.datasetName);
        if (known == datasetHashes.end())
            datasetHashes.emplace(m.datasetName, m.datasetHash);
        else if (known->second != m.datasetHash)
            throw std::invalid_argument(
                "manifests disagree on the contents of dataset " +
                m.datasetName);
        if (std::find(methods.begin(), methods.end(), m.eval.method) ==
            methods.end())
            methods.push_back(m.eval.method);
        if (std::find(datasets.begin(), datasets.end(), m.datasetName) ==
            datasets.end())
            datasets.push_back(m.datasetName);
        cells[{m.eval.method, m.datasetName}] =
            formatCell(m.eval.meanAuc, m.eval.stdAuc);
    }

    std::vector<std::size_t> widths;
    widths.push_back(displayWidth("method"));
    for (const std::string& method : methods)
        widths[0] = std::max(widths[0], displayWidth(method));
    for (const std::string& dataset : datasets) {
        std::size_t width = displayWidth(dataset);
        for (const std::string& method : methods) {
            const auto cell = cells.find({method, dataset});
            if (cell != cells.end())
                width = std::max(width, displayWidth(cell->second));
        }
        widths.push_back(width);
    }

    std::string table;
    std::string header;
    appendPadded(header, "method", widths[0]);
    for (std::size_t d = 0; d < datasets.size(); ++d)
        appendPadded(header, datasets[d], widths[d + 1]);
    while (!header.empty() && header.back() == ' ') header.pop_back();
    table += header + "\n";
    for (const std::string& method : methods) {
        std::string line;
        appendPadded(line, method, widths[0]);
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            const auto cell = cells.find({method, datasets[d]});
            appendPadded(line, cell == cells.end() ? "-" : cell->second,
                         widths[d + 1]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        table += line + "\n";
    }
    return table;
}

std::string rocSvg(const std::vector<double>& scores,
                   const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels differ in size");
    const std::vector<std::pair<double, double>> points =
        rocPoints(scores, labels);
    const double aucValue = auc(scores, labels);

    const double size = 320.0;
    const double margin = 40.0;
    const double span = size - 2.0 * margin;
    const auto x = [&](double fpr) { return margin + fpr * span; };
    const auto y = [&](double tpr) { return size - margin - tpr * span; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" "
           "height=\"320\" viewBox=\"0 0 320 320\">\n";
    svg << "  <rect width=\"320\" height=\"320\" fill=\"white\"/>\n";
    svg << "  <line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\""
        << x(1) << "\" y2=\"" << y(0)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "  <line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\""
        << x(0) << "\" y2=\"" << y(1)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "  <line x1=\"" << x(0) << "\" y1=\"" << y(0) << "\" x2=\""
        << x(1) << "\" y2=\"" << y(1)
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    svg << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" "
           "points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) svg << ' ';
        svg << x(points[i].first) << ',' << y(points[i].second);
    }
    svg << "\"/>\n";
    char caption[64];
    std::snprintf(caption, sizeof(caption), "AUC = %.4f", aucValue);
    svg << "  <text x=\"" << x(0.55) << "\" y=\"" << y(0.08)
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << caption
        << "</text>\n";
    svg << "  <text x=\"" << x(0.38) << "\" y=\"" << (size - 12)
        << "\" font-family=\"sans-serif\" font-size=\"12\">FPR</text>\n";
    svg << "  <text x=\"12\" y=\"" << y(0.45)
        << "\" font-family=\"sans-serif\" font-size=\"12\">TPR</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> writeReport(
    const std::vector<std::string>& manifestPaths, const std::string& outDir) {
    if (manifestPaths.empty())
        throw std::invalid_argument("report needs at least one manifest");
    std::filesystem::create_directories(outDir);
    const std::filesystem::path dir(outDir);

    std::vector<ExperimentManifest> manifests;
    std::vector<std::filesystem::path> runDirs;
    for (const std::string& path : manifestPaths) {
        manifests.push_back(loadManifest(path));
        runDirs.push_back(std::filesystem::path(path).parent_path());
    }

    std::vector<std::string> written;
    {
        const std::string table = reportTable(manifests);
        std::ofstream out(dir / "report.txt", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report.txt");
        out << table;
        written.push_back("report.txt");
    }

    const std::filesystem::path resultsPath = dir / "results.csv";
    std::filesystem::remove(resultsPath);
    for (const ExperimentManifest& m : manifests)
        appendResultsCsv(resultsPath.string(), m);
    written.push_back("results.csv");

    for (const ExperimentManifest& m : manifests) {
        const std::string base = sanitizedToken(m.eval.method) + "_" +
                                 sanitizedToken(m.datasetName);
        for (const FoldRecord& fold : m.folds) {
            const std::string name =
                "roc_" + base + "_fold" + std::to_string(fold.fold) + ".svg";
            std::ofstream out(dir / name, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + name);
            out << rocSvg(fold.testScores, fold.testLabels);
            written.push_back(name);
        }
    }

    // Image grids were rendered when the run still had pixel data; carry
    // them into the report directory.
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        for (const std::string& artifact : manifests[i].artifacts) {
            if (artifact.find(".pgm") == std::string::npos ||
                artifact.find("synthetic") == std::string::npos)
                continue;
            const std::filesystem::path source = runDirs[i] / artifact;
            if (!std::filesystem::exists(source)) continue;
            const std::string name =
                sanitizedToken(manifests[i].eval.method) + "_" +
                std::filesystem::path(artifact).filename().string();
            std::filesystem::copy_file(
                source, dir / name,
                std::filesystem::copy_options::overwrite_existing);
            written.push_back(name);
        }
    }
    return written;
}

}  // namespace tabaug
