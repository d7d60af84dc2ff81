#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tabaug/pipeline.hpp"
#include "tabaug/report.hpp"
#include "tabaug/rng.hpp"

namespace py = pybind11;
using namespace tabaug;

namespace {

std::vector<ExperimentManifest> manifestsFromTexts(
    const std::vector<std::string>& texts) {
    std::vector<ExperimentManifest> manifests;
    manifests.reserve(texts.size());
    for (const std::string& text : texts)
        manifests.push_back(manifestFromJson(text));
    return manifests;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Invertible image transforms, generative augmentation and dual "
        "classifiers for imbalanced tabular data";

    py::class_<ExperimentConfig>(m, "Config")
        .def(py::init<>())
        .def("set", &setConfigValue, py::arg("key"), py::arg("value"),
             "Set one schema key, with the same validation the config file "
             "parser applies")
        .def("explain", &explainConfig,
             "Render every effective setting as key = value lines")
        .def_readwrite("dataset", &ExperimentConfig::datasetPath)
        .def_readwrite("dataset_name", &ExperimentConfig::datasetName)
        .def_readwrite("label_column", &ExperimentConfig::labelColumn)
        .def_readwrite("folds", &ExperimentConfig::folds)
        .def_readwrite("out", &ExperimentConfig::outDir);

    m.def(
        "parse_config",
        [](const std::string& text) { return parseExperimentConfig(text); },
        py::arg("text"), "Parse key = value config text into a Config");
    m.def(
        "load_config",
        [](const std::string& path) { return loadExperimentConfig(path); },
        py::arg("path"));

    m.def(
        "run_transform",
        [](const ExperimentConfig& config) {
            return manifestToJson(runTransform(config));
        },
        py::arg("config"), "Fit the pixel mapping and dump images; returns "
        "the manifest as JSON");
    m.def(
        "run_augment",
        [](const ExperimentConfig& config) {
            return manifestToJson(runAugment(config));
        },
        py::arg("config"));
    m.def(
        "run_classify",
        [](const ExperimentConfig& config) {
            return manifestToJson(runClassify(config));
        },
        py::arg("config"));
    m.def(
        "run_bnlearn",
        [](const ExperimentConfig& config) {
            return manifestToJson(runBnlearn(config));
        },
        py::arg("config"));
    m.def(
        "run_pipeline",
        [](const ExperimentConfig& config) {
            return manifestToJson(runPipeline(config));
        },
        py::arg("config"));

    m.def(
        "manifest_content_hash",
        [](const std::string& manifestJson) {
            return manifestContentHash(manifestFromJson(manifestJson));
        },
        py::arg("manifest_json"),
        "Stable content hash of a manifest; timings are ignored");
    m.def(
        "report_table",
        [](const std::vector<std::string>& manifestJsons) {
            return reportTable(manifestsFromTexts(manifestJsons));
        },
        py::arg("manifest_jsons"),
        "Method x dataset table of mean \xc2\xb1 std AUC cells");
    m.def("write_report", &writeReport, py::arg("manifest_paths"),
          py::arg("out_dir"),
          "Write report.txt, results.csv and ROC SVGs; returns file names");

    m.def("auc", &auc, py::arg("scores"), py::arg("labels"),
          "Rank-statistic ROC AUC with tie handling");
    m.def("roc_svg", &rocSvg, py::arg("scores"), py::arg("labels"));
    m.def("derive_seed", &deriveSeed, py::arg("master"), py::arg("tag"),
          "Scoped sub-seed derivation used throughout the pipeline");
    m.def(
        "write_synth_csv",
        [](const std::string& path, std::size_t nMajor, std::size_t nMinor,
           std::size_t d, double separation, std::uint64_t seed) {
            writeCsv(synthImbalanced(nMajor, nMinor, d, separation, seed),
                     path, "label");
        },
        py::arg("path"), py::arg("n_major"), py::arg("n_minor"), py::arg("d"),
        py::arg("separation"), py::arg("seed"),
        "Write a two-cluster imbalanced dataset as CSV for experiments");
}
