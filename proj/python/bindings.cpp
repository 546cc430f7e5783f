#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "spaceutil/error.hpp"
#include "spaceutil/fusion.hpp"
#include "spaceutil/haar.hpp"
#include "spaceutil/hcluster.hpp"
#include "spaceutil/motion_calib.hpp"
#include "spaceutil/pca.hpp"
#include "spaceutil/pipeline.hpp"
#include "spaceutil/sound_pipeline.hpp"
#include "spaceutil/synthgen.hpp"

namespace py = pybind11;
using namespace spaceutil;

namespace {

synth::Scenario scenario_from_text(const std::string& text) {
    if (text == "month") return synth::Scenario::default_month();
    if (text == "quiet") return synth::Scenario::quiet();
    return synth::Scenario::from_json(nlohmann::json::parse(text));
}

sound::Vec8 vec8(const Eigen::VectorXd& x) {
    if (x.size() != sound::kHaarDim) raise(Errc::InvalidConfig, "expected a length-8 vector");
    return sound::Vec8(x);
}

} // namespace

PYBIND11_MODULE(_spaceutil, m) {
    m.doc() = "Sensor log calibration and utilization analytics core";

    py::register_exception<Error>(m, "SpaceutilError");

    // motion calibration chain
    m.def("likelihood", &motion::likelihood, py::arg("value"), py::arg("lower"),
          py::arg("upper"), "Piecewise-linear membership in [lower, upper].");
    m.def("aggregate_likelihood", &motion::aggregate_likelihood, py::arg("likelihoods"));
    m.def(
        "window_likelihood",
        [](std::optional<double> temperature, std::optional<double> lux) {
            return motion::window_likelihood(temperature, lux, motion::CalibrationConfig{});
        },
        py::arg("temperature"), py::arg("lux"),
        "Mean false-alarm likelihood of one window under the default bounds.");
    m.def(
        "fit_deduction_table",
        [](const std::vector<std::pair<double, double>>& samples, double gain, double inflation) {
            auto table = motion::fit_deduction_table(samples, gain, inflation);
            return std::vector<double>(table.values.begin(), table.values.end());
        },
        py::arg("samples"), py::arg("gain") = 100.0, py::arg("inflation") = 1.5,
        "Decile deduction values fitted from (likelihood, count) samples.");
    m.def(
        "deduction",
        [](const std::vector<double>& values, double p) {
            if (values.size() != motion::kDeductionBins)
                raise(Errc::InvalidConfig, "expected 10 deduction values");
            motion::DeductionTable table;
            std::copy(values.begin(), values.end(), table.values.begin());
            return motion::deduction(table, p);
        },
        py::arg("table"), py::arg("p"));
    m.def("calibrate", &motion::calibrate, py::arg("m"), py::arg("d"));
    m.def("rescale", &motion::rescale, py::arg("m_clamped"), py::arg("d"), py::arg("gain"));
    m.def("normalize_motion", &motion::normalize_motion, py::arg("m"), py::arg("norm_value"));
    m.def("cdf_threshold", &motion::cdf_threshold, py::arg("values"), py::arg("q"));
    m.def("fuse", &fusion::fuse, py::arg("eta_m"), py::arg("eta_n"));

    // sound features and activity scoring
    m.def(
        "haar_features",
        [](const std::vector<int>& bins) {
            if (bins.size() != kNoiseBins) raise(Errc::InvalidConfig, "expected 5 bins");
            Histogram h;
            std::copy(bins.begin(), bins.end(), h.begin());
            return Eigen::VectorXd(sound::haar_features(h));
        },
        py::arg("bins"), "Orthonormal Haar coefficients of a 5-bin histogram.");
    m.def(
        "haar_forward", [](const Eigen::VectorXd& x) { return Eigen::VectorXd(sound::haar_forward(vec8(x))); },
        py::arg("x"));
    m.def(
        "haar_inverse",
        [](const Eigen::VectorXd& c) { return Eigen::VectorXd(sound::haar_inverse(vec8(c))); },
        py::arg("coeffs"));
    m.def(
        "fit_pca",
        [](const Eigen::MatrixXd& X, double alpha, bool literal_alpha) {
            auto model = sound::fit_pca(X, alpha, literal_alpha);
            return py::make_tuple(model.p, model.ratio);
        },
        py::arg("X"), py::arg("alpha") = 0.95, py::arg("literal_alpha") = false,
        "Kept component count and achieved residual ratio.");
    m.def("chi_square_scores", &sound::chi_square_scores, py::arg("features"),
          py::arg("alpha") = 0.95, py::arg("literal_alpha") = false);
    m.def("empirical_beta", &sound::empirical_beta, py::arg("chi2"), py::arg("quantile") = 0.85);

    // clustering
    m.def(
        "cluster_windows",
        [](const Eigen::MatrixXd& X, std::size_t max_k) {
            auto selection = cluster::cluster_select(cluster::CondensedDistances::from_points(X));
            auto pick = cluster::choose_k(X, selection.dendrogram, max_k);
            return py::make_tuple(cluster::linkage_name(selection.linkage), pick.k, pick.labels);
        },
        py::arg("X"), py::arg("max_k") = 10,
        "Linkage chosen by cophenetic correlation, cluster count by variance "
        "ratio; returns (linkage, k, labels).");
    m.def(
        "detect_rain",
        [](const std::vector<std::pair<std::vector<std::int64_t>, Eigen::MatrixXd>>& nodes) {
            std::vector<sound::NodeDayFeatures> features;
            int idx = 0;
            for (const auto& [windows, X] : nodes) {
                sound::NodeDayFeatures f;
                f.node_uid = "n" + std::to_string(idx++);
                f.window_starts = windows;
                f.features = X;
                features.push_back(std::move(f));
            }
            auto result = sound::detect_rain(features, sound::SoundConfig{});
            std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
            for (const auto& iv : result.intervals) intervals.emplace_back(iv.start_ms, iv.end_ms);
            return intervals;
        },
        py::arg("nodes"),
        "Joint rain check over one day: [(window_starts, features), ...] -> "
        "[(start_ms, end_ms), ...].");

    // scenarios and the end-to-end chain
    m.def(
        "preset_scenario",
        [](const std::string& name) { return scenario_from_text(name).to_json().dump(2); },
        py::arg("name"), "Scenario JSON for the 'month' or 'quiet' preset.");
    m.def(
        "generate",
        [](const std::string& scenario, const std::string& out_dir) {
            auto result = synth::generate(scenario_from_text(scenario), out_dir);
            nlohmann::json j;
            j["log_paths"] = result.log_paths;
            j["lines_emitted"] = result.lines_emitted;
            j["malformed_injected"] = result.malformed_injected;
            j["garbage_tokens"] = result.garbage_tokens;
            j["duplicates"] = result.duplicates;
            j["activity_windows"] = result.activity_windows;
            j["false_alarm_windows"] = result.false_alarm_windows;
            return j.dump();
        },
        py::arg("scenario"), py::arg("out_dir"),
        "Write synthetic logs plus truth files; scenario is a preset name or "
        "scenario JSON.  Returns a summary JSON string.");
    m.def(
        "run_e2e",
        [](const std::string& scenario, const std::string& out_dir, const std::string& config) {
            auto cfg = config.empty() ? pipeline::PipelineConfig{}
                                      : pipeline::PipelineConfig::from_json(
                                            nlohmann::json::parse(config));
            return pipeline::run_e2e(scenario_from_text(scenario), cfg, out_dir).dump();
        },
        py::arg("scenario"), py::arg("out_dir"), py::arg("config") = std::string(),
        "Generate, ingest, calibrate, analyze and export one scenario; "
        "returns the run report as a JSON string.");
}
