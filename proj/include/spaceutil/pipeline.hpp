#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spaceutil/export.hpp"
#include "spaceutil/fusion.hpp"
#include "spaceutil/ingest.hpp"
#include "spaceutil/motion_calib.hpp"
#include "spaceutil/sound_pipeline.hpp"
#include "spaceutil/synthgen.hpp"
#include "spaceutil/timeline.hpp"

namespace spaceutil::pipeline {

// Run-wide settings shared by the CLI stages.  The catalog and calibration
// live in their own files so a fitted table can be reused across runs; the
// sound settings ride along inline.
struct PipelineConfig {
    std::string catalog_path;      // empty = built-in defaults
    std::string calibration_path;  // empty = fit from the run's labeled corpus
    sound::SoundConfig sound;
    int utc_offset_minutes = kDefaultUtcOffsetMinutes;
    std::string selector = "all";
    double norm_quantile = 0.85;
    // Replace the configured norm value with the pooled raw-motion quantile
    // of the run, the same way the deployment picked its value.
    bool derive_norm_value = true;

    void check() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::string& path);
    void save(const std::string& path) const;

    SensorCatalog load_catalog() const;
    motion::CalibrationConfig load_calibration() const;
};

// One row of the labeled false-alarm corpus
// (CSV: window_start,p_alpha,raw_motion,is_false_alarm).
struct LabeledWindow {
    std::int64_t window_start = 0;
    double p_alpha = 0.0;
    double raw_motion = 0.0;
    bool is_false_alarm = false;
};

std::vector<LabeledWindow> read_labeled_csv(const std::string& path);

// Fits the deduction table from the corpus: every event-free window
// contributes (likelihood, motion count), so the per-bin mean estimates the
// expected false alarms at that likelihood.
motion::CalibrationConfig fit_calibration(const std::vector<LabeledWindow>& corpus,
                                          const motion::CalibrationConfig& base);

// Ingests any number of log files and folds each node onto the window grid.
struct FrameSet {
    std::vector<timeline::AlignedFrame> frames;  // sorted by node uid
    ingest::IngestStats stats;
};

FrameSet build_frames(const std::vector<std::string>& log_paths,
                      const SensorCatalog& catalog);

// Every motion value in a frame set, pooled (for quantile derivation).
std::vector<double> pooled_motion(const std::vector<timeline::AlignedFrame>& frames);

// Sound analytics over a frame set: per node per local day the clustering
// chain runs, then one beta (configured or pooled-empirical) marks activity
// everywhere, and days with at least two reporting nodes get the joint rain
// check.
struct NodeSoundAnalysis {
    exporter::SoundOutput output;
    std::vector<sound::NodeDayAnalysis> days;
};

struct SoundStageResult {
    std::vector<NodeSoundAnalysis> nodes;  // frame order
    std::vector<exporter::DatedRainInterval> rain;
    double beta = 0.0;
    std::size_t degenerate_days = 0;
};

SoundStageResult analyze_sound(const std::vector<timeline::AlignedFrame>& frames,
                               const sound::SoundConfig& cfg, int utc_offset_minutes);

// Motion and sound channels joined per node.
fusion::UtilizationSeries fuse_node(const motion::MotionSeries& motion_series,
                                    const exporter::SoundOutput& sound_output,
                                    const std::vector<exporter::DatedRainInterval>& rain);

// Full chain on a generated scenario: synth, ingest, align, fit, calibrate,
// sound, fuse, heatmaps, report.json.  Returns the report.  All artifacts
// land under out_dir; a second run with the same inputs writes byte-identical
// files.
nlohmann::json run_e2e(const synth::Scenario& scenario, const PipelineConfig& cfg,
                       const std::string& out_dir);

} // namespace spaceutil::pipeline
