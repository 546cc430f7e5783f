#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spaceutil/error.hpp"
#include "spaceutil/export.hpp"
#include "spaceutil/pipeline.hpp"
#include "spaceutil/synthgen.hpp"

namespace fs = std::filesystem;
using namespace spaceutil;

namespace {

// Offset precedence: explicit flag, then SPACEUTIL_UTC_OFFSET, then the
// pipeline config, then the built-in default.
int resolve_utc_offset(const std::string& flag_value, const pipeline::PipelineConfig& cfg) {
    if (!flag_value.empty()) return parse_utc_offset(flag_value);
    if (const char* env = std::getenv("SPACEUTIL_UTC_OFFSET"); env && *env)
        return parse_utc_offset(env);
    return cfg.utc_offset_minutes;
}

pipeline::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return pipeline::PipelineConfig{};
    return pipeline::PipelineConfig::from_file(path);
}

SensorCatalog resolve_catalog(const std::string& flag_value,
                              const pipeline::PipelineConfig& cfg) {
    if (!flag_value.empty()) return SensorCatalog::from_file(flag_value);
    return cfg.load_catalog();
}

sound::SoundConfig resolve_sound(const std::string& flag_value,
                                 const pipeline::PipelineConfig& cfg) {
    if (!flag_value.empty()) return sound::SoundConfig::from_file(flag_value);
    return cfg.sound;
}

void emit(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

struct SynthArgs {
    std::string scenario_path;
    std::string preset = "month";
    std::string out_dir;
    std::string dump_scenario;
};

int run_synth(const SynthArgs& a) {
    synth::Scenario sc;
    if (!a.scenario_path.empty())
        sc = synth::Scenario::from_file(a.scenario_path);
    else if (a.preset == "month")
        sc = synth::Scenario::default_month();
    else if (a.preset == "quiet")
        sc = synth::Scenario::quiet();
    else
        raise(Errc::InvalidScenario, "unknown preset: " + a.preset);
    if (!a.dump_scenario.empty()) {
        fs::path parent = fs::path(a.dump_scenario).parent_path();
        std::error_code ec;
        if (!parent.empty()) fs::create_directories(parent, ec);
        sc.save(a.dump_scenario);
    }
    synth::GenerateResult result = synth::generate(sc, a.out_dir);
    emit({{"logs", result.log_paths.size()},
          {"lines", result.lines_emitted},
          {"activity_windows", result.activity_windows},
          {"false_alarm_windows", result.false_alarm_windows},
          {"out", a.out_dir}});
    return 0;
}

struct IngestArgs {
    std::vector<std::string> logs;
    std::string config_path;
    std::string catalog_path;
    std::string out_path;
    std::string stats_path;
};

int run_ingest(const IngestArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    SensorCatalog catalog = resolve_catalog(a.catalog_path, cfg);
    ingest::IngestStats stats;
    std::vector<ValidatedReading> readings;
    for (const auto& path : a.logs) {
        std::vector<ValidatedReading> part = ingest::ingest_file(path, catalog, stats);
        readings.insert(readings.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
    }
    if (!a.out_path.empty()) {
        std::ofstream out(a.out_path);
        if (!out) raise(Errc::IoFailure, "cannot write " + a.out_path);
        for (const auto& r : readings) out << to_log_line(r) << "\n";
        if (!out) raise(Errc::IoFailure, "short write: " + a.out_path);
    }
    nlohmann::json summary = ingest::stats_json(stats);
    if (!a.stats_path.empty()) {
        std::ofstream out(a.stats_path);
        if (!out) raise(Errc::IoFailure, "cannot write " + a.stats_path);
        out << summary.dump(2) << "\n";
    }
    emit(summary);
    return 0;
}

struct AlignArgs {
    std::string in_path;
    std::string config_path;
    std::string catalog_path;
    std::string out_dir;
    std::string selector;
    std::string utc_offset;
};

int run_align(const AlignArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    SensorCatalog catalog = resolve_catalog(a.catalog_path, cfg);
    int utc = resolve_utc_offset(a.utc_offset, cfg);
    std::string selector = a.selector.empty() ? cfg.selector : a.selector;

    pipeline::FrameSet set = pipeline::build_frames({a.in_path}, catalog);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) raise(Errc::IoFailure, "cannot create " + a.out_dir);

    nlohmann::json manifest = nlohmann::json::array();
    for (auto& frame : set.frames) {
        timeline::AlignedFrame chosen =
            selector == "all" ? std::move(frame) : timeline::filter_temporal(frame, selector, utc);
        timeline::write_frame_csv(chosen,
                                  (fs::path(a.out_dir) / (chosen.node_uid + ".csv")).string());
        manifest.push_back(timeline::frame_manifest(chosen));
    }
    std::ofstream mout(fs::path(a.out_dir) / "manifest.json");
    if (!mout) raise(Errc::IoFailure, "cannot write manifest.json");
    mout << manifest.dump(2) << "\n";
    emit({{"frames", manifest.size()}, {"out", a.out_dir}});
    return 0;
}

struct FitArgs {
    std::string corpus_path;
    std::string config_path;
    std::string base_calib;
    std::string out_path;
};

int run_fit(const FitArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    motion::CalibrationConfig base =
        a.base_calib.empty() ? cfg.load_calibration()
                             : motion::CalibrationConfig::from_file(a.base_calib);
    std::vector<pipeline::LabeledWindow> corpus = pipeline::read_labeled_csv(a.corpus_path);
    motion::CalibrationConfig fitted = pipeline::fit_calibration(corpus, base);
    fitted.save(a.out_path);
    emit({{"rows", corpus.size()},
          {"table", std::vector<double>(fitted.table.values.begin(), fitted.table.values.end())},
          {"out", a.out_path}});
    return 0;
}

struct CalibrateArgs {
    std::string frame_path;
    std::string calib_path;
    std::string config_path;
    std::string out_path;
};

int run_calibrate(const CalibrateArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    motion::CalibrationConfig calib =
        a.calib_path.empty() ? cfg.load_calibration()
                             : motion::CalibrationConfig::from_file(a.calib_path);
    timeline::AlignedFrame frame = timeline::read_frame_csv(a.frame_path);
    motion::MotionSeries series = motion::calibrate_frame(frame, calib);
    exporter::write_motion_json(series, a.out_path);
    emit({{"node", series.node_uid},
          {"points", series.points.size()},
          {"skipped", series.windows_without_motion},
          {"out", a.out_path}});
    return 0;
}

struct SoundArgs {
    std::vector<std::string> frame_paths;
    std::string config_path;
    std::string sound_config;
    std::string out_dir;
    std::string utc_offset;
};

int run_sound_analyze(const SoundArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    sound::SoundConfig scfg = resolve_sound(a.sound_config, cfg);
    int utc = resolve_utc_offset(a.utc_offset, cfg);

    std::vector<timeline::AlignedFrame> frames;
    for (const auto& path : a.frame_paths) frames.push_back(timeline::read_frame_csv(path));

    pipeline::SoundStageResult result = pipeline::analyze_sound(frames, scfg, utc);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) raise(Errc::IoFailure, "cannot create " + a.out_dir);
    for (const auto& node : result.nodes)
        exporter::write_sound_json(node.output,
                                   (fs::path(a.out_dir) / (node.output.node_uid + ".json")).string());
    exporter::write_rain_csv(result.rain, (fs::path(a.out_dir) / "rain.csv").string());
    emit({{"nodes", result.nodes.size()},
          {"beta", result.beta},
          {"rain_intervals", result.rain.size()},
          {"degenerate_days", result.degenerate_days},
          {"out", a.out_dir}});
    return 0;
}

struct FuseArgs {
    std::string motion_path;
    std::string sound_path;
    std::string rain_path;
    std::string out_path;
};

int run_fuse(const FuseArgs& a) {
    motion::MotionSeries motion_series = exporter::read_motion_json(a.motion_path);
    exporter::SoundOutput sound_output = exporter::read_sound_json(a.sound_path);
    std::vector<exporter::DatedRainInterval> rain;
    if (!a.rain_path.empty()) rain = exporter::read_rain_csv(a.rain_path);
    fusion::UtilizationSeries series = pipeline::fuse_node(motion_series, sound_output, rain);
    exporter::write_series_json(series, a.out_path);
    emit({{"node", series.node_uid},
          {"points", series.points.size()},
          {"missing_motion", series.missing_motion},
          {"missing_sound", series.missing_sound},
          {"out", a.out_path}});
    return 0;
}

struct HeatmapArgs {
    std::string series_path;
    std::string config_path;
    std::string selector;
    std::string format = "csv";
    std::string weather = "any";
    std::string utc_offset;
    std::string out_path;
    bool full_range = false;
};

int run_heatmap(const HeatmapArgs& a) {
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    int utc = resolve_utc_offset(a.utc_offset, cfg);
    std::string selector = a.selector.empty() ? cfg.selector : a.selector;

    fusion::UtilizationSeries series = exporter::read_series_json(a.series_path);
    fusion::Heatmap map = fusion::aggregate_heatmap(
        series, selector, utc, fusion::weather_filter_from_name(a.weather));
    if (a.format == "csv")
        exporter::write_heatmap_csv(map, a.out_path);
    else if (a.format == "svg")
        exporter::write_heatmap_svg(map, a.out_path, a.full_range);
    else if (a.format == "json")
        exporter::write_heatmap_json(map, a.out_path);
    else
        raise(Errc::InvalidConfig, "unknown format: " + a.format);
    emit({{"selector", selector}, {"format", a.format}, {"out", a.out_path}});
    return 0;
}

struct E2eArgs {
    std::string scenario_path;
    std::string config_path;
    std::string out_dir;
};

int run_e2e_cmd(const E2eArgs& a) {
    synth::Scenario sc = a.scenario_path.empty() ? synth::Scenario::default_month()
                                                 : synth::Scenario::from_file(a.scenario_path);
    pipeline::PipelineConfig cfg = load_config(a.config_path);
    if (const char* env = std::getenv("SPACEUTIL_UTC_OFFSET"); env && *env)
        cfg.utc_offset_minutes = parse_utc_offset(env);
    nlohmann::json report = pipeline::run_e2e(sc, cfg, a.out_dir);
    emit({{"out", a.out_dir},
          {"beta", report["beta"]},
          {"rain_intervals", report["rain_intervals"].size()},
          {"nodes", report["nodes"].size()}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensor-node log analytics: calibrated utilization and heatmaps"};
    app.require_subcommand(1);
    int rc = 0;

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic deployment with truth files");
    synth_cmd->add_option("--scenario", synth_args.scenario_path, "scenario JSON");
    synth_cmd->add_option("--preset", synth_args.preset, "month|quiet when no scenario given");
    synth_cmd->add_option("--dump-scenario", synth_args.dump_scenario, "write the scenario used");
    synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth_cmd->callback([&] { rc = run_synth(synth_args); });

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "parse and validate raw node logs");
    ingest_cmd->add_option("logs", ingest_args.logs, "log files")->required();
    ingest_cmd->add_option("--config", ingest_args.config_path, "pipeline config JSON");
    ingest_cmd->add_option("--catalog", ingest_args.catalog_path, "sensor catalog JSON");
    ingest_cmd->add_option("--out", ingest_args.out_path, "write validated readings");
    ingest_cmd->add_option("--stats", ingest_args.stats_path, "write ingest statistics JSON");
    ingest_cmd->callback([&] { rc = run_ingest(ingest_args); });

    AlignArgs align_args;
    auto* align_cmd = app.add_subcommand("align", "fold validated readings onto the window grid");
    align_cmd->add_option("--in", align_args.in_path, "validated log file")->required();
    align_cmd->add_option("--config", align_args.config_path, "pipeline config JSON");
    align_cmd->add_option("--catalog", align_args.catalog_path, "sensor catalog JSON");
    align_cmd->add_option("--select", align_args.selector, "all|weekday|weekend|date|range");
    align_cmd->add_option("--utc-offset", align_args.utc_offset, "offset like +08:00");
    align_cmd->add_option("--out-dir", align_args.out_dir, "frame output directory")->required();
    align_cmd->callback([&] { rc = run_align(align_args); });

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit-deduction", "fit the deduction table from labeled windows");
    fit_cmd->add_option("corpus", fit_args.corpus_path, "labeled CSV")->required();
    fit_cmd->add_option("--config", fit_args.config_path, "pipeline config JSON");
    fit_cmd->add_option("--calib", fit_args.base_calib, "base calibration JSON");
    fit_cmd->add_option("--out", fit_args.out_path, "fitted calibration JSON")->required();
    fit_cmd->callback([&] { rc = run_fit(fit_args); });

    CalibrateArgs calibrate_args;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "run the motion chain over a frame");
    calibrate_cmd->add_option("--frame", calibrate_args.frame_path, "frame CSV")->required();
    calibrate_cmd->add_option("--calib", calibrate_args.calib_path, "calibration JSON");
    calibrate_cmd->add_option("--config", calibrate_args.config_path, "pipeline config JSON");
    calibrate_cmd->add_option("--out", calibrate_args.out_path, "motion series JSON")->required();
    calibrate_cmd->callback([&] { rc = run_calibrate(calibrate_args); });

    SoundArgs sound_args;
    auto* sound_cmd = app.add_subcommand("sound", "sound histogram analytics");
    sound_cmd->require_subcommand(1);
    auto* analyze_cmd = sound_cmd->add_subcommand("analyze", "cluster, score and mark activity");
    analyze_cmd->add_option("--frame", sound_args.frame_paths, "frame CSV (repeatable)")->required();
    analyze_cmd->add_option("--config", sound_args.sound_config, "sound config JSON");
    analyze_cmd->add_option("--pipeline-config", sound_args.config_path, "pipeline config JSON");
    analyze_cmd->add_option("--utc-offset", sound_args.utc_offset, "offset like +08:00");
    analyze_cmd->add_option("--out-dir", sound_args.out_dir, "output directory")->required();
    analyze_cmd->callback([&] { rc = run_sound_analyze(sound_args); });

    FuseArgs fuse_args;
    auto* fuse_cmd = app.add_subcommand("fuse", "combine motion and sound utilization");
    fuse_cmd->add_option("--motion", fuse_args.motion_path, "motion series JSON")->required();
    fuse_cmd->add_option("--sound", fuse_args.sound_path, "sound output JSON")->required();
    fuse_cmd->add_option("--rain", fuse_args.rain_path, "rain interval CSV");
    fuse_cmd->add_option("--out", fuse_args.out_path, "utilization series JSON")->required();
    fuse_cmd->callback([&] { rc = run_fuse(fuse_args); });

    HeatmapArgs heatmap_args;
    auto* heatmap_cmd = app.add_subcommand("heatmap", "day-of-week x hour utilization grid");
    heatmap_cmd->add_option("--series", heatmap_args.series_path, "utilization series JSON")->required();
    heatmap_cmd->add_option("--config", heatmap_args.config_path, "pipeline config JSON");
    heatmap_cmd->add_option("--select", heatmap_args.selector, "all|weekday|weekend|date|range");
    heatmap_cmd->add_option("--format", heatmap_args.format, "csv|svg|json");
    heatmap_cmd->add_option("--weather", heatmap_args.weather, "any|rain|dry");
    heatmap_cmd->add_option("--utc-offset", heatmap_args.utc_offset, "offset like +08:00");
    heatmap_cmd->add_flag("--full-range", heatmap_args.full_range, "color ramp over [0,1] instead of [0,0.5]");
    heatmap_cmd->add_option("--out", heatmap_args.out_path, "output file")->required();
    heatmap_cmd->callback([&] { rc = run_heatmap(heatmap_args); });

    E2eArgs e2e_args;
    auto* e2e_cmd = app.add_subcommand("e2e", "full chain: synth through heatmaps and report");
    e2e_cmd->add_option("--scenario", e2e_args.scenario_path, "scenario JSON");
    e2e_cmd->add_option("--config", e2e_args.config_path, "pipeline config JSON");
    e2e_cmd->add_option("--out", e2e_args.out_dir, "run directory")->required();
    e2e_cmd->callback([&] { rc = run_e2e_cmd(e2e_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        nlohmann::json j{{"error", "cli"}, {"detail", e.what()}};
        std::cerr << j.dump() << "\n" << app.help();
        return 1;
    } catch (const Error& e) {
        nlohmann::json j{{"error", errc_name(e.code())}, {"detail", e.what()}};
        std::cerr << j.dump() << "\n";
        return e.code() == Errc::IoFailure ? 2 : 1;
    } catch (const std::exception& e) {
        nlohmann::json j{{"error", "unexpected"}, {"detail", e.what()}};
        std::cerr << j.dump() << "\n";
        return 1;
    }
    return rc;
}
