#include "spaceutil/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "spaceutil/error.hpp"

namespace spaceutil::pipeline {

namespace fs = std::filesystem;

void PipelineConfig::check() const {
    if (utc_offset_minutes < -14 * 60 || utc_offset_minutes > 14 * 60)
        raise(Errc::InvalidConfig, "utc offset outside +/-14h");
    if (!(norm_quantile > 0.0) || norm_quantile > 1.0)
        raise(Errc::InvalidConfig, "norm_quantile outside (0, 1]");
    timeline::selector_matches(selector, CivilDate{2000, 1, 1}, 0);  // grammar check
    sound.check();
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["catalog"] = catalog_path;
    j["calibration"] = calibration_path;
    j["sound"] = sound.to_json();
    j["utc_offset"] = format_utc_offset(utc_offset_minutes);
    j["selector"] = selector;
    j["norm_quantile"] = norm_quantile;
    j["derive_norm_value"] = derive_norm_value;
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    try {
        if (j.contains("catalog")) cfg.catalog_path = j.at("catalog").get<std::string>();
        if (j.contains("calibration"))
            cfg.calibration_path = j.at("calibration").get<std::string>();
        if (j.contains("sound")) cfg.sound = sound::SoundConfig::from_json(j.at("sound"));
        if (j.contains("utc_offset"))
            cfg.utc_offset_minutes = parse_utc_offset(j.at("utc_offset").get<std::string>());
        if (j.contains("selector")) cfg.selector = j.at("selector").get<std::string>();
        if (j.contains("norm_quantile")) cfg.norm_quantile = j.at("norm_quantile").get<double>();
        if (j.contains("derive_norm_value"))
            cfg.derive_norm_value = j.at("derive_norm_value").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad pipeline config: ") + e.what());
    }
    cfg.check();
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open pipeline config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad pipeline config json: ") + e.what());
    }
    return from_json(j);
}

void PipelineConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write pipeline config: " + path);
    out << to_json().dump(2) << "\n";
}

SensorCatalog PipelineConfig::load_catalog() const {
    if (catalog_path.empty()) return SensorCatalog::defaults();
    return SensorCatalog::from_file(catalog_path);
}

motion::CalibrationConfig PipelineConfig::load_calibration() const {
    if (calibration_path.empty()) return motion::CalibrationConfig{};
    return motion::CalibrationConfig::from_file(calibration_path);
}

std::vector<LabeledWindow> read_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open corpus: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "window_start,p_alpha,raw_motion,is_false_alarm")
        raise(Errc::MalformedLine, "corpus header mismatch in " + path);
    std::vector<LabeledWindow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        LabeledWindow row;
        std::array<std::string, 4> cell;
        std::size_t begin = 0;
        int filled = 0;
        for (int c = 0; c < 4; ++c) {
            std::size_t comma = line.find(',', begin);
            if (c < 3 && comma == std::string::npos) break;
            cell[static_cast<std::size_t>(c)] =
                line.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
            begin = comma + 1;
            ++filled;
        }
        if (filled != 4)
            raise(Errc::MalformedLine, "corpus row " + std::to_string(lineno) + " in " + path);
        auto [p0, e0] = std::from_chars(cell[0].data(), cell[0].data() + cell[0].size(),
                                        row.window_start);
        try {
            row.p_alpha = std::stod(cell[1]);
            row.raw_motion = std::stod(cell[2]);
        } catch (const std::exception&) {
            raise(Errc::MalformedLine, "corpus row " + std::to_string(lineno) + " in " + path);
        }
        if (e0 != std::errc{} || p0 != cell[0].data() + cell[0].size() ||
            (cell[3] != "0" && cell[3] != "1"))
            raise(Errc::MalformedLine, "corpus row " + std::to_string(lineno) + " in " + path);
        row.is_false_alarm = cell[3] == "1";
        rows.push_back(row);
    }
    if (rows.empty()) raise(Errc::EmptyInput, "corpus has no rows: " + path);
    return rows;
}

motion::CalibrationConfig fit_calibration(const std::vector<LabeledWindow>& corpus,
                                          const motion::CalibrationConfig& base) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(corpus.size());
    for (const auto& row : corpus) samples.emplace_back(row.p_alpha, row.raw_motion);
    motion::CalibrationConfig cfg = base;
    cfg.table = motion::fit_deduction_table(samples, cfg.gain, cfg.inflation);
    cfg.check();
    return cfg;
}

FrameSet build_frames(const std::vector<std::string>& log_paths,
                      const SensorCatalog& catalog) {
    FrameSet set;
    std::vector<ValidatedReading> readings;
    for (const auto& path : log_paths) {
        std::vector<ValidatedReading> part = ingest::ingest_file(path, catalog, set.stats);
        readings.insert(readings.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
    }
    for (auto& [uid, node_readings] : ingest::split_by_node(readings))
        set.frames.push_back(timeline::align_to_windows(uid, node_readings));
    return set;
}

std::vector<double> pooled_motion(const std::vector<timeline::AlignedFrame>& frames) {
    std::vector<double> values;
    for (const auto& frame : frames)
        for (const auto& row : frame.rows)
            if (row.motion) values.push_back(*row.motion);
    return values;
}

namespace {

// One node's rows regrouped per local day.
std::map<CivilDate, timeline::AlignedFrame> split_days(const timeline::AlignedFrame& frame,
                                                       int utc_offset_minutes) {
    std::map<CivilDate, timeline::AlignedFrame> days;
    for (const auto& row : frame.rows) {
        CivilDate date = local_fields(row.timestamp_ms, utc_offset_minutes).date;
        auto [it, fresh] = days.try_emplace(date);
        if (fresh) it->second.node_uid = frame.node_uid;
        it->second.rows.push_back(row);
    }
    return days;
}

} // namespace

SoundStageResult analyze_sound(const std::vector<timeline::AlignedFrame>& frames,
                               const sound::SoundConfig& cfg, int utc_offset_minutes) {
    cfg.check();
    SoundStageResult result;
    result.nodes.resize(frames.size());

    std::vector<std::map<CivilDate, timeline::AlignedFrame>> per_node_days;
    per_node_days.reserve(frames.size());
    std::set<CivilDate> dates;
    for (const auto& frame : frames) {
        per_node_days.push_back(split_days(frame, utc_offset_minutes));
        for (const auto& [date, day] : per_node_days.back()) dates.insert(date);
    }

    std::vector<double> pooled;
    for (std::size_t ni = 0; ni < frames.size(); ++ni) {
        result.nodes[ni].output.node_uid = frames[ni].node_uid;
        for (const auto& [date, day_frame] : per_node_days[ni]) {
            sound::NodeDayAnalysis day = sound::analyze_node_day(day_frame, date, cfg);
            if (day.degenerate)
                ++result.degenerate_days;
            else
                pooled.insert(pooled.end(), day.chi2.begin(), day.chi2.end());
            result.nodes[ni].days.push_back(std::move(day));
        }
    }

    result.beta = cfg.beta;
    if (cfg.beta_empirical && !pooled.empty())
        result.beta = sound::empirical_beta(pooled, cfg.beta_quantile);

    for (auto& node : result.nodes) {
        node.output.beta = result.beta;
        for (const auto& day : node.days) {
            for (std::size_t i = 0; i < day.window_starts.size(); ++i) {
                exporter::SoundWindowRecord rec;
                rec.window = day.window_starts[i];
                rec.date = day.date;
                rec.chi2 = day.chi2[i];
                rec.eta_n = day.chi2[i] >= result.beta ? 1 : 0;
                rec.cluster = day.labels.empty() ? 0 : day.labels[i];
                rec.period_id = day.period_id.empty() ? 0 : day.period_id[i];
                node.output.windows.push_back(rec);
            }
        }
    }

    if (frames.size() >= 2) {
        for (const auto& date : dates) {
            std::vector<sound::NodeDayFeatures> nodes;
            nodes.reserve(frames.size());
            for (std::size_t ni = 0; ni < frames.size(); ++ni) {
                auto it = per_node_days[ni].find(date);
                if (it != per_node_days[ni].end()) {
                    nodes.push_back(sound::node_day_features(it->second));
                } else {
                    sound::NodeDayFeatures empty;
                    empty.node_uid = frames[ni].node_uid;
                    nodes.push_back(std::move(empty));
                }
            }
            sound::RainDayResult rain = sound::detect_rain(nodes, cfg);
            for (const auto& interval : rain.intervals)
                result.rain.emplace_back(date, interval);
        }
    }
    return result;
}

fusion::UtilizationSeries fuse_node(const motion::MotionSeries& motion_series,
                                    const exporter::SoundOutput& sound_output,
                                    const std::vector<exporter::DatedRainInterval>& rain) {
    std::vector<std::int64_t> windows;
    std::vector<int> eta_n;
    windows.reserve(sound_output.windows.size());
    eta_n.reserve(sound_output.windows.size());
    for (const auto& rec : sound_output.windows) {
        windows.push_back(rec.window);
        eta_n.push_back(rec.eta_n);
    }
    std::vector<sound::RainInterval> intervals;
    intervals.reserve(rain.size());
    for (const auto& [date, interval] : rain) intervals.push_back(interval);
    std::sort(intervals.begin(), intervals.end(),
              [](const sound::RainInterval& a, const sound::RainInterval& b) {
                  return a.start_ms < b.start_ms;
              });
    return fusion::fuse_series(motion_series, windows, eta_n, intervals);
}

nlohmann::json run_e2e(const synth::Scenario& scenario, const PipelineConfig& cfg,
                       const std::string& out_dir) {
    cfg.check();
    SensorCatalog catalog = cfg.load_catalog();
    catalog.check();

    synth::GenerateResult gen = synth::generate(scenario, out_dir);

    FrameSet set = build_frames(gen.log_paths, catalog);
    {
        std::ofstream out(fs::path(out_dir) / "ingest_stats.json");
        if (!out) raise(Errc::IoFailure, "cannot write ingest_stats.json");
        out << ingest::stats_json(set.stats).dump(2) << "\n";
    }

    std::error_code ec;
    for (const char* sub : {"frames", "motion", "sound", "series", "heatmaps"}) {
        fs::create_directories(fs::path(out_dir) / sub, ec);
        if (ec) raise(Errc::IoFailure, std::string("cannot create ") + sub + " directory");
    }

    nlohmann::json report;
    report["frames"] = nlohmann::json::array();
    for (const auto& frame : set.frames) {
        timeline::write_frame_csv(frame,
                                  (fs::path(out_dir) / "frames" / (frame.node_uid + ".csv")).string());
        report["frames"].push_back(timeline::frame_manifest(frame));
    }
    report["ingest"] = ingest::stats_json(set.stats);

    motion::CalibrationConfig calib = cfg.load_calibration();
    bool fitted = cfg.calibration_path.empty();
    if (fitted)
        calib = fit_calibration(read_labeled_csv(gen.false_alarm_truth_path), calib);
    if (cfg.derive_norm_value) {
        std::vector<double> motion_values = pooled_motion(set.frames);
        // An all-quiet run derives a zero threshold; keep the configured
        // scale instead of dividing by it.
        if (!motion_values.empty()) {
            double derived = motion::cdf_threshold(std::move(motion_values), cfg.norm_quantile);
            if (derived > 0.0) calib.norm_value = derived;
        }
    }
    calib.check();
    calib.save((fs::path(out_dir) / "calibration.json").string());
    report["calibration"] = {{"fitted", fitted},
                             {"norm_value", calib.norm_value},
                             {"table", std::vector<double>(calib.table.values.begin(),
                                                           calib.table.values.end())}};

    std::vector<motion::MotionSeries> motion_series;
    for (const auto& frame : set.frames) {
        motion_series.push_back(motion::calibrate_frame(frame, calib));
        exporter::write_motion_json(
            motion_series.back(),
            (fs::path(out_dir) / "motion" / (frame.node_uid + ".json")).string());
    }

    SoundStageResult sound_result = analyze_sound(set.frames, cfg.sound, cfg.utc_offset_minutes);
    for (const auto& node : sound_result.nodes)
        exporter::write_sound_json(
            node.output,
            (fs::path(out_dir) / "sound" / (node.output.node_uid + ".json")).string());
    exporter::write_rain_csv(sound_result.rain, (fs::path(out_dir) / "rain.csv").string());
    report["beta"] = sound_result.beta;
    report["degenerate_days"] = sound_result.degenerate_days;
    report["rain_intervals"] = nlohmann::json::array();
    for (const auto& [date, interval] : sound_result.rain)
        report["rain_intervals"].push_back({{"day", format_date(date)},
                                            {"start", interval.start_ms},
                                            {"end", interval.end_ms}});

    report["nodes"] = nlohmann::json::array();
    report["heatmaps"] = nlohmann::json::array();
    for (std::size_t ni = 0; ni < set.frames.size(); ++ni) {
        fusion::UtilizationSeries series =
            fuse_node(motion_series[ni], sound_result.nodes[ni].output, sound_result.rain);
        const std::string& uid = set.frames[ni].node_uid;
        exporter::write_series_json(series,
                                    (fs::path(out_dir) / "series" / (uid + ".json")).string());

        double eta_sum = 0.0;
        std::int64_t flagged = 0;
        for (const auto& pt : series.points) {
            eta_sum += pt.eta;
            flagged += pt.eta_n;
        }
        report["nodes"].push_back(
            {{"node", uid},
             {"windows", series.points.size()},
             {"mean_eta", series.points.empty() ? 0.0 : eta_sum / static_cast<double>(series.points.size())},
             {"sound_flagged", flagged},
             {"missing_motion", series.missing_motion},
             {"missing_sound", series.missing_sound}});

        for (const char* sel : {"all", "weekday", "weekend"}) {
            nlohmann::json entry = {{"node", uid}, {"selector", sel}};
            try {
                fusion::Heatmap map =
                    fusion::aggregate_heatmap(series, sel, cfg.utc_offset_minutes);
                std::string stem = uid + "_" + sel;
                exporter::write_heatmap_csv(map,
                                            (fs::path(out_dir) / "heatmaps" / (stem + ".csv")).string());
                exporter::write_heatmap_svg(map,
                                            (fs::path(out_dir) / "heatmaps" / (stem + ".svg")).string());
                entry["written"] = true;
            } catch (const Error& e) {
                if (e.code() != Errc::EmptySelection) throw;
                entry["written"] = false;
            }
            report["heatmaps"].push_back(entry);
        }
    }

    {
        std::ofstream out(fs::path(out_dir) / "report.json");
        if (!out) raise(Errc::IoFailure, "cannot write report.json");
        out << report.dump(2) << "\n";
    }
    return report;
}

} // namespace spaceutil::pipeline
