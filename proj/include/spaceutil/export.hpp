#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spaceutil/fusion.hpp"
#include "spaceutil/motion_calib.hpp"
#include "spaceutil/sound_pipeline.hpp"

namespace spaceutil::exporter {

// All writers emit fixed 6-decimal numbers so identical inputs give
// byte-identical files.
std::string fixed6(double v);

void write_motion_json(const motion::MotionSeries& series, const std::string& path);
motion::MotionSeries read_motion_json(const std::string& path);

struct SoundWindowRecord {
    std::int64_t window = 0;
    CivilDate date{};
    double chi2 = 0.0;
    int eta_n = 0;
    int cluster = 0;
    int period_id = 0;
};

struct SoundOutput {
    std::string node_uid;
    double beta = 0.0;
    std::vector<SoundWindowRecord> windows;
};

void write_sound_json(const SoundOutput& out, const std::string& path);
SoundOutput read_sound_json(const std::string& path);

void write_series_json(const fusion::UtilizationSeries& series, const std::string& path);
fusion::UtilizationSeries read_series_json(const std::string& path);

void write_heatmap_csv(const fusion::Heatmap& map, const std::string& path);
void write_heatmap_json(const fusion::Heatmap& map, const std::string& path);

// Blue-to-red ramp saturating at 0.5 unless full_range; missing cells grey.
std::string ramp_color(double eta, bool full_range = false);
void write_heatmap_svg(const fusion::Heatmap& map, const std::string& path,
                       bool full_range = false);

using DatedRainInterval = std::pair<CivilDate, sound::RainInterval>;
void write_rain_csv(const std::vector<DatedRainInterval>& intervals, const std::string& path);
std::vector<DatedRainInterval> read_rain_csv(const std::string& path);

} // namespace spaceutil::exporter
