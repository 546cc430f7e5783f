#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spaceutil/motion_calib.hpp"
#include "spaceutil/sound_pipeline.hpp"

namespace spaceutil::fusion {

struct SeriesPoint {
    std::int64_t window_start_ms = 0;
    double eta_m = 0.0;
    int eta_n = 0;
    double eta = 0.0;
    std::string weather;  // empty, "rain" or "dry"
};

struct UtilizationSeries {
    std::string node_uid;
    std::vector<SeriesPoint> points;  // sorted by window start
    std::int64_t missing_motion = 0;  // windows where only the other channel reported
    std::int64_t missing_sound = 0;
};

// Eta is whichever channel saw more use.
double fuse(double eta_m, int eta_n);

// Joins the motion and sound channels on window starts.  A window missing
// one channel keeps the other and counts the gap; missing channels
// contribute zero.  Rain intervals stamp the weather tag.
UtilizationSeries fuse_series(const motion::MotionSeries& motion_series,
                              const std::vector<std::int64_t>& sound_windows,
                              const std::vector<int>& eta_n,
                              const std::vector<sound::RainInterval>& rain);

enum class WeatherFilter { Any, Rain, Dry };
WeatherFilter weather_filter_from_name(const std::string& name);

struct Heatmap {
    std::array<std::array<double, 24>, 7> mean{};        // row 0 = Monday
    std::array<std::array<std::int64_t, 24>, 7> count{};
    std::string selector;

    bool present(int dow, int hour) const { return count[static_cast<std::size_t>(dow)][static_cast<std::size_t>(hour)] > 0; }
};

// Buckets the series into local (day-of-week, hour) cells and averages eta.
// Throws EmptySelection when the selector and weather filter leave nothing.
Heatmap aggregate_heatmap(const UtilizationSeries& series, const std::string& selector,
                          int utc_offset_minutes, WeatherFilter weather = WeatherFilter::Any);

} // namespace spaceutil::fusion
