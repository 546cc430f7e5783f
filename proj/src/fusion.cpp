#include "spaceutil/fusion.hpp"

#include <algorithm>
#include <map>

#include "spaceutil/error.hpp"
#include "spaceutil/timeline.hpp"

namespace spaceutil::fusion {

double fuse(double eta_m, int eta_n) {
    return std::max(eta_m, static_cast<double>(eta_n));
}

UtilizationSeries fuse_series(const motion::MotionSeries& motion_series,
                              const std::vector<std::int64_t>& sound_windows,
                              const std::vector<int>& eta_n,
                              const std::vector<sound::RainInterval>& rain) {
    if (sound_windows.size() != eta_n.size())
        raise(Errc::InvalidConfig, "sound windows and marks differ in length");

    struct Channels {
        std::optional<double> m;
        std::optional<int> n;
    };
    std::map<std::int64_t, Channels> joined;
    for (const auto& pt : motion_series.points) joined[pt.window_start_ms].m = pt.eta;
    for (std::size_t i = 0; i < sound_windows.size(); ++i) {
        int v = eta_n[i];
        if (v != 0 && v != 1) raise(Errc::InvalidConfig, "eta_n marks must be 0 or 1");
        joined[sound_windows[i]].n = v;
    }

    UtilizationSeries series;
    series.node_uid = motion_series.node_uid;
    std::size_t rain_idx = 0;
    for (const auto& [window, ch] : joined) {
        SeriesPoint pt;
        pt.window_start_ms = window;
        pt.eta_m = ch.m.value_or(0.0);
        pt.eta_n = ch.n.value_or(0);
        if (!ch.m) ++series.missing_motion;
        if (!ch.n) ++series.missing_sound;
        pt.eta = fuse(pt.eta_m, pt.eta_n);
        while (rain_idx < rain.size() && rain[rain_idx].end_ms <= window) ++rain_idx;
        bool raining = rain_idx < rain.size() && rain[rain_idx].start_ms <= window &&
                       window < rain[rain_idx].end_ms;
        pt.weather = raining ? "rain" : "dry";
        series.points.push_back(std::move(pt));
    }
    return series;
}

WeatherFilter weather_filter_from_name(const std::string& name) {
    if (name == "any") return WeatherFilter::Any;
    if (name == "rain") return WeatherFilter::Rain;
    if (name == "dry") return WeatherFilter::Dry;
    raise(Errc::InvalidConfig, "weather filter must be any, rain or dry");
}

Heatmap aggregate_heatmap(const UtilizationSeries& series, const std::string& selector,
                          int utc_offset_minutes, WeatherFilter weather) {
    Heatmap map;
    map.selector = selector;
    std::array<std::array<double, 24>, 7> sums{};

    std::int64_t used = 0;
    for (const auto& pt : series.points) {
        if (weather == WeatherFilter::Rain && pt.weather != "rain") continue;
        if (weather == WeatherFilter::Dry && pt.weather == "rain") continue;
        LocalFields lf = local_fields(pt.window_start_ms, utc_offset_minutes);
        if (!timeline::selector_matches(selector, lf.date, lf.dow_mon0)) continue;
        auto d = static_cast<std::size_t>(lf.dow_mon0);
        auto h = static_cast<std::size_t>(lf.hour);
        sums[d][h] += pt.eta;
        ++map.count[d][h];
        ++used;
    }
    if (used == 0)
        raise(Errc::EmptySelection, "no windows match selector '" + selector + "'");

    for (std::size_t d = 0; d < 7; ++d)
        for (std::size_t h = 0; h < 24; ++h)
            if (map.count[d][h] > 0) map.mean[d][h] = sums[d][h] / static_cast<double>(map.count[d][h]);
    return map;
}

} // namespace spaceutil::fusion
