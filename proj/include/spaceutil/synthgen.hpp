#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spaceutil/local_time.hpp"
#include "spaceutil/reading.hpp"

namespace spaceutil::synth {

// Site-wide diurnal climate.  Curves are driven by a solar elevation factor
// (zero at night, one at the 13:00 peak) plus per-day jitter and white noise.
struct WeatherModel {
    double temp_base = 26.5;
    double temp_day_gain = 8.5;
    double temp_day_jitter = 1.2;
    double temp_noise = 0.35;
    double lux_day_peak = 31000.0;
    double lux_day_jitter = 0.15;
    double lux_noise_frac = 0.06;
    double lux_night = 1.0;
    double humidity_base = 88.0;
    double humidity_day_drop = 30.0;
    double humidity_noise = 1.5;
    double uv_day_peak = 700.0;
    double uv_noise_frac = 0.05;
    double barometer_base = 1009.0;
    double barometer_amp = 2.5;
    double barometer_noise = 0.5;
    double rain_dry_level = 2.0;
    double rain_wet_level = 620.0;
    double rain_noise = 1.0;
    double rain_lux_factor = 0.25;
    double rain_temp_drop = 2.5;
};

struct NodeSoundProfile {
    std::array<double, 5> weights{0.7, 0.15, 0.08, 0.05, 0.02};  // sums to ~1
    double total = 900.0;
};

struct SoundModel {
    std::map<std::string, NodeSoundProfile> profiles;  // per node uid
    double transfer_noise = 6.0;
    double dropout_frac = 0.02;
    // Background texture: per-window amplitude swing on the baseline total,
    // and independent mass shuffles between bins (both fractions of the
    // effective total). Together they give each day's histogram cloud real
    // volume instead of a point mass per regime.
    double breathe_frac = 0.0;
    double tilt_frac = 0.0;
    // Gusty shuffles: with probability gust_prob a window's shuffle draw is
    // scaled by gust_boost (calm windows are shrunk to keep the variance at
    // tilt_frac^2), so the shuffle tail is heavier than a plain Gaussian.
    double gust_prob = 0.0;
    double gust_boost = 1.0;
    // Diurnal loudness: the baseline total is scaled by
    // night_floor + (1 - night_floor) * solar(hour), so 1.0 means a flat
    // baseline and lower values make nights quieter than afternoons.
    double night_floor = 1.0;
    std::array<double, 5> rain_weights{0.08, 0.12, 0.20, 0.30, 0.30};
    double rain_total_factor = 1.25;
    double rain_mix = 0.85;
};

// One recurring schedule entry; expanded per (matching day, node) with
// deterministic jitter.  Envelope is triangular across the duration.
struct ActivityPattern {
    std::vector<std::string> nodes;  // empty = every node
    std::string days = "all";        // selector grammar from timeline
    double start_hour = 9.0;
    double duration_min = 60.0;
    double motion_peak = 0.0;               // counts at envelope peak
    std::array<double, 5> sound_shift{};    // added counts at envelope peak
    double hour_jitter_min = 0.0;
    double skip_prob = 0.0;
    double amp_jitter = 0.0;  // uniform scale in [1-a, 1+a], floored at 0.05
};

struct RainEvent {
    CivilDate date{};
    double start_hour = 14.0;
    double duration_min = 90.0;
    double sensor_lag_min = 10.0;
};

// Motion inflation from heat and light, mirroring the calibration chain's
// likelihood reading: fa = round(max_count * p^exponent * (1 + noise*u)).
struct FalseAlarmModel {
    double max_count = 13.0;
    double exponent = 1.25;
    double noise = 0.2;
    double temp_lower = 28.0;
    double temp_upper = 40.0;
    double lux_lower = 8000.0;
    double lux_upper = 33000.0;
};

struct CorruptionModel {
    double malformed_line_rate = 0.0;
    double garbage_token_rate = 0.0;
    double duplicate_rate = 0.0;
};

struct Scenario {
    std::uint64_t seed = 20160801;
    CivilDate start_date{2016, 8, 1};
    int days = 31;
    int utc_offset_minutes = 480;
    std::vector<std::string> nodes;
    WeatherModel weather;
    SoundModel sound;
    std::vector<ActivityPattern> activities;
    std::vector<RainEvent> rain_events;
    FalseAlarmModel false_alarm;
    CorruptionModel corruption;
    // Windows whose scheduled motion reaches this many counts are labeled
    // true activity in the truth files.
    double activity_truth_motion = 4.0;

    void check() const;  // throws InvalidScenario
    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
    static Scenario from_file(const std::string& path);
    void save(const std::string& path) const;

    // The tuned month-long deployment stand-in: 7 nodes, weekday/weekend
    // schedules, ambience events, 8 rain events, mild corruption.
    static Scenario default_month();
    // Flat and silent: no activity, no false alarms, no corruption, all
    // sound in the lowest bin.
    static Scenario quiet(int days = 2);
};

struct GenerateResult {
    std::vector<std::string> log_paths;
    std::string activity_truth_path;
    std::string false_alarm_truth_path;
    std::string rain_truth_path;
    std::string corruption_truth_path;
    std::string summary_path;
    std::int64_t lines_emitted = 0;
    std::int64_t malformed_injected = 0;
    std::int64_t garbage_tokens = 0;
    std::int64_t duplicates = 0;
    std::int64_t activity_windows = 0;
    std::int64_t false_alarm_windows = 0;
};

// Writes per-node logs plus truth files under out_dir (logs/ and truth/).
// Fully deterministic: the same scenario yields byte-identical files.
GenerateResult generate(const Scenario& scenario, const std::string& out_dir);

// In-memory variant used by tests: one record per node per window, before
// any corruption pass.
struct WindowTruth {
    std::string node_uid;
    std::int64_t window_start_ms = 0;
    int event_motion = 0;
    int fa_motion = 0;
    double p_alpha = 0.0;
    int raw_motion = 0;
    Histogram histogram{};
    bool rain = false;
    double temperature = 0.0;
    double lux = 0.0;
    double rain_sensor = 0.0;
    double uv = 0.0;
    double barometer = 0.0;
    double humidity = 0.0;
};

std::vector<WindowTruth> simulate(const Scenario& scenario);

} // namespace spaceutil::synth
