#include "spaceutil/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "spaceutil/error.hpp"
#include "spaceutil/timeline.hpp"

namespace spaceutil::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// Counter-based randomness: every draw is keyed by (seed, stream parts), so
// generation order never matters and unrelated scenario edits cannot
// reshuffle other draws.
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Streams {
    std::uint64_t seed;

    std::uint64_t key(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
                      std::uint64_t c = 0, std::uint64_t d = 0) const {
        std::uint64_t k = splitmix(seed ^ (tag * 0xd6e8feb86659fd93ULL));
        k = splitmix(k ^ a);
        k = splitmix(k ^ b);
        k = splitmix(k ^ c);
        k = splitmix(k ^ d);
        return k;
    }

    double u01(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
               std::uint64_t c = 0, std::uint64_t d = 0) const {
        return std::ldexp(static_cast<double>(key(tag, a, b, c, d) >> 11), -53);
    }

    // Box-Muller from two keyed uniforms.
    double normal(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
                  std::uint64_t c = 0, std::uint64_t d = 0) const {
        double u1 = u01(tag, a, b, c, d);
        double u2 = u01(tag ^ 0x5851f42d4c957f2dULL, a, b, c, d);
        if (u1 <= 0.0) u1 = 1e-12;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Symmetric uniform in [-1, 1].
    double pm1(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0,
               std::uint64_t c = 0, std::uint64_t d = 0) const {
        return 2.0 * u01(tag, a, b, c, d) - 1.0;
    }
};

enum StreamTag : std::uint64_t {
    kTagTempDay = 1,
    kTagLuxDay,
    kTagTempNoise,
    kTagLuxNoise,
    kTagHumNoise,
    kTagUvNoise,
    kTagBarNoise,
    kTagRainNoise,
    kTagNodeTempOffset,
    kTagNodeLuxFactor,
    kTagNodeHumOffset,
    kTagDropout,
    kTagTransfer,
    kTagEventSkip,
    kTagEventJitter,
    kTagEventAmp,
    kTagFaNoise,
    kTagLuxNight,
    kTagCorruptLine,
    kTagCorruptToken,
    kTagCorruptDup,
    kTagCorruptPick,
    kTagBreathe,
    kTagTilt,
    kTagGust,
};

double solar(double hour) {
    if (hour < 7.0 || hour > 19.0) return 0.0;
    return std::sin(kPi * (hour - 7.0) / 12.0);
}

struct EventInstance {
    double start_min = 0.0;
    double duration_min = 0.0;
    double motion_peak = 0.0;
    std::array<double, 5> sound_shift{};
    double amp = 1.0;
};

// Triangular envelope over [0, 1), peaking mid-event.
double envelope(double pos) {
    if (pos < 0.0 || pos >= 1.0) return 0.0;
    return 1.0 - std::abs(2.0 * pos - 1.0);
}

CivilDate date_plus(const CivilDate& d, int days) {
    using namespace std::chrono;
    sys_days base = sys_days(year_month_day(year(d.year), month(static_cast<unsigned>(d.month)),
                                            day(static_cast<unsigned>(d.day))));
    year_month_day out = year_month_day(base + std::chrono::days(days));
    return {static_cast<int>(out.year()), static_cast<int>(static_cast<unsigned>(out.month())),
            static_cast<int>(static_cast<unsigned>(out.day()))};
}

} // namespace

void Scenario::check() const {
    auto bad = [](const std::string& what) { raise(Errc::InvalidScenario, what); };
    if (days < 1) bad("days must be at least 1");
    if (!valid_date(start_date)) bad("invalid start_date");
    if (nodes.empty()) bad("scenario needs at least one node");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].empty() || nodes[i].find(',') != std::string::npos ||
            nodes[i].find('~') != std::string::npos)
            bad("node uid must be non-empty without ',' or '~'");
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (nodes[i] == nodes[j]) bad("duplicate node uid: " + nodes[i]);
        if (sound.profiles.find(nodes[i]) == sound.profiles.end())
            bad("missing sound profile for node " + nodes[i]);
    }
    for (const auto& [uid, prof] : sound.profiles) {
        double sum = 0.0;
        for (double w : prof.weights) {
            if (w < 0.0) bad("negative sound weight for " + uid);
            sum += w;
        }
        if (sum <= 0.0) bad("all-zero sound profile for " + uid);
        if (prof.total < 0.0 || prof.total > 3000.0)
            bad("sound total outside [0, 3000] for " + uid);
    }
    if (sound.transfer_noise < 0.0 || sound.dropout_frac < 0.0 || sound.dropout_frac > 1.0)
        bad("bad sound noise parameters");
    if (sound.breathe_frac < 0.0 || sound.breathe_frac > 1.0) bad("breathe_frac outside [0,1]");
    if (sound.tilt_frac < 0.0 || sound.tilt_frac > 0.5) bad("tilt_frac outside [0,0.5]");
    if (sound.gust_prob < 0.0 || sound.gust_prob > 0.5) bad("gust_prob outside [0,0.5]");
    if (sound.gust_boost < 1.0 || sound.gust_boost > 5.0) bad("gust_boost outside [1,5]");
    if (sound.gust_prob > 0.0 && sound.gust_prob * sound.gust_boost * sound.gust_boost >= 1.0)
        bad("gusts would hold more than the whole shuffle variance");
    if (sound.night_floor <= 0.0 || sound.night_floor > 1.0) bad("night_floor outside (0,1]");
    if (sound.rain_mix < 0.0 || sound.rain_mix > 1.0) bad("rain_mix outside [0,1]");
    if (sound.rain_total_factor <= 0.0) bad("rain_total_factor must be positive");
    for (const auto& p : activities) {
        if (p.duration_min <= 0.0) bad("activity duration must be positive");
        if (p.start_hour < 0.0 || p.start_hour >= 24.0) bad("activity start_hour outside [0,24)");
        if (p.skip_prob < 0.0 || p.skip_prob > 1.0) bad("skip_prob outside [0,1]");
        if (p.motion_peak < 0.0 || p.motion_peak > 100.0) bad("motion_peak outside [0,100]");
        timeline::selector_matches(p.days, CivilDate{2000, 1, 1}, 0);  // grammar check
        for (const auto& uid : p.nodes)
            if (std::find(nodes.begin(), nodes.end(), uid) == nodes.end())
                bad("activity references unknown node " + uid);
    }
    for (const auto& e : rain_events) {
        if (!valid_date(e.date)) bad("invalid rain event date");
        if (e.duration_min <= 0.0) bad("rain duration must be positive");
        if (e.start_hour < 0.0 || e.start_hour >= 24.0) bad("rain start_hour outside [0,24)");
        CivilDate last = date_plus(start_date, days - 1);
        if (e.date < start_date || last < e.date) bad("rain event outside scenario range");
    }
    if (false_alarm.max_count < 0.0 || false_alarm.max_count > 100.0)
        bad("false alarm max_count outside [0,100]");
    if (false_alarm.exponent <= 0.0) bad("false alarm exponent must be positive");
    if (false_alarm.noise < 0.0 || false_alarm.noise > 1.0) bad("false alarm noise outside [0,1]");
    if (!(false_alarm.temp_lower < false_alarm.temp_upper) ||
        !(false_alarm.lux_lower < false_alarm.lux_upper))
        bad("false alarm likelihood bounds must satisfy lower < upper");
    for (double rate : {corruption.malformed_line_rate, corruption.garbage_token_rate,
                        corruption.duplicate_rate})
        if (rate < 0.0 || rate > 1.0) bad("corruption rates must lie in [0,1]");
    if (activity_truth_motion < 1.0) bad("activity_truth_motion must be at least 1");
}

namespace {

nlohmann::json weights_json(const std::array<double, 5>& w) {
    return nlohmann::json(w);
}

std::array<double, 5> weights_from(const nlohmann::json& j) {
    return j.get<std::array<double, 5>>();
}

} // namespace

nlohmann::json Scenario::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["start_date"] = format_date(start_date);
    j["days"] = days;
    j["utc_offset"] = format_utc_offset(utc_offset_minutes);
    j["nodes"] = nodes;

    nlohmann::json w;
    w["temp_base"] = weather.temp_base;
    w["temp_day_gain"] = weather.temp_day_gain;
    w["temp_day_jitter"] = weather.temp_day_jitter;
    w["temp_noise"] = weather.temp_noise;
    w["lux_day_peak"] = weather.lux_day_peak;
    w["lux_day_jitter"] = weather.lux_day_jitter;
    w["lux_noise_frac"] = weather.lux_noise_frac;
    w["lux_night"] = weather.lux_night;
    w["humidity_base"] = weather.humidity_base;
    w["humidity_day_drop"] = weather.humidity_day_drop;
    w["humidity_noise"] = weather.humidity_noise;
    w["uv_day_peak"] = weather.uv_day_peak;
    w["uv_noise_frac"] = weather.uv_noise_frac;
    w["barometer_base"] = weather.barometer_base;
    w["barometer_amp"] = weather.barometer_amp;
    w["barometer_noise"] = weather.barometer_noise;
    w["rain_dry_level"] = weather.rain_dry_level;
    w["rain_wet_level"] = weather.rain_wet_level;
    w["rain_noise"] = weather.rain_noise;
    w["rain_lux_factor"] = weather.rain_lux_factor;
    w["rain_temp_drop"] = weather.rain_temp_drop;
    j["weather"] = w;

    nlohmann::json s;
    for (const auto& [uid, prof] : sound.profiles)
        s["profiles"][uid] = {{"weights", weights_json(prof.weights)}, {"total", prof.total}};
    s["transfer_noise"] = sound.transfer_noise;
    s["dropout_frac"] = sound.dropout_frac;
    s["breathe_frac"] = sound.breathe_frac;
    s["tilt_frac"] = sound.tilt_frac;
    s["gust_prob"] = sound.gust_prob;
    s["gust_boost"] = sound.gust_boost;
    s["night_floor"] = sound.night_floor;
    s["rain_weights"] = weights_json(sound.rain_weights);
    s["rain_total_factor"] = sound.rain_total_factor;
    s["rain_mix"] = sound.rain_mix;
    j["sound"] = s;

    j["activities"] = nlohmann::json::array();
    for (const auto& p : activities) {
        nlohmann::json a;
        a["nodes"] = p.nodes;
        a["days"] = p.days;
        a["start_hour"] = p.start_hour;
        a["duration_min"] = p.duration_min;
        a["motion_peak"] = p.motion_peak;
        a["sound_shift"] = weights_json(p.sound_shift);
        a["hour_jitter_min"] = p.hour_jitter_min;
        a["skip_prob"] = p.skip_prob;
        a["amp_jitter"] = p.amp_jitter;
        j["activities"].push_back(a);
    }

    j["rain_events"] = nlohmann::json::array();
    for (const auto& e : rain_events) {
        nlohmann::json r;
        r["date"] = format_date(e.date);
        r["start_hour"] = e.start_hour;
        r["duration_min"] = e.duration_min;
        r["sensor_lag_min"] = e.sensor_lag_min;
        j["rain_events"].push_back(r);
    }

    j["false_alarm"] = {{"max_count", false_alarm.max_count},
                        {"exponent", false_alarm.exponent},
                        {"noise", false_alarm.noise},
                        {"temp_lower", false_alarm.temp_lower},
                        {"temp_upper", false_alarm.temp_upper},
                        {"lux_lower", false_alarm.lux_lower},
                        {"lux_upper", false_alarm.lux_upper}};
    j["corruption"] = {{"malformed_line_rate", corruption.malformed_line_rate},
                       {"garbage_token_rate", corruption.garbage_token_rate},
                       {"duplicate_rate", corruption.duplicate_rate}};
    j["activity_truth_motion"] = activity_truth_motion;
    return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario sc;
    try {
        sc.seed = j.at("seed").get<std::uint64_t>();
        sc.start_date = parse_date(j.at("start_date").get<std::string>());
        sc.days = j.at("days").get<int>();
        if (j.contains("utc_offset"))
            sc.utc_offset_minutes = parse_utc_offset(j.at("utc_offset").get<std::string>());
        sc.nodes = j.at("nodes").get<std::vector<std::string>>();

        if (j.contains("weather")) {
            const auto& w = j.at("weather");
            auto opt = [&](const char* k, double& out) {
                if (w.contains(k)) out = w.at(k).get<double>();
            };
            opt("temp_base", sc.weather.temp_base);
            opt("temp_day_gain", sc.weather.temp_day_gain);
            opt("temp_day_jitter", sc.weather.temp_day_jitter);
            opt("temp_noise", sc.weather.temp_noise);
            opt("lux_day_peak", sc.weather.lux_day_peak);
            opt("lux_day_jitter", sc.weather.lux_day_jitter);
            opt("lux_noise_frac", sc.weather.lux_noise_frac);
            opt("lux_night", sc.weather.lux_night);
            opt("humidity_base", sc.weather.humidity_base);
            opt("humidity_day_drop", sc.weather.humidity_day_drop);
            opt("humidity_noise", sc.weather.humidity_noise);
            opt("uv_day_peak", sc.weather.uv_day_peak);
            opt("uv_noise_frac", sc.weather.uv_noise_frac);
            opt("barometer_base", sc.weather.barometer_base);
            opt("barometer_amp", sc.weather.barometer_amp);
            opt("barometer_noise", sc.weather.barometer_noise);
            opt("rain_dry_level", sc.weather.rain_dry_level);
            opt("rain_wet_level", sc.weather.rain_wet_level);
            opt("rain_noise", sc.weather.rain_noise);
            opt("rain_lux_factor", sc.weather.rain_lux_factor);
            opt("rain_temp_drop", sc.weather.rain_temp_drop);
        }

        if (j.contains("sound")) {
            const auto& s = j.at("sound");
            if (s.contains("profiles"))
                for (const auto& [uid, p] : s.at("profiles").items())
                    sc.sound.profiles[uid] = {weights_from(p.at("weights")),
                                              p.at("total").get<double>()};
            if (s.contains("transfer_noise"))
                sc.sound.transfer_noise = s.at("transfer_noise").get<double>();
            if (s.contains("dropout_frac"))
                sc.sound.dropout_frac = s.at("dropout_frac").get<double>();
            if (s.contains("breathe_frac"))
                sc.sound.breathe_frac = s.at("breathe_frac").get<double>();
            if (s.contains("tilt_frac"))
                sc.sound.tilt_frac = s.at("tilt_frac").get<double>();
            if (s.contains("gust_prob")) sc.sound.gust_prob = s.at("gust_prob").get<double>();
            if (s.contains("gust_boost")) sc.sound.gust_boost = s.at("gust_boost").get<double>();
            if (s.contains("night_floor"))
                sc.sound.night_floor = s.at("night_floor").get<double>();
            if (s.contains("rain_weights"))
                sc.sound.rain_weights = weights_from(s.at("rain_weights"));
            if (s.contains("rain_total_factor"))
                sc.sound.rain_total_factor = s.at("rain_total_factor").get<double>();
            if (s.contains("rain_mix")) sc.sound.rain_mix = s.at("rain_mix").get<double>();
        }

        if (j.contains("activities"))
            for (const auto& a : j.at("activities")) {
                ActivityPattern p;
                if (a.contains("nodes")) p.nodes = a.at("nodes").get<std::vector<std::string>>();
                if (a.contains("days")) p.days = a.at("days").get<std::string>();
                p.start_hour = a.at("start_hour").get<double>();
                p.duration_min = a.at("duration_min").get<double>();
                if (a.contains("motion_peak")) p.motion_peak = a.at("motion_peak").get<double>();
                if (a.contains("sound_shift")) p.sound_shift = weights_from(a.at("sound_shift"));
                if (a.contains("hour_jitter_min"))
                    p.hour_jitter_min = a.at("hour_jitter_min").get<double>();
                if (a.contains("skip_prob")) p.skip_prob = a.at("skip_prob").get<double>();
                if (a.contains("amp_jitter")) p.amp_jitter = a.at("amp_jitter").get<double>();
                sc.activities.push_back(std::move(p));
            }

        if (j.contains("rain_events"))
            for (const auto& r : j.at("rain_events")) {
                RainEvent e;
                e.date = parse_date(r.at("date").get<std::string>());
                e.start_hour = r.at("start_hour").get<double>();
                e.duration_min = r.at("duration_min").get<double>();
                if (r.contains("sensor_lag_min"))
                    e.sensor_lag_min = r.at("sensor_lag_min").get<double>();
                sc.rain_events.push_back(e);
            }

        if (j.contains("false_alarm")) {
            const auto& f = j.at("false_alarm");
            auto opt = [&](const char* k, double& out) {
                if (f.contains(k)) out = f.at(k).get<double>();
            };
            opt("max_count", sc.false_alarm.max_count);
            opt("exponent", sc.false_alarm.exponent);
            opt("noise", sc.false_alarm.noise);
            opt("temp_lower", sc.false_alarm.temp_lower);
            opt("temp_upper", sc.false_alarm.temp_upper);
            opt("lux_lower", sc.false_alarm.lux_lower);
            opt("lux_upper", sc.false_alarm.lux_upper);
        }

        if (j.contains("corruption")) {
            const auto& c = j.at("corruption");
            if (c.contains("malformed_line_rate"))
                sc.corruption.malformed_line_rate = c.at("malformed_line_rate").get<double>();
            if (c.contains("garbage_token_rate"))
                sc.corruption.garbage_token_rate = c.at("garbage_token_rate").get<double>();
            if (c.contains("duplicate_rate"))
                sc.corruption.duplicate_rate = c.at("duplicate_rate").get<double>();
        }
        if (j.contains("activity_truth_motion"))
            sc.activity_truth_motion = j.at("activity_truth_motion").get<double>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidScenario, std::string("bad scenario: ") + e.what());
    }
    sc.check();
    return sc;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open scenario: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidScenario, std::string("bad scenario json: ") + e.what());
    }
    return from_json(j);
}

void Scenario::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write scenario: " + path);
    out << to_json().dump(2) << "\n";
}

namespace {

ActivityPattern make_pattern(std::vector<std::string> nodes, std::string days, double start_hour,
                             double duration_min, double motion_peak,
                             std::array<double, 5> shift, double jitter, double skip,
                             double amp_jitter) {
    ActivityPattern p;
    p.nodes = std::move(nodes);
    p.days = std::move(days);
    p.start_hour = start_hour;
    p.duration_min = duration_min;
    p.motion_peak = motion_peak;
    p.sound_shift = shift;
    p.hour_jitter_min = jitter;
    p.skip_prob = skip;
    p.amp_jitter = amp_jitter;
    return p;
}

} // namespace

Scenario Scenario::default_month() {
    Scenario sc;
    sc.nodes = {"n1", "n2", "n3", "n4", "n5", "n6", "n7"};

    // Distinct acoustic baselines per node: each shape parks most of its
    // mass on its own bin (or pair of bins) so node identity survives the
    // per-window texture.
    sc.sound.profiles["n1"] = {{0.76, 0.10, 0.06, 0.05, 0.03}, 620.0};
    sc.sound.profiles["n2"] = {{0.05, 0.76, 0.09, 0.06, 0.04}, 740.0};
    sc.sound.profiles["n3"] = {{0.04, 0.08, 0.76, 0.07, 0.05}, 560.0};
    sc.sound.profiles["n4"] = {{0.04, 0.05, 0.09, 0.76, 0.06}, 850.0};
    sc.sound.profiles["n5"] = {{0.03, 0.04, 0.06, 0.09, 0.78}, 680.0};
    sc.sound.profiles["n6"] = {{0.42, 0.05, 0.42, 0.05, 0.06}, 780.0};
    sc.sound.profiles["n7"] = {{0.05, 0.41, 0.05, 0.43, 0.06}, 500.0};

    // Background texture: strong per-window amplitude swings and bin
    // shuffles give every quiet regime real volume in all directions.
    sc.sound.breathe_frac = 0.30;
    sc.sound.tilt_frac = 0.42;
    sc.sound.rain_mix = 0.96;
    sc.sound.rain_total_factor = 1.5;

    // People: scheduled visits that move the motion counter and thicken the
    // mid/high sound bins.
    sc.activities.push_back(make_pattern({}, "weekday", 7.5, 45.0, 22.0,
                                         {8, 26, 45, 30, 11}, 10.0, 0.15, 0.35));
    sc.activities.push_back(make_pattern({}, "weekday", 12.0, 75.0, 45.0,
                                         {11, 38, 68, 52, 19}, 8.0, 0.10, 0.30));
    sc.activities.push_back(make_pattern({}, "all", 18.5, 90.0, 30.0,
                                         {9, 30, 56, 41, 15}, 12.0, 0.12, 0.35));
    sc.activities.push_back(make_pattern({}, "weekend", 10.0, 150.0, 55.0,
                                         {15, 45, 83, 64, 26}, 15.0, 0.05, 0.25));
    sc.activities.push_back(make_pattern({"n2", "n5"}, "all", 21.0, 60.0, 18.0,
                                         {6, 19, 34, 26, 9}, 10.0, 0.30, 0.40));

    // Ambience: short motionless sound bursts (traffic, birds, insects).
    // Their amplitude continuum is what keeps the upper tail of the quiet
    // score distribution smooth.
    sc.activities.push_back(make_pattern({}, "all", 6.0, 20.0, 0.0,
                                         {8, 18, 40, 58, 33}, 20.0, 0.10, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 8.67, 25.0, 0.0,
                                         {38, 80, 53, 23, 8}, 25.0, 0.10, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 10.5, 22.0, 0.0,
                                         {28, 60, 38, 18, 6}, 30.0, 0.12, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 12.67, 25.0, 0.0,
                                         {33, 69, 45, 20, 8}, 25.0, 0.10, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 14.17, 22.0, 0.0,
                                         {30, 65, 43, 19, 6}, 30.0, 0.12, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 15.83, 25.0, 0.0,
                                         {35, 75, 50, 21, 8}, 25.0, 0.10, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 17.33, 25.0, 0.0,
                                         {43, 90, 60, 25, 10}, 25.0, 0.10, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 19.67, 22.0, 0.0,
                                         {25, 55, 35, 15, 5}, 30.0, 0.12, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 21.5, 20.0, 0.0,
                                         {18, 40, 25, 11, 4}, 25.0, 0.15, 0.80));
    sc.activities.push_back(make_pattern({}, "all", 23.0, 25.0, 0.0,
                                         {6, 15, 30, 48, 28}, 20.0, 0.15, 0.80));

    // Short loud passes (trams, trucks, sirens) heard by one node at a time.
    // Each lasts a few windows, so the quiet fit absorbs them and scores
    // them as outliers instead of carving them into their own regime.
    static constexpr std::array<std::array<double, 5>, 3> kPassDirs{{
        {0.80, 0.12, 0.03, 0.03, 0.02},
        {0.10, 0.72, 0.12, 0.04, 0.02},
        {0.06, 0.06, 0.12, 0.66, 0.10},
    }};
    for (std::size_t ni = 0; ni < sc.nodes.size(); ++ni) {
        double total = sc.sound.profiles[sc.nodes[ni]].total;
        for (int j = 0; j < 6; ++j) {
            const auto& dir = kPassDirs[static_cast<std::size_t>(j) % kPassDirs.size()];
            std::array<double, 5> s{};
            for (std::size_t b = 0; b < 5; ++b) s[b] = std::round(1.7 * total * dir[(b + ni) % 5]);
            double start = std::fmod(0.53 + 3.91 * j + 0.87 * static_cast<double>(ni), 24.0);
            sc.activities.push_back(
                make_pattern({sc.nodes[ni]}, "all", start, 21.0, 0.0, s, 55.0, 0.12, 0.5));
        }
    }

    sc.rain_events = {
        {{2016, 8, 3}, 14.33, 100.0, 10.0},  {{2016, 8, 6}, 16.0, 140.0, 12.0},
        {{2016, 8, 10}, 9.5, 80.0, 8.0},     {{2016, 8, 13}, 19.0, 120.0, 10.0},
        {{2016, 8, 17}, 13.67, 160.0, 15.0}, {{2016, 8, 21}, 7.83, 90.0, 10.0},
        {{2016, 8, 25}, 15.5, 130.0, 12.0},  {{2016, 8, 29}, 18.17, 110.0, 10.0},
    };

    sc.corruption.malformed_line_rate = 0.003;
    sc.corruption.garbage_token_rate = 0.004;
    sc.corruption.duplicate_rate = 0.002;
    return sc;
}

Scenario Scenario::quiet(int days) {
    Scenario sc;
    sc.seed = 7;
    sc.days = days;
    sc.nodes = {"n1", "n2"};
    // Distinct baselines: co-clustering identical nodes reads as rain.
    sc.sound.profiles["n1"] = {{0.96, 0.02, 0.01, 0.006, 0.004}, 400.0};
    sc.sound.profiles["n2"] = {{0.90, 0.05, 0.03, 0.012, 0.008}, 520.0};
    sc.sound.transfer_noise = 2.0;
    sc.sound.dropout_frac = 0.01;
    sc.false_alarm.max_count = 0.0;
    return sc;
}

std::vector<WindowTruth> simulate(const Scenario& sc) {
    sc.check();
    Streams rng{sc.seed};
    const WeatherModel& wm = sc.weather;
    const int windows_per_day = kWindowsPerDay;

    std::vector<WindowTruth> out;
    out.reserve(static_cast<std::size_t>(sc.days) * windows_per_day * sc.nodes.size());

    double fleet_total = 0.0;
    for (const std::string& uid : sc.nodes) fleet_total += sc.sound.profiles.at(uid).total;
    fleet_total /= static_cast<double>(sc.nodes.size());

    // Calm-window shrink that keeps the gusty shuffle mixture at unit variance.
    double gust_calm = 1.0;
    if (sc.sound.gust_prob > 0.0)
        gust_calm = std::sqrt((1.0 - sc.sound.gust_prob * sc.sound.gust_boost * sc.sound.gust_boost) /
                              (1.0 - sc.sound.gust_prob));

    for (std::size_t ni = 0; ni < sc.nodes.size(); ++ni) {
        const std::string& uid = sc.nodes[ni];
        const NodeSoundProfile& prof = sc.sound.profiles.at(uid);
        double w_sum = 0.0;
        for (double w : prof.weights) w_sum += w;
        std::array<double, 5> base_w{};
        for (int b = 0; b < 5; ++b) base_w[static_cast<std::size_t>(b)] =
            prof.weights[static_cast<std::size_t>(b)] / w_sum;
        double rain_sum = 0.0;
        for (double w : sc.sound.rain_weights) rain_sum += w;

        double node_temp_off = 0.3 * rng.pm1(kTagNodeTempOffset, ni);
        double node_lux_factor = 1.0 + 0.05 * rng.pm1(kTagNodeLuxFactor, ni);
        double node_hum_off = 1.5 * rng.pm1(kTagNodeHumOffset, ni);

        for (int day = 0; day < sc.days; ++day) {
            CivilDate date = date_plus(sc.start_date, day);
            std::int64_t day_start = local_midnight_ms(date, sc.utc_offset_minutes);
            LocalFields lf0 = local_fields(day_start, sc.utc_offset_minutes);
            auto di = static_cast<std::uint64_t>(day);

            double temp_gain =
                wm.temp_day_gain * (1.0 + (wm.temp_day_jitter / wm.temp_day_gain) *
                                              rng.pm1(kTagTempDay, di));
            double lux_scale = 1.0 - wm.lux_day_jitter * rng.u01(kTagLuxDay, di);

            // Expand today's schedule for this node.
            std::vector<EventInstance> events;
            for (std::size_t pi = 0; pi < sc.activities.size(); ++pi) {
                const ActivityPattern& p = sc.activities[pi];
                if (!p.nodes.empty() &&
                    std::find(p.nodes.begin(), p.nodes.end(), uid) == p.nodes.end())
                    continue;
                if (!timeline::selector_matches(p.days, date, lf0.dow_mon0)) continue;
                if (rng.u01(kTagEventSkip, pi, di, ni) < p.skip_prob) continue;
                EventInstance ev;
                ev.start_min = p.start_hour * 60.0 +
                               p.hour_jitter_min * rng.pm1(kTagEventJitter, pi, di, ni);
                ev.duration_min = p.duration_min;
                ev.amp = std::max(0.05, 1.0 + p.amp_jitter * rng.pm1(kTagEventAmp, pi, di, ni));
                ev.motion_peak = p.motion_peak;
                ev.sound_shift = p.sound_shift;
                events.push_back(ev);
            }

            for (int w = 0; w < windows_per_day; ++w) {
                auto wi = static_cast<std::uint64_t>(w);
                WindowTruth truth;
                truth.node_uid = uid;
                truth.window_start_ms = day_start + static_cast<std::int64_t>(w) * kWindowMs;
                double minute = w * 5.0 + 2.5;
                double hour = minute / 60.0;
                double sol = solar(hour);

                // Rain coverage and the lagged rain-sensor response.
                double rain_cover = 0.0;
                double sensor_wet = 0.0;
                for (const auto& e : sc.rain_events) {
                    if (!(e.date == date)) continue;
                    double rs = e.start_hour * 60.0;
                    double re = rs + e.duration_min;
                    if (minute >= rs && minute < re) rain_cover = 1.0;
                    double lagged = minute - (rs + e.sensor_lag_min);
                    if (lagged >= 0.0 && minute < re) {
                        sensor_wet = std::min(1.0, (lagged + 2.5) / 10.0);
                    } else if (minute >= re && minute < re + 30.0) {
                        sensor_wet = std::max(sensor_wet, 1.0 - (minute - re) / 30.0);
                    }
                }
                truth.rain = rain_cover > 0.0;

                double site_temp = wm.temp_base + temp_gain * sol -
                                   wm.rain_temp_drop * rain_cover +
                                   wm.temp_noise * rng.normal(kTagTempNoise, di, wi);
                double temp = std::clamp(site_temp + node_temp_off, -10.0, 80.0);

                double lux_day = wm.lux_day_peak * lux_scale * sol *
                                 (1.0 + wm.lux_noise_frac * rng.normal(kTagLuxNoise, di, wi, ni));
                double lux_night = wm.lux_night * (1.0 + 0.3 * rng.u01(kTagLuxNight, di, wi, ni));
                double lux = std::max(lux_day * node_lux_factor, lux_night);
                if (rain_cover > 0.0) lux = std::max(lux * wm.rain_lux_factor, 0.1);
                lux = std::clamp(lux, 0.1, 40000.0);

                double humidity = wm.humidity_base - wm.humidity_day_drop * sol +
                                  5.0 * rain_cover + node_hum_off +
                                  wm.humidity_noise * rng.normal(kTagHumNoise, di, wi, ni);
                humidity = std::clamp(humidity, 0.0, 100.0);

                double uv = wm.uv_day_peak * sol *
                            (1.0 + wm.uv_noise_frac * rng.normal(kTagUvNoise, di, wi, ni));
                if (rain_cover > 0.0) uv *= 0.3;
                uv = std::clamp(uv, 0.0, 1024.0);

                double barometer = wm.barometer_base +
                                   wm.barometer_amp * std::sin(2.0 * kPi * (hour - 10.0) / 12.0) +
                                   wm.barometer_noise * rng.normal(kTagBarNoise, di, wi);
                barometer = std::clamp(barometer, 300.0, 1200.0);

                double rain_sensor = wm.rain_dry_level +
                                     (wm.rain_wet_level - wm.rain_dry_level) * sensor_wet +
                                     wm.rain_noise * std::abs(rng.normal(kTagRainNoise, di, wi, ni));
                rain_sensor = std::clamp(rain_sensor, 0.0, 1024.0);

                // Scheduled motion and sound shifts.
                double event_motion = 0.0;
                std::array<double, 5> shift{};
                for (const auto& ev : events) {
                    double env = envelope((minute - ev.start_min) / ev.duration_min);
                    if (env <= 0.0) continue;
                    event_motion += ev.motion_peak * env * ev.amp;
                    for (int b = 0; b < 5; ++b)
                        shift[static_cast<std::size_t>(b)] +=
                            ev.sound_shift[static_cast<std::size_t>(b)] * env * ev.amp;
                }
                truth.event_motion = static_cast<int>(std::lround(event_motion));

                // False alarms track the same likelihoods the calibration
                // will later estimate.
                const FalseAlarmModel& fa = sc.false_alarm;
                auto ramp = [](double v, double lo, double hi) {
                    if (v <= lo) return 0.0;
                    if (v >= hi) return 1.0;
                    return (v - lo) / (hi - lo);
                };
                double p_alpha = (ramp(temp, fa.temp_lower, fa.temp_upper) +
                                  ramp(lux, fa.lux_lower, fa.lux_upper)) /
                                 2.0;
                truth.p_alpha = p_alpha;
                double fa_f = fa.max_count * std::pow(p_alpha, fa.exponent) *
                              (1.0 + fa.noise * rng.pm1(kTagFaNoise, di, wi, ni));
                truth.fa_motion = p_alpha > 0.0 ? std::max(0, static_cast<int>(std::lround(fa_f)))
                                                : 0;
                truth.raw_motion = std::min(100, truth.event_motion + truth.fa_motion);

                // Histogram: diurnal baseline loudness, rain mixing, activity
                // shifts, amplitude breathing, bin shuffles, count dropout and
                // sum-preserving transfer noise. Rain drumming is site-wide
                // and steady: its level rides on the fleet average and masks
                // the ambient texture, so breathe and tilt only touch the
                // background share of the window.
                double mix = sc.sound.rain_mix * rain_cover;
                double breathe = std::clamp(
                    1.0 + sc.sound.breathe_frac * rng.normal(kTagBreathe, di, wi, ni), 0.05, 2.0);
                double loud = sc.sound.night_floor + (1.0 - sc.sound.night_floor) * sol;
                double t_bg = (1.0 - mix) * prof.total * loud * breathe;
                double t_eff = (t_bg + mix * sc.sound.rain_total_factor * fleet_total) *
                               (1.0 + sc.sound.dropout_frac * rng.normal(kTagDropout, di, wi, ni));
                // Orthogonal zero-sum directions that trade mass between bins
                // without moving the expected total. The first three carry
                // most of the texture; the last only roughens the residual.
                static constexpr std::array<std::array<double, 5>, 4> kTilts{{
                    {0.3889, -0.3889, 0.0000, 0.0000, 0.0000},
                    {0.2245, 0.2245, -0.4491, 0.0000, 0.0000},
                    {0.1350, 0.1350, 0.1350, -0.4049, 0.0000},
                    {0.0369, 0.0369, 0.0369, 0.0369, -0.1476},
                }};
                std::array<double, 4> tilt_z{};
                if (sc.sound.tilt_frac > 0.0)
                    for (std::size_t k = 0; k < kTilts.size(); ++k) {
                        std::uint64_t lane = ni * kTilts.size() + k;
                        double scale =
                            rng.u01(kTagGust, di, wi, lane) < sc.sound.gust_prob
                                ? sc.sound.gust_boost
                                : gust_calm;
                        tilt_z[k] = sc.sound.tilt_frac * scale *
                                    rng.normal(kTagTilt, di, wi, lane);
                    }
                std::array<long long, 5> bins{};
                long long sum = 0;
                for (int b = 0; b < 5; ++b) {
                    auto bi = static_cast<std::size_t>(b);
                    double wgt = (1.0 - mix) * base_w[bi] +
                                 mix * sc.sound.rain_weights[bi] / rain_sum;
                    double v = wgt * t_eff + shift[bi];
                    // Rotate the tilt directions per node so neighbouring
                    // nodes shuffle along different axes.
                    for (std::size_t k = 0; k < kTilts.size(); ++k)
                        v += t_bg * tilt_z[k] * kTilts[k][(bi + ni) % 5];
                    bins[bi] = std::max(0LL, std::llround(v));
                    sum += bins[bi];
                }
                for (int b = 0; b < 4; ++b) {
                    auto bi = static_cast<std::size_t>(b);
                    auto t = std::llround(sc.sound.transfer_noise *
                                          rng.normal(kTagTransfer, di, wi, ni * 8 + bi));
                    t = std::clamp(t, -bins[bi + 1], bins[bi]);
                    bins[bi] -= t;
                    bins[bi + 1] += t;
                }
                if (sum > 3000) {
                    long long scaled = 0;
                    for (auto& b : bins) {
                        b = b * 3000 / sum;
                        scaled += b;
                    }
                    (void)scaled;
                }
                for (int b = 0; b < 5; ++b)
                    truth.histogram[static_cast<std::size_t>(b)] =
                        static_cast<int>(bins[static_cast<std::size_t>(b)]);

                // Stash the context sensors through the truth record.
                truth.temperature = temp;
                truth.lux = lux;
                truth.rain_sensor = rain_sensor;
                truth.uv = uv;
                truth.barometer = barometer;
                truth.humidity = humidity;
                out.push_back(std::move(truth));
            }
        }
    }
    return out;
}

namespace {

std::string format_line(const WindowTruth& t, std::int64_t phase_ms) {
    char buf[64];
    std::string line = std::to_string(t.window_start_ms + phase_ms);
    line += ',';
    line += t.node_uid;
    line += ",M:";
    line += std::to_string(t.raw_motion);
    line += ";X:";
    for (int b = 0; b < 5; ++b) {
        if (b) line += ',';
        line += std::to_string(t.histogram[static_cast<std::size_t>(b)]);
    }
    std::snprintf(buf, sizeof(buf), ";K:%.2f", t.temperature);
    line += buf;
    std::snprintf(buf, sizeof(buf), ";L:%.1f", t.lux);
    line += buf;
    std::snprintf(buf, sizeof(buf), ";R:%.1f", t.rain_sensor);
    line += buf;
    std::snprintf(buf, sizeof(buf), ";U:%.1f", t.uv);
    line += buf;
    std::snprintf(buf, sizeof(buf), ";B:%.2f", t.barometer);
    line += buf;
    std::snprintf(buf, sizeof(buf), ";H:%.2f", t.humidity);
    line += buf;
    return line;
}

std::string hex_tail(std::uint64_t k) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%08llx", static_cast<unsigned long long>(k & 0xffffffffULL));
    return buf;
}

// Broken lines come from a small pool of shapes, all carrying the '~'
// marker so truth files can count them exactly.
std::string malformed_line(std::uint64_t k) {
    switch (k % 4) {
        case 0: return "~burst~" + hex_tail(k);
        case 1: return "~" + hex_tail(k) + ",half-a-record";
        case 2: return "notatime~" + hex_tail(k) + ",n,x,K:1";
        default: return ",,~" + hex_tail(k);
    }
}

} // namespace

GenerateResult generate(const Scenario& sc, const std::string& out_dir) {
    sc.check();
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "logs", ec);
    fs::create_directories(fs::path(out_dir) / "truth", ec);
    if (ec) raise(Errc::IoFailure, "cannot create output directories under " + out_dir);

    Streams rng{sc.seed};
    GenerateResult result;
    std::vector<WindowTruth> rows = simulate(sc);

    // Rows are grouped per node in node order; windows ascend within a node.
    std::size_t per_node = static_cast<std::size_t>(sc.days) * kWindowsPerDay;

    std::ofstream activity_csv;
    std::ofstream fa_csv;
    std::ofstream corruption_csv;
    std::string activity_path = (fs::path(out_dir) / "truth" / "activity.csv").string();
    std::string fa_path = (fs::path(out_dir) / "truth" / "false_alarms.csv").string();
    std::string rain_path = (fs::path(out_dir) / "truth" / "rain.csv").string();
    std::string corruption_path = (fs::path(out_dir) / "truth" / "corruption.csv").string();
    std::string summary_path = (fs::path(out_dir) / "truth" / "summary.json").string();
    activity_csv.open(activity_path);
    fa_csv.open(fa_path);
    corruption_csv.open(corruption_path);
    if (!activity_csv || !fa_csv || !corruption_csv)
        raise(Errc::IoFailure, "cannot write truth files under " + out_dir);
    activity_csv << "node,window_start,event_motion\n";
    fa_csv << "window_start,p_alpha,raw_motion,is_false_alarm\n";
    corruption_csv << "node,data_lines,malformed_injected,garbage_tokens,duplicates\n";

    for (std::size_t ni = 0; ni < sc.nodes.size(); ++ni) {
        const std::string& uid = sc.nodes[ni];
        std::string log_path = (fs::path(out_dir) / "logs" / (uid + ".log")).string();
        std::ofstream log(log_path);
        if (!log) raise(Errc::IoFailure, "cannot write log: " + log_path);
        log << "# synthetic node log " << uid << "\n";

        std::int64_t phase_ms = static_cast<std::int64_t>(ni) * 7000 + 1000;
        std::int64_t node_lines = 0, node_malformed = 0, node_garbage = 0, node_dups = 0;

        for (std::size_t r = 0; r < per_node; ++r) {
            const WindowTruth& t = rows[ni * per_node + r];
            auto di = static_cast<std::uint64_t>(r / kWindowsPerDay);
            auto wi = static_cast<std::uint64_t>(r % kWindowsPerDay);

            if (rng.u01(kTagCorruptLine, ni, di, wi) < sc.corruption.malformed_line_rate) {
                log << malformed_line(rng.key(kTagCorruptPick, ni, di, wi)) << "\n";
                ++node_malformed;
            }

            std::string line = format_line(t, phase_ms);
            int line_garbage = 0;
            if (sc.corruption.garbage_token_rate > 0.0) {
                // Re-tokenize the payload and corrupt individual tokens.
                std::size_t c2 = line.find(',', line.find(',') + 1);
                std::string head = line.substr(0, c2 + 1);
                std::string payload = line.substr(c2 + 1);
                std::vector<std::string> tokens;
                std::size_t begin = 0;
                while (begin <= payload.size()) {
                    std::size_t semi = payload.find(';', begin);
                    if (semi == std::string::npos) {
                        tokens.push_back(payload.substr(begin));
                        break;
                    }
                    tokens.push_back(payload.substr(begin, semi - begin));
                    begin = semi + 1;
                }
                for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
                    if (rng.u01(kTagCorruptToken, ni, di, wi * 16 + ti) >=
                        sc.corruption.garbage_token_rate)
                        continue;
                    std::uint64_t pick = rng.key(kTagCorruptPick, ni, di, wi * 16 + ti);
                    std::size_t colon = tokens[ti].find(':');
                    if (pick % 2 == 0) {
                        tokens[ti] = "~" + tokens[ti];  // unknown id
                    } else {
                        tokens[ti] = tokens[ti].substr(0, colon + 1) + "~" + hex_tail(pick);
                    }
                    ++line_garbage;
                }
                line = head;
                for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
                    if (ti) line += ';';
                    line += tokens[ti];
                }
            }

            log << line << "\n";
            ++node_lines;
            node_garbage += line_garbage;
            if (rng.u01(kTagCorruptDup, ni, di, wi) < sc.corruption.duplicate_rate) {
                log << line << "\n";
                ++node_dups;
                node_garbage += line_garbage;
            }

            if (t.event_motion >= sc.activity_truth_motion) {
                activity_csv << uid << ',' << t.window_start_ms << ',' << t.event_motion << "\n";
                ++result.activity_windows;
            } else if (t.event_motion == 0) {
                int is_fa = t.fa_motion > 0 ? 1 : 0;
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.6f", t.p_alpha);
                fa_csv << t.window_start_ms << ',' << buf << ',' << t.raw_motion << ',' << is_fa
                       << "\n";
                if (is_fa) ++result.false_alarm_windows;
            }
        }

        if (!log) raise(Errc::IoFailure, "short write: " + log_path);
        corruption_csv << uid << ',' << node_lines << ',' << node_malformed << ','
                       << node_garbage << ',' << node_dups << "\n";
        result.log_paths.push_back(log_path);
        result.lines_emitted += node_lines + node_malformed + node_dups;
        result.malformed_injected += node_malformed;
        result.garbage_tokens += node_garbage;
        result.duplicates += node_dups;
    }

    // Rain truth, one row per event, window-aligned the same way readings
    // land in windows.
    {
        std::ofstream rain_csv(rain_path);
        if (!rain_csv) raise(Errc::IoFailure, "cannot write " + rain_path);
        rain_csv << "day,start,end\n";
        std::vector<RainEvent> events = sc.rain_events;
        std::stable_sort(events.begin(), events.end(), [](const RainEvent& a, const RainEvent& b) {
            if (a.date == b.date) return a.start_hour < b.start_hour;
            return a.date < b.date;
        });
        for (const auto& e : events) {
            std::int64_t day_start = local_midnight_ms(e.date, sc.utc_offset_minutes);
            auto start = day_start + static_cast<std::int64_t>(std::llround(e.start_hour * 3600.0 * 1000.0));
            auto end = start + static_cast<std::int64_t>(std::llround(e.duration_min * 60.0 * 1000.0));
            rain_csv << format_date(e.date) << ',' << start << ',' << end << "\n";
        }
    }

    {
        std::ofstream summary(summary_path);
        if (!summary) raise(Errc::IoFailure, "cannot write " + summary_path);
        nlohmann::json s;
        s["nodes"] = sc.nodes.size();
        s["days"] = sc.days;
        s["windows_per_node"] = per_node;
        s["lines_emitted"] = result.lines_emitted;
        s["malformed_injected"] = result.malformed_injected;
        s["garbage_tokens"] = result.garbage_tokens;
        s["duplicates"] = result.duplicates;
        s["activity_windows"] = result.activity_windows;
        s["false_alarm_windows"] = result.false_alarm_windows;
        s["rain_events"] = sc.rain_events.size();
        summary << s.dump(2) << "\n";
    }

    result.activity_truth_path = activity_path;
    result.false_alarm_truth_path = fa_path;
    result.rain_truth_path = rain_path;
    result.corruption_truth_path = corruption_path;
    result.summary_path = summary_path;
    return result;
}

} // namespace spaceutil::synth
