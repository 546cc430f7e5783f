#include "spaceutil/reading.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace spaceutil {

const std::optional<double>* numeric_field(const ValidatedReading& r, Sensor s) {
    switch (s) {
        case Sensor::Motion: return &r.motion;
        case Sensor::Noise: return nullptr;
        case Sensor::Temperature: return &r.temperature;
        case Sensor::Lux: return &r.lux;
        case Sensor::Rain: return &r.rain;
        case Sensor::Uv: return &r.uv;
        case Sensor::Barometer: return &r.barometer;
        case Sensor::Humidity: return &r.humidity;
    }
    return nullptr;
}

std::optional<double>* numeric_field(ValidatedReading& r, Sensor s) {
    return const_cast<std::optional<double>*>(
        numeric_field(static_cast<const ValidatedReading&>(r), s));
}

std::string format_number(double value) {
    if (std::isfinite(value) && value == std::floor(value) &&
        std::fabs(value) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(value));
        return buf;
    }
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    return buf;
}

std::string to_log_line(const ValidatedReading& r) {
    std::string out;
    char head[48];
    std::snprintf(head, sizeof head, "%lld,", static_cast<long long>(r.timestamp_ms));
    out += head;
    out += r.node_uid;
    out += ',';

    bool first = true;
    auto append = [&](const char* id, const std::string& value) {
        if (!first) out += ';';
        first = false;
        out += id;
        out += ':';
        out += value;
    };

    for (int i = 0; i < kSensorCount; ++i) {
        const auto s = static_cast<Sensor>(i);
        if (s == Sensor::Noise) {
            if (r.noise) {
                std::string v;
                for (int b = 0; b < kNoiseBins; ++b) {
                    if (b) v += ',';
                    v += std::to_string((*r.noise)[b]);
                }
                append(kSensorIds[i], v);
            }
            continue;
        }
        const auto* f = numeric_field(r, s);
        if (f && f->has_value()) append(kSensorIds[i], format_number(**f));
    }
    return out;
}

} // namespace spaceutil
