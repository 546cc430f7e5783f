#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spaceutil {

// Fixed column order everywhere: M, X, K, L, R, U, B, H.
enum class Sensor : int {
    Motion = 0,
    Noise,
    Temperature,
    Lux,
    Rain,
    Uv,
    Barometer,
    Humidity,
};

inline constexpr int kSensorCount = 8;
inline constexpr int kNoiseBins = 5;
inline constexpr std::array<const char*, kSensorCount> kSensorIds = {
    "M", "X", "K", "L", "R", "U", "B", "H"};

using Histogram = std::array<int, kNoiseBins>;

// One log line split into timestamp, uid and ordered {ID:Value} token pairs.
// No interpretation has been applied yet.
struct RawPacket {
    std::int64_t timestamp_ms = 0;
    std::string node_uid;
    std::vector<std::pair<std::string, std::string>> tokens;
};

// A packet after per-token validation; fields are absent when their token
// was missing or garbage.
struct ValidatedReading {
    std::int64_t timestamp_ms = 0;
    std::string node_uid;

    std::optional<double> motion;     // counts, 0..100
    std::optional<Histogram> noise;   // 5 bins, sum <= 3000
    std::optional<double> temperature; // degC
    std::optional<double> lux;
    std::optional<double> rain;
    std::optional<double> uv;
    std::optional<double> barometer;  // mbar
    std::optional<double> humidity;   // %RH

    bool operator==(const ValidatedReading&) const = default;
};

// Pointer to the numeric field for `s`, or nullptr for Sensor::Noise.
const std::optional<double>* numeric_field(const ValidatedReading& r, Sensor s);
std::optional<double>* numeric_field(ValidatedReading& r, Sensor s);

// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double value);

// Renders a reading in the wire format: epoch_ms,uid,ID:VALUE;ID:VALUE;...
// Absent fields are omitted; histogram bins are comma separated.
std::string to_log_line(const ValidatedReading& r);

} // namespace spaceutil
