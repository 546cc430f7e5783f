#pragma once

#include <cstdint>
#include <compare>
#include <string>

namespace spaceutil {

// One reading window is 5 minutes; all timestamps are UTC epoch milliseconds.
inline constexpr std::int64_t kWindowMs = 300'000;
inline constexpr int kWindowsPerDay = 288;
inline constexpr std::int64_t kDayMs = 86'400'000;

// Deployment default: Singapore, UTC+08:00.
inline constexpr int kDefaultUtcOffsetMinutes = 480;

struct CivilDate {
    int year = 0;
    int month = 0; // 1..12
    int day = 0;   // 1..31

    auto operator<=>(const CivilDate&) const = default;
};

struct LocalFields {
    CivilDate date;
    int dow_mon0 = 0; // Monday = 0 .. Sunday = 6
    int hour = 0;     // 0..23
    int minute = 0;   // 0..59
};

LocalFields local_fields(std::int64_t epoch_ms, int utc_offset_minutes);

// Epoch ms of local midnight for the given civil date under the offset.
std::int64_t local_midnight_ms(const CivilDate& date, int utc_offset_minutes);

bool valid_date(const CivilDate& date);

// Accepts "+08:00", "-05:30", "Z", or a plain signed minute count ("480").
// Throws Errc::InvalidConfig on anything else.
int parse_utc_offset(const std::string& text);
std::string format_utc_offset(int utc_offset_minutes);

// "YYYY-MM-DD"; throws Errc::InvalidSelector on bad syntax or calendar values.
CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& date);

} // namespace spaceutil
