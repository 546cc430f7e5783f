#include "spaceutil/local_time.hpp"

#include "spaceutil/error.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

namespace spaceutil {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(const CivilDate& d) {
    return chr::year{d.year} / chr::month{static_cast<unsigned>(d.month)} /
           chr::day{static_cast<unsigned>(d.day)};
}

} // namespace

LocalFields local_fields(std::int64_t epoch_ms, int utc_offset_minutes) {
    const std::int64_t local_ms =
        epoch_ms + static_cast<std::int64_t>(utc_offset_minutes) * 60'000;
    // Floor division so pre-1970 instants stay correct.
    std::int64_t days = local_ms / kDayMs;
    std::int64_t rem = local_ms % kDayMs;
    if (rem < 0) {
        days -= 1;
        rem += kDayMs;
    }

    const chr::sys_days sd{chr::days{days}};
    const chr::year_month_day ymd{sd};
    const chr::weekday wd{sd};

    LocalFields out;
    out.date = CivilDate{int(ymd.year()), int(unsigned(ymd.month())),
                         int(unsigned(ymd.day()))};
    out.dow_mon0 = static_cast<int>(wd.iso_encoding()) - 1;
    out.hour = static_cast<int>(rem / 3'600'000);
    out.minute = static_cast<int>((rem / 60'000) % 60);
    return out;
}

std::int64_t local_midnight_ms(const CivilDate& date, int utc_offset_minutes) {
    const chr::sys_days sd{to_ymd(date)};
    const std::int64_t utc_midnight =
        std::int64_t(sd.time_since_epoch().count()) * kDayMs;
    return utc_midnight - static_cast<std::int64_t>(utc_offset_minutes) * 60'000;
}

bool valid_date(const CivilDate& date) {
    if (date.month < 1 || date.month > 12 || date.day < 1) return false;
    return to_ymd(date).ok();
}

int parse_utc_offset(const std::string& text) {
    if (text == "Z" || text == "z") return 0;
    if (text.size() == 6 && (text[0] == '+' || text[0] == '-') && text[3] == ':') {
        const bool neg = text[0] == '-';
        char* end = nullptr;
        const long hh = std::strtol(text.c_str() + 1, &end, 10);
        if (end != text.c_str() + 3) raise(Errc::InvalidConfig, "bad UTC offset: " + text);
        const long mm = std::strtol(text.c_str() + 4, &end, 10);
        if (end != text.c_str() + 6 || hh > 14 || mm > 59)
            raise(Errc::InvalidConfig, "bad UTC offset: " + text);
        const int total = static_cast<int>(hh * 60 + mm);
        return neg ? -total : total;
    }
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || v < -14 * 60 || v > 14 * 60)
        raise(Errc::InvalidConfig, "bad UTC offset: " + text);
    return static_cast<int>(v);
}

std::string format_utc_offset(int utc_offset_minutes) {
    const char sign = utc_offset_minutes < 0 ? '-' : '+';
    const int mag = utc_offset_minutes < 0 ? -utc_offset_minutes : utc_offset_minutes;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%02d:%02d", sign, mag / 60, mag % 60);
    return buf;
}

CivilDate parse_date(const std::string& text) {
    CivilDate d;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &extra) != 3 ||
        text.size() != 10 || !valid_date(d)) {
        raise(Errc::InvalidSelector, "bad date: " + text);
    }
    return d;
}

std::string format_date(const CivilDate& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
    return buf;
}

} // namespace spaceutil
