#include "spaceutil/timeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "spaceutil/error.hpp"

namespace spaceutil::timeline {

namespace {

long long histogram_total(const Histogram& h) {
    long long sum = 0;
    for (int v : h) sum += v;
    return sum;
}

// Snapshot sensors keep the first value of a window, counters keep the
// larger total.  Both count disagreements.
void merge_reading(ValidatedReading& row, const ValidatedReading& r, std::int64_t& conflicts) {
    for (Sensor kind : {Sensor::Temperature, Sensor::Lux, Sensor::Rain, Sensor::Uv,
                        Sensor::Barometer, Sensor::Humidity}) {
        const std::optional<double>* src = numeric_field(r, kind);
        std::optional<double>* dst = numeric_field(row, kind);
        if (!src->has_value()) continue;
        if (!dst->has_value()) {
            *dst = **src;
        } else if (**dst != **src) {
            ++conflicts;
        }
    }
    if (r.motion.has_value()) {
        if (!row.motion.has_value()) {
            row.motion = *r.motion;
        } else {
            ++conflicts;
            if (*r.motion > *row.motion) row.motion = *r.motion;
        }
    }
    if (r.noise.has_value()) {
        if (!row.noise.has_value()) {
            row.noise = *r.noise;
        } else {
            ++conflicts;
            if (histogram_total(*r.noise) > histogram_total(*row.noise)) row.noise = *r.noise;
        }
    }
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace

std::int64_t window_index(std::int64_t timestamp_ms) {
    return floor_div(timestamp_ms, kWindowMs);
}

std::int64_t window_start(std::int64_t timestamp_ms) {
    return window_index(timestamp_ms) * kWindowMs;
}

std::vector<ValidatedReading> deduplicate(const std::vector<ValidatedReading>& readings,
                                          std::int64_t& removed) {
    std::vector<ValidatedReading> out;
    out.reserve(readings.size());
    std::unordered_set<std::string> seen;
    removed = 0;
    for (const auto& r : readings) {
        if (seen.insert(to_log_line(r)).second) {
            out.push_back(r);
        } else {
            ++removed;
        }
    }
    return out;
}

AlignedFrame align_to_windows(const std::string& node_uid,
                              const std::vector<ValidatedReading>& readings) {
    AlignedFrame frame;
    frame.node_uid = node_uid;

    auto deduped = deduplicate(readings, frame.duplicates_removed);
    if (deduped.empty()) return frame;

    std::stable_sort(deduped.begin(), deduped.end(),
                     [](const ValidatedReading& a, const ValidatedReading& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });

    std::map<std::int64_t, ValidatedReading> by_window;
    for (const auto& r : deduped) {
        std::int64_t w = window_index(r.timestamp_ms);
        auto [it, inserted] = by_window.try_emplace(w);
        if (inserted) {
            it->second.timestamp_ms = w * kWindowMs;
            it->second.node_uid = node_uid;
        }
        merge_reading(it->second, r, frame.conflicts);
    }

    std::int64_t first = by_window.begin()->first;
    std::int64_t last = by_window.rbegin()->first;
    frame.rows.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t w = first; w <= last; ++w) {
        auto it = by_window.find(w);
        if (it != by_window.end()) {
            frame.rows.push_back(std::move(it->second));
        } else {
            ValidatedReading gap;
            gap.timestamp_ms = w * kWindowMs;
            gap.node_uid = node_uid;
            frame.rows.push_back(std::move(gap));
        }
    }
    return frame;
}

bool selector_matches(const std::string& selector, const CivilDate& date, int dow_mon0) {
    if (selector == "all") return true;
    if (selector == "weekday") return dow_mon0 <= 4;
    if (selector == "weekend") return dow_mon0 >= 5;
    std::size_t dots = selector.find("..");
    if (dots != std::string::npos) {
        CivilDate lo = parse_date(selector.substr(0, dots));
        CivilDate hi = parse_date(selector.substr(dots + 2));
        if (hi < lo) raise(Errc::InvalidSelector, "empty date range: " + selector);
        return lo <= date && date <= hi;
    }
    return parse_date(selector) == date;
}

AlignedFrame filter_temporal(const AlignedFrame& frame, const std::string& selector,
                             int utc_offset_minutes) {
    // Validate eagerly so a bad selector fails on an empty frame too.
    selector_matches(selector, CivilDate{2000, 1, 1}, 0);

    AlignedFrame out;
    out.node_uid = frame.node_uid;
    out.duplicates_removed = frame.duplicates_removed;
    out.conflicts = frame.conflicts;
    for (const auto& row : frame.rows) {
        LocalFields lf = local_fields(row.timestamp_ms, utc_offset_minutes);
        if (selector_matches(selector, lf.date, lf.dow_mon0)) out.rows.push_back(row);
    }
    return out;
}

std::vector<ValidatedReading> frame_to_readings(const AlignedFrame& frame) {
    return frame.rows;
}

namespace {

std::string histogram_cell(const Histogram& h) {
    std::string s;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i > 0) s += '|';
        s += std::to_string(h[i]);
    }
    return s;
}

std::optional<Histogram> parse_histogram_cell(const std::string& cell) {
    Histogram h{};
    std::size_t begin = 0;
    int filled = 0;
    while (begin <= cell.size()) {
        std::size_t bar = cell.find('|', begin);
        std::string part = (bar == std::string::npos) ? cell.substr(begin)
                                                      : cell.substr(begin, bar - begin);
        if (filled >= kNoiseBins) return std::nullopt;
        int v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size() || v < 0) return std::nullopt;
        h[static_cast<std::size_t>(filled++)] = v;
        if (bar == std::string::npos) break;
        begin = bar + 1;
    }
    if (filled != kNoiseBins) return std::nullopt;
    return h;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t begin = 0;
    while (true) {
        std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(begin));
            break;
        }
        cells.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
        cells.back().pop_back();
    return cells;
}

constexpr const char* kFrameHeader = "window_start,M,X,K,L,R,U,B,H";

} // namespace

void write_frame_csv(const AlignedFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write frame: " + path);
    out << "# node=" << frame.node_uid << " duplicates_removed=" << frame.duplicates_removed
        << " conflicts=" << frame.conflicts << "\n";
    out << kFrameHeader << "\n";
    for (const auto& row : frame.rows) {
        out << row.timestamp_ms;
        out << ',' << (row.motion ? format_number(*row.motion) : "");
        out << ',' << (row.noise ? histogram_cell(*row.noise) : "");
        for (Sensor kind : {Sensor::Temperature, Sensor::Lux, Sensor::Rain, Sensor::Uv,
                            Sensor::Barometer, Sensor::Humidity}) {
            const std::optional<double>* v = numeric_field(row, kind);
            out << ',' << (v->has_value() ? format_number(**v) : "");
        }
        out << "\n";
    }
    if (!out) raise(Errc::IoFailure, "short write: " + path);
}

AlignedFrame read_frame_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open frame: " + path);

    AlignedFrame frame;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# node=", 0) != 0)
        raise(Errc::MalformedLine, "missing frame preamble: " + path);
    {
        std::string meta = line.substr(7);
        std::stringstream ss(meta);
        ss >> frame.node_uid;
        std::string kv;
        while (ss >> kv) {
            std::size_t eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string key = kv.substr(0, eq);
            long long value = std::atoll(kv.c_str() + eq + 1);
            if (key == "duplicates_removed") frame.duplicates_removed = value;
            if (key == "conflicts") frame.conflicts = value;
        }
    }
    if (!std::getline(in, line) || split_csv_row(line) != split_csv_row(kFrameHeader))
        raise(Errc::MalformedLine, "bad frame header: " + path);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_row(line);
        if (cells.size() != 9) raise(Errc::MalformedLine, "bad frame row: " + line);
        ValidatedReading row;
        row.node_uid = frame.node_uid;
        try {
            row.timestamp_ms = std::stoll(cells[0]);
        } catch (const std::exception&) {
            raise(Errc::MalformedLine, "bad window start: " + cells[0]);
        }
        auto numeric = [&](const std::string& cell) -> std::optional<double> {
            if (cell.empty()) return std::nullopt;
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                if (pos != cell.size()) raise(Errc::MalformedLine, "bad cell: " + cell);
                return v;
            } catch (const Error&) {
                throw;
            } catch (const std::exception&) {
                raise(Errc::MalformedLine, "bad cell: " + cell);
            }
        };
        row.motion = numeric(cells[1]);
        if (!cells[2].empty()) {
            auto h = parse_histogram_cell(cells[2]);
            if (!h) raise(Errc::MalformedLine, "bad histogram cell: " + cells[2]);
            row.noise = h;
        }
        row.temperature = numeric(cells[3]);
        row.lux = numeric(cells[4]);
        row.rain = numeric(cells[5]);
        row.uv = numeric(cells[6]);
        row.barometer = numeric(cells[7]);
        row.humidity = numeric(cells[8]);
        frame.rows.push_back(std::move(row));
    }
    return frame;
}

nlohmann::json frame_manifest(const AlignedFrame& frame) {
    nlohmann::json j;
    j["node"] = frame.node_uid;
    j["rows"] = frame.rows.size();
    std::int64_t with_data = 0;
    for (const auto& r : frame.rows) {
        bool any = r.motion || r.noise;
        for (Sensor kind : {Sensor::Temperature, Sensor::Lux, Sensor::Rain, Sensor::Uv,
                            Sensor::Barometer, Sensor::Humidity})
            any = any || numeric_field(r, kind)->has_value();
        if (any) ++with_data;
    }
    j["rows_with_data"] = with_data;
    j["window_ms"] = kWindowMs;
    if (!frame.rows.empty()) {
        j["start_ms"] = frame.rows.front().timestamp_ms;
        j["end_ms"] = frame.rows.back().timestamp_ms + kWindowMs;
    }
    j["duplicates_removed"] = frame.duplicates_removed;
    j["conflicts"] = frame.conflicts;
    return j;
}

} // namespace spaceutil::timeline
