#include "spaceutil/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "spaceutil/error.hpp"

namespace spaceutil::ingest {

namespace {

constexpr const char* kUnknownId = "unknown_id";
constexpr const char* kBadValue = "bad_value";
constexpr const char* kOutOfRange = "out_of_range";
constexpr const char* kDuplicateId = "duplicate_id";

bool parse_int64(std::string_view text, std::int64_t& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) return false;
    return std::isfinite(out);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Histogram payload is the bin counts joined by commas, e.g. "12,0,3,0,1".
bool parse_histogram(std::string_view text, Histogram& out, bool& out_of_range,
                     int bin_sum_max) {
    out_of_range = false;
    std::size_t begin = 0;
    int filled = 0;
    long long sum = 0;
    while (true) {
        std::size_t comma = text.find(',', begin);
        std::string_view part = (comma == std::string_view::npos)
                                    ? text.substr(begin)
                                    : text.substr(begin, comma - begin);
        if (filled >= kNoiseBins) return false;
        std::int64_t v = 0;
        if (!parse_int64(part, v)) return false;
        if (v < 0 || v > bin_sum_max) {
            out_of_range = true;
            return false;
        }
        out[static_cast<std::size_t>(filled)] = static_cast<int>(v);
        sum += v;
        ++filled;
        if (comma == std::string_view::npos) break;
        begin = comma + 1;
    }
    if (filled != kNoiseBins) return false;
    if (sum > bin_sum_max) {
        out_of_range = true;
        return false;
    }
    return true;
}

void drop_token(IngestStats& stats, const char* reason) {
    ++stats.tokens_dropped;
    ++stats.dropped_by_reason[reason];
}

} // namespace

bool IngestStats::conserved() const {
    if (lines_total != lines_parsed + lines_malformed + lines_ignored) return false;
    if (lines_parsed != readings + readings_all_garbage) return false;
    std::int64_t by_reason = 0;
    for (const auto& [_, n] : dropped_by_reason) by_reason += n;
    if (tokens_dropped != by_reason) return false;
    return tokens_total == tokens_kept + tokens_dropped;
}

nlohmann::json stats_json(const IngestStats& stats) {
    nlohmann::json j;
    j["lines_total"] = stats.lines_total;
    j["lines_parsed"] = stats.lines_parsed;
    j["lines_malformed"] = stats.lines_malformed;
    j["lines_ignored"] = stats.lines_ignored;
    j["readings"] = stats.readings;
    j["readings_all_garbage"] = stats.readings_all_garbage;
    j["tokens_total"] = stats.tokens_total;
    j["tokens_kept"] = stats.tokens_kept;
    j["tokens_dropped"] = stats.tokens_dropped;
    j["tokens_dropped_by_reason"] = stats.dropped_by_reason;
    j["conserved"] = stats.conserved();
    return j;
}

std::optional<RawPacket> parse_packet(std::string_view line, IngestStats& stats) {
    ++stats.lines_total;
    std::string_view trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') {
        ++stats.lines_ignored;
        return std::nullopt;
    }

    std::size_t c1 = trimmed.find(',');
    if (c1 == std::string_view::npos) {
        ++stats.lines_malformed;
        return std::nullopt;
    }
    std::size_t c2 = trimmed.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
        ++stats.lines_malformed;
        return std::nullopt;
    }

    std::int64_t ts = 0;
    if (!parse_int64(trimmed.substr(0, c1), ts)) {
        ++stats.lines_malformed;
        return std::nullopt;
    }
    std::string_view uid = trimmed.substr(c1 + 1, c2 - c1 - 1);
    if (uid.empty()) {
        ++stats.lines_malformed;
        return std::nullopt;
    }
    std::string_view payload = trimmed.substr(c2 + 1);

    RawPacket packet;
    packet.timestamp_ms = ts;
    packet.node_uid = std::string(uid);
    std::size_t begin = 0;
    while (begin <= payload.size()) {
        std::size_t semi = payload.find(';', begin);
        std::string_view seg = (semi == std::string_view::npos)
                                   ? payload.substr(begin)
                                   : payload.substr(begin, semi - begin);
        if (!seg.empty()) {
            std::size_t colon = seg.find(':');
            if (colon == std::string_view::npos) {
                // Keep the raw segment as an id-only token; validation drops it.
                packet.tokens.emplace_back(std::string(seg), std::string());
            } else {
                packet.tokens.emplace_back(std::string(seg.substr(0, colon)),
                                           std::string(seg.substr(colon + 1)));
            }
        }
        if (semi == std::string_view::npos) break;
        begin = semi + 1;
    }

    ++stats.lines_parsed;
    return packet;
}

std::optional<ValidatedReading> validate(const RawPacket& packet,
                                         const SensorCatalog& catalog,
                                         IngestStats& stats) {
    ValidatedReading reading;
    reading.timestamp_ms = packet.timestamp_ms;
    reading.node_uid = packet.node_uid;
    bool any_kept = false;
    bool seen[kSensorCount] = {};

    for (const auto& [id, value] : packet.tokens) {
        ++stats.tokens_total;
        const CatalogEntry* entry = catalog.find(id);
        if (entry == nullptr) {
            drop_token(stats, kUnknownId);
            continue;
        }
        const auto kind_index = static_cast<std::size_t>(entry->kind);
        if (seen[kind_index]) {
            drop_token(stats, kDuplicateId);
            continue;
        }

        if (entry->kind == Sensor::Noise) {
            Histogram bins{};
            bool range_fail = false;
            if (!parse_histogram(value, bins, range_fail,
                                 catalog.histogram_sum_max())) {
                drop_token(stats, range_fail ? kOutOfRange : kBadValue);
                continue;
            }
            reading.noise = bins;
        } else {
            double v = 0.0;
            if (!parse_double(value, v)) {
                drop_token(stats, kBadValue);
                continue;
            }
            if (v < entry->min || v > entry->max) {
                drop_token(stats, kOutOfRange);
                continue;
            }
            *numeric_field(reading, entry->kind) = v;
        }
        seen[kind_index] = true;
        ++stats.tokens_kept;
        any_kept = true;
    }

    if (!any_kept) {
        ++stats.readings_all_garbage;
        return std::nullopt;
    }
    ++stats.readings;
    return reading;
}

std::vector<ValidatedReading> ingest_lines(std::istream& in,
                                           const SensorCatalog& catalog,
                                           IngestStats& stats) {
    std::vector<ValidatedReading> out;
    std::string line;
    while (std::getline(in, line)) {
        auto packet = parse_packet(line, stats);
        if (!packet) continue;
        auto reading = validate(*packet, catalog, stats);
        if (reading) out.push_back(std::move(*reading));
    }
    return out;
}

std::vector<ValidatedReading> ingest_file(const std::string& path,
                                          const SensorCatalog& catalog,
                                          IngestStats& stats) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open log file: " + path);
    return ingest_lines(in, catalog, stats);
}

std::map<std::string, std::vector<ValidatedReading>> split_by_node(
    const std::vector<ValidatedReading>& readings) {
    std::map<std::string, std::vector<ValidatedReading>> by_node;
    for (const auto& r : readings) by_node[r.node_uid].push_back(r);
    for (auto& [_, list] : by_node)
        std::stable_sort(list.begin(), list.end(),
                         [](const ValidatedReading& a, const ValidatedReading& b) {
                             return a.timestamp_ms < b.timestamp_ms;
                         });
    return by_node;
}

} // namespace spaceutil::ingest
