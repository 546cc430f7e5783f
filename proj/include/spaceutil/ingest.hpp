#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spaceutil/catalog.hpp"
#include "spaceutil/reading.hpp"

namespace spaceutil::ingest {

// Counters for one ingest run.  Conservation invariants, checked by tests:
//   lines_total  == lines_parsed + lines_malformed + lines_ignored
//   lines_parsed == readings + readings_all_garbage
//   tokens_total == tokens_kept + tokens_dropped
struct IngestStats {
    std::int64_t lines_total = 0;
    std::int64_t lines_parsed = 0;
    std::int64_t lines_malformed = 0;
    std::int64_t lines_ignored = 0;
    std::int64_t readings = 0;
    std::int64_t readings_all_garbage = 0;
    std::int64_t tokens_total = 0;
    std::int64_t tokens_kept = 0;
    std::int64_t tokens_dropped = 0;
    std::map<std::string, std::int64_t> dropped_by_reason;

    bool conserved() const;
};

nlohmann::json stats_json(const IngestStats& stats);

// Splits one log line into timestamp, node uid and raw key:value tokens.
// Returns nullopt for blank/comment lines (counted as ignored) and for
// structurally broken lines (counted as malformed).  No token content is
// inspected here beyond the split itself.
std::optional<RawPacket> parse_packet(std::string_view line, IngestStats& stats);

// Checks every token of a packet against the catalog.  Tokens with unknown
// ids, unparseable values, out-of-range values or repeated ids are dropped
// and counted; surviving tokens populate the reading.  A packet whose tokens
// all fail yields nullopt.
std::optional<ValidatedReading> validate(const RawPacket& packet,
                                         const SensorCatalog& catalog,
                                         IngestStats& stats);

// Drives parse_packet + validate over a whole stream.
std::vector<ValidatedReading> ingest_lines(std::istream& in,
                                           const SensorCatalog& catalog,
                                           IngestStats& stats);

std::vector<ValidatedReading> ingest_file(const std::string& path,
                                          const SensorCatalog& catalog,
                                          IngestStats& stats);

// Partitions readings per node uid; each node's list is sorted by timestamp,
// stable for equal timestamps.
std::map<std::string, std::vector<ValidatedReading>> split_by_node(
    const std::vector<ValidatedReading>& readings);

} // namespace spaceutil::ingest
