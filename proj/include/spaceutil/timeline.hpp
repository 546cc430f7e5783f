#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spaceutil/local_time.hpp"
#include "spaceutil/reading.hpp"

namespace spaceutil::timeline {

// One node's readings folded onto the fixed 5-minute grid.  Row timestamps
// are window starts; the rows cover every window between the first and last
// observation, with gaps kept as all-missing rows.
struct AlignedFrame {
    std::string node_uid;
    std::vector<ValidatedReading> rows;
    std::int64_t duplicates_removed = 0;
    std::int64_t conflicts = 0;
};

std::int64_t window_index(std::int64_t timestamp_ms);
std::int64_t window_start(std::int64_t timestamp_ms);

// Removes byte-identical repeat readings, keeping the first occurrence.
std::vector<ValidatedReading> deduplicate(const std::vector<ValidatedReading>& readings,
                                          std::int64_t& removed);

// Folds one node's readings onto the window grid.  Snapshot sensors
// (K, L, R, U, B, H) keep the first value seen in a window; a later packet
// disagreeing on one counts a conflict.  Counter-style sensors (M, X) keep
// the larger total, so partial packets lose to full retransmits; every extra
// present value counts a conflict.
AlignedFrame align_to_windows(const std::string& node_uid,
                              const std::vector<ValidatedReading>& readings);

// Selector grammar: "all", "weekday", "weekend", "YYYY-MM-DD" or
// "YYYY-MM-DD..YYYY-MM-DD" (inclusive).  Dates are evaluated in local time.
// Rows of the result are no longer contiguous.  Throws InvalidSelector.
AlignedFrame filter_temporal(const AlignedFrame& frame, const std::string& selector,
                             int utc_offset_minutes);

bool selector_matches(const std::string& selector, const CivilDate& date, int dow_mon0);

std::vector<ValidatedReading> frame_to_readings(const AlignedFrame& frame);

// CSV layout: a "# node=<uid>" comment line, then a header row
// "window_start,M,X,K,L,R,U,B,H".  Histogram cells join the five bins with
// '|'; missing values are empty cells.
void write_frame_csv(const AlignedFrame& frame, const std::string& path);
AlignedFrame read_frame_csv(const std::string& path);

nlohmann::json frame_manifest(const AlignedFrame& frame);

} // namespace spaceutil::timeline
