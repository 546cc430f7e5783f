#pragma once

#include "spaceutil/reading.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

namespace spaceutil {

// The five histogram bin labels, ascending level ranges.
inline constexpr std::array<const char*, kNoiseBins> kNoiseBinLabels = {
    "0-6", "6-10", "10-20", "20-50", ">50"};

struct CatalogEntry {
    Sensor kind = Sensor::Motion;
    double min = 0;
    double max = 0;
    std::string units;
};

// The per-deployment sensor table: id token -> kind and admissible range.
class SensorCatalog {
public:
    static SensorCatalog defaults();
    static SensorCatalog from_json(const nlohmann::json& j);
    static SensorCatalog from_file(const std::filesystem::path& path);

    nlohmann::json to_json() const;

    // Enforces the catalog invariants: exactly the eight known sensors,
    // min < max everywhere, canonical noise bins. Throws Errc::InvalidConfig.
    void check() const;

    const CatalogEntry* find(const std::string& id) const;
    const std::map<std::string, CatalogEntry>& entries() const { return entries_; }
    int histogram_sum_max() const { return histogram_sum_max_; }

private:
    std::map<std::string, CatalogEntry> entries_;
    int histogram_sum_max_ = 3000;
};

} // namespace spaceutil
