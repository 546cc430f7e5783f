#include "spaceutil/catalog.hpp"

#include "spaceutil/error.hpp"

#include <fstream>

namespace spaceutil {

namespace {

const std::map<std::string, Sensor>& kind_names() {
    static const std::map<std::string, Sensor> m = {
        {"motion", Sensor::Motion},       {"noise", Sensor::Noise},
        {"temperature", Sensor::Temperature}, {"lux", Sensor::Lux},
        {"rain", Sensor::Rain},           {"uv", Sensor::Uv},
        {"barometer", Sensor::Barometer}, {"humidity", Sensor::Humidity},
    };
    return m;
}

const char* kind_name(Sensor s) {
    for (const auto& [name, kind] : kind_names())
        if (kind == s) return name.c_str();
    return "?";
}

} // namespace

SensorCatalog SensorCatalog::defaults() {
    SensorCatalog c;
    c.entries_ = {
        {"M", {Sensor::Motion, 0, 100, "count"}},
        {"X", {Sensor::Noise, 0, 3000, "count"}},
        {"K", {Sensor::Temperature, -10, 80, "degC"}},
        {"L", {Sensor::Lux, 0.1, 40000, "lux"}},
        {"R", {Sensor::Rain, 0, 1024, "adc"}},
        {"U", {Sensor::Uv, 0, 1024, "adc"}},
        {"B", {Sensor::Barometer, 300, 1200, "mbar"}},
        {"H", {Sensor::Humidity, 0, 100, "percent_rh"}},
    };
    c.histogram_sum_max_ = 3000;
    return c;
}

SensorCatalog SensorCatalog::from_json(const nlohmann::json& j) {
    SensorCatalog c;
    if (!j.is_object() || !j.contains("sensors") || !j["sensors"].is_object())
        raise(Errc::InvalidConfig, "catalog: missing sensors object");

    for (const auto& [id, e] : j["sensors"].items()) {
        CatalogEntry entry;
        const std::string kind = e.value("kind", "");
        auto it = kind_names().find(kind);
        if (it == kind_names().end())
            raise(Errc::InvalidConfig, "catalog: unknown kind for " + id);
        entry.kind = it->second;
        if (!e.contains("min") || !e.contains("max"))
            raise(Errc::InvalidConfig, "catalog: missing range for " + id);
        entry.min = e["min"].get<double>();
        entry.max = e["max"].get<double>();
        entry.units = e.value("units", "");
        if (entry.kind == Sensor::Noise) {
            if (!e.contains("bins") || !e["bins"].is_array())
                raise(Errc::InvalidConfig, "catalog: noise entry needs bins");
            const auto& bins = e["bins"];
            if (bins.size() != kNoiseBins)
                raise(Errc::InvalidConfig, "catalog: noise needs 5 bins");
            for (int i = 0; i < kNoiseBins; ++i)
                if (bins[i].get<std::string>() != kNoiseBinLabels[i])
                    raise(Errc::InvalidConfig, "catalog: noise bin " +
                                                   std::to_string(i) + " must be " +
                                                   kNoiseBinLabels[i]);
            c.histogram_sum_max_ = e.value("bin_sum_max", 3000);
        }
        c.entries_[id] = entry;
    }
    c.check();
    return c;
}

SensorCatalog SensorCatalog::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open catalog: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, "catalog parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json SensorCatalog::to_json() const {
    nlohmann::json sensors = nlohmann::json::object();
    for (const auto& [id, e] : entries_) {
        nlohmann::json je = {
            {"kind", kind_name(e.kind)},
            {"min", e.min},
            {"max", e.max},
            {"units", e.units},
        };
        if (e.kind == Sensor::Noise) {
            je["bins"] = kNoiseBinLabels;
            je["bin_sum_max"] = histogram_sum_max_;
        }
        sensors[id] = std::move(je);
    }
    return {{"sensors", sensors}};
}

void SensorCatalog::check() const {
    if (entries_.size() != kSensorCount)
        raise(Errc::InvalidConfig, "catalog must declare exactly 8 sensors");
    std::array<int, kSensorCount> seen{};
    for (const auto& [id, e] : entries_) {
        if (!(e.min < e.max))
            raise(Errc::InvalidConfig, "catalog: min >= max for " + id);
        seen[static_cast<int>(e.kind)] += 1;
    }
    for (int i = 0; i < kSensorCount; ++i)
        if (seen[i] != 1)
            raise(Errc::InvalidConfig,
                  std::string("catalog must declare one ") +
                      kind_name(static_cast<Sensor>(i)) + " sensor");
    if (histogram_sum_max_ <= 0)
        raise(Errc::InvalidConfig, "catalog: bin_sum_max must be positive");
}

const CatalogEntry* SensorCatalog::find(const std::string& id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
}

} // namespace spaceutil
