#include "spaceutil/export.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "spaceutil/error.hpp"

namespace spaceutil::exporter {

namespace {

constexpr const char* kDayNames[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write: " + path);
    return out;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, "bad json in " + path + ": " + e.what());
    }
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) raise(Errc::IoFailure, "short write: " + path);
}

} // namespace

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_motion_json(const motion::MotionSeries& series, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "{\n";
    out << "  \"node\": \"" << series.node_uid << "\",\n";
    out << "  \"windows_without_motion\": " << series.windows_without_motion << ",\n";
    out << "  \"points\": [";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& pt = series.points[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "    {\"window\": " << pt.window_start_ms << ", \"raw\": " << fixed6(pt.raw)
            << ", \"p\": " << fixed6(pt.p) << ", \"d\": " << fixed6(pt.d)
            << ", \"rescaled\": " << fixed6(pt.rescaled) << ", \"eta_M\": " << fixed6(pt.eta)
            << "}";
    }
    out << "\n  ]\n}\n";
    finish(out, path);
}

motion::MotionSeries read_motion_json(const std::string& path) {
    nlohmann::json j = load_json(path);
    motion::MotionSeries series;
    try {
        series.node_uid = j.at("node").get<std::string>();
        series.windows_without_motion = j.at("windows_without_motion").get<std::int64_t>();
        for (const auto& rec : j.at("points")) {
            motion::MotionPoint pt;
            pt.window_start_ms = rec.at("window").get<std::int64_t>();
            pt.raw = rec.at("raw").get<double>();
            pt.p = rec.at("p").get<double>();
            pt.d = rec.at("d").get<double>();
            pt.rescaled = rec.at("rescaled").get<double>();
            pt.eta = rec.at("eta_M").get<double>();
            series.points.push_back(pt);
        }
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, "bad motion series in " + path + ": " + e.what());
    }
    return series;
}

void write_sound_json(const SoundOutput& sound_out, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "{\n";
    out << "  \"node\": \"" << sound_out.node_uid << "\",\n";
    out << "  \"beta\": " << fixed6(sound_out.beta) << ",\n";
    out << "  \"windows\": [";
    for (std::size_t i = 0; i < sound_out.windows.size(); ++i) {
        const auto& w = sound_out.windows[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "    {\"window\": " << w.window << ", \"date\": \"" << format_date(w.date)
            << "\", \"chi2\": " << fixed6(w.chi2) << ", \"eta_N\": " << w.eta_n
            << ", \"cluster\": " << w.cluster << ", \"period_id\": " << w.period_id << "}";
    }
    out << "\n  ]\n}\n";
    finish(out, path);
}

SoundOutput read_sound_json(const std::string& path) {
    nlohmann::json j = load_json(path);
    SoundOutput sound_out;
    try {
        sound_out.node_uid = j.at("node").get<std::string>();
        sound_out.beta = j.at("beta").get<double>();
        for (const auto& rec : j.at("windows")) {
            SoundWindowRecord w;
            w.window = rec.at("window").get<std::int64_t>();
            w.date = parse_date(rec.at("date").get<std::string>());
            w.chi2 = rec.at("chi2").get<double>();
            w.eta_n = rec.at("eta_N").get<int>();
            w.cluster = rec.at("cluster").get<int>();
            w.period_id = rec.at("period_id").get<int>();
            sound_out.windows.push_back(w);
        }
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, "bad sound output in " + path + ": " + e.what());
    }
    return sound_out;
}

void write_series_json(const fusion::UtilizationSeries& series, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "{\n";
    out << "  \"node\": \"" << series.node_uid << "\",\n";
    out << "  \"missing_motion\": " << series.missing_motion << ",\n";
    out << "  \"missing_sound\": " << series.missing_sound << ",\n";
    out << "  \"points\": [";
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& pt = series.points[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "    {\"window\": " << pt.window_start_ms << ", \"eta_M\": " << fixed6(pt.eta_m)
            << ", \"eta_N\": " << pt.eta_n << ", \"eta\": " << fixed6(pt.eta)
            << ", \"weather\": \"" << pt.weather << "\"}";
    }
    out << "\n  ]\n}\n";
    finish(out, path);
}

fusion::UtilizationSeries read_series_json(const std::string& path) {
    nlohmann::json j = load_json(path);
    fusion::UtilizationSeries series;
    try {
        series.node_uid = j.at("node").get<std::string>();
        series.missing_motion = j.at("missing_motion").get<std::int64_t>();
        series.missing_sound = j.at("missing_sound").get<std::int64_t>();
        for (const auto& rec : j.at("points")) {
            fusion::SeriesPoint pt;
            pt.window_start_ms = rec.at("window").get<std::int64_t>();
            pt.eta_m = rec.at("eta_M").get<double>();
            pt.eta_n = rec.at("eta_N").get<int>();
            pt.eta = rec.at("eta").get<double>();
            pt.weather = rec.at("weather").get<std::string>();
            series.points.push_back(std::move(pt));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, "bad utilization series in " + path + ": " + e.what());
    }
    return series;
}

void write_heatmap_csv(const fusion::Heatmap& map, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "dow";
    for (int h = 0; h < 24; ++h) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), ",h%02d", h);
        out << buf;
    }
    out << "\n";
    for (int d = 0; d < 7; ++d) {
        out << kDayNames[d];
        for (int h = 0; h < 24; ++h) {
            out << ',';
            if (map.present(d, h))
                out << fixed6(map.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)]);
        }
        out << "\n";
    }
    finish(out, path);
}

void write_heatmap_json(const fusion::Heatmap& map, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "{\n  \"selector\": \"" << map.selector << "\",\n  \"days\": [";
    for (int d = 0; d < 7; ++d) out << (d ? ", " : "") << '"' << kDayNames[d] << '"';
    out << "],\n  \"mean\": [\n";
    for (int d = 0; d < 7; ++d) {
        out << "    [";
        for (int h = 0; h < 24; ++h) {
            out << (h ? ", " : "");
            if (map.present(d, h))
                out << fixed6(map.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)]);
            else
                out << "null";
        }
        out << (d < 6 ? "],\n" : "]\n");
    }
    out << "  ],\n  \"count\": [\n";
    for (int d = 0; d < 7; ++d) {
        out << "    [";
        for (int h = 0; h < 24; ++h)
            out << (h ? ", " : "")
                << map.count[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)];
        out << (d < 6 ? "],\n" : "]\n");
    }
    out << "  ]\n}\n";
    finish(out, path);
}

std::string ramp_color(double eta, bool full_range) {
    double cap = full_range ? 1.0 : 0.5;
    double t = eta / cap;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    int r = static_cast<int>(t * 255.0 + 0.5);
    int b = 255 - r;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x00%02x", r, b);
    return buf;
}

void write_heatmap_svg(const fusion::Heatmap& map, const std::string& path, bool full_range) {
    constexpr int kCell = 28;
    constexpr int kLeft = 52;
    constexpr int kTop = 24;
    const int width = kLeft + 24 * kCell + 8;
    const int height = kTop + 7 * kCell + 8;

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int h = 0; h < 24; ++h) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%02d", h);
        out << "  <text x=\"" << kLeft + h * kCell + kCell / 2 << "\" y=\"" << kTop - 8
            << "\" text-anchor=\"middle\">" << buf << "</text>\n";
    }
    for (int d = 0; d < 7; ++d) {
        out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << kTop + d * kCell + kCell / 2 + 4
            << "\" text-anchor=\"end\">" << kDayNames[d] << "</text>\n";
        for (int h = 0; h < 24; ++h) {
            std::string color =
                map.present(d, h)
                    ? ramp_color(
                          map.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)],
                          full_range)
                    : "#cccccc";
            out << "  <rect x=\"" << kLeft + h * kCell << "\" y=\"" << kTop + d * kCell
                << "\" width=\"" << kCell - 1 << "\" height=\"" << kCell - 1 << "\" fill=\""
                << color << "\"";
            if (map.present(d, h))
                out << "><title>"
                    << fixed6(map.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)])
                    << "</title></rect>\n";
            else
                out << "/>\n";
        }
    }
    out << "</svg>\n";
    finish(out, path);
}

void write_rain_csv(const std::vector<DatedRainInterval>& intervals, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "day,start,end\n";
    for (const auto& [date, interval] : intervals)
        out << format_date(date) << ',' << interval.start_ms << ',' << interval.end_ms << "\n";
    finish(out, path);
}

std::vector<DatedRainInterval> read_rain_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open: " + path);
    std::vector<DatedRainInterval> intervals;
    std::string line;
    if (!std::getline(in, line) || line.rfind("day,start,end", 0) != 0)
        raise(Errc::MalformedLine, "bad rain csv header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) raise(Errc::MalformedLine, "bad rain csv row: " + line);
        DatedRainInterval rec;
        rec.first = parse_date(line.substr(0, c1));
        try {
            rec.second.start_ms = std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
            rec.second.end_ms = std::stoll(line.substr(c2 + 1));
        } catch (const std::exception&) {
            raise(Errc::MalformedLine, "bad rain csv row: " + line);
        }
        intervals.push_back(rec);
    }
    return intervals;
}

} // namespace spaceutil::exporter
