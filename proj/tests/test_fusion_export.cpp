#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spaceutil/error.hpp"
#include "spaceutil/export.hpp"
#include "spaceutil/fusion.hpp"

using namespace spaceutil;
using fusion::WeatherFilter;

namespace {

constexpr std::int64_t kMonday = 1470009600000;  // 2016-08-01 00:00 UTC, a Monday
constexpr std::int64_t kWindowMs = 300000;

std::int64_t ws(int i) { return kMonday + i * kWindowMs; }

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fusion::UtilizationSeries fortnight_series(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    fusion::UtilizationSeries series;
    series.node_uid = "n1";
    for (int i = 0; i < 14 * 288; ++i) {
        fusion::SeriesPoint pt;
        pt.window_start_ms = ws(i);
        pt.eta = u(rng);
        pt.eta_m = pt.eta;
        pt.weather = (i % 288 >= 100 && i % 288 < 140 && i / 288 % 3 == 0) ? "rain" : "dry";
        series.points.push_back(pt);
    }
    return series;
}

} // namespace

TEST_CASE("fuse keeps the busier channel") {
    CHECK(fusion::fuse(0.3, 0) == 0.3);
    CHECK(fusion::fuse(0.3, 1) == 1.0);
    CHECK(fusion::fuse(0.0, 0) == 0.0);
    CHECK(fusion::fuse(1.0, 1) == 1.0);
}

TEST_CASE("fuse_series joins channels on window starts") {
    motion::MotionSeries ms;
    ms.node_uid = "n1";
    for (auto [i, eta] : {std::pair{0, 0.4}, {1, 0.1}, {2, 0.0}, {3, 0.6}}) {
        motion::MotionPoint pt;
        pt.window_start_ms = ws(i);
        pt.eta = eta;
        ms.points.push_back(pt);
    }
    std::vector<std::int64_t> sound_windows{ws(1), ws(2), ws(4)};
    std::vector<int> eta_n{1, 0, 1};
    std::vector<sound::RainInterval> rain{{ws(2), ws(4)}};

    auto series = fusion::fuse_series(ms, sound_windows, eta_n, rain);
    CHECK(series.node_uid == "n1");
    REQUIRE(series.points.size() == 5);
    CHECK(series.missing_sound == 2);  // windows 0 and 3
    CHECK(series.missing_motion == 1); // window 4

    CHECK(series.points[0].window_start_ms == ws(0));
    CHECK(series.points[0].eta == 0.4);
    CHECK(series.points[0].eta_n == 0);
    CHECK(series.points[0].weather == "dry");

    CHECK(series.points[1].eta == 1.0);
    CHECK(series.points[2].eta == 0.0);
    CHECK(series.points[2].weather == "rain");
    CHECK(series.points[3].eta == 0.6);
    CHECK(series.points[3].weather == "rain");  // interval end is exclusive
    CHECK(series.points[4].eta == 1.0);
    CHECK(series.points[4].eta_m == 0.0);
    CHECK(series.points[4].weather == "dry");
}

TEST_CASE("heatmap cells follow local day-of-week and hour") {
    fusion::UtilizationSeries series;
    series.node_uid = "n1";
    fusion::SeriesPoint pt;
    pt.window_start_ms = kMonday;
    pt.eta = 0.5;
    pt.weather = "dry";
    series.points.push_back(pt);

    auto utc = fusion::aggregate_heatmap(series, "all", 0);
    CHECK(utc.count[0][0] == 1);
    CHECK(utc.mean[0][0] == 0.5);

    auto east = fusion::aggregate_heatmap(series, "all", 480);
    CHECK(east.count[0][8] == 1);  // Monday 08:00 local

    auto west = fusion::aggregate_heatmap(series, "all", -60);
    CHECK(west.count[6][23] == 1);  // Sunday 23:00 local
}

TEST_CASE("heatmap conserves the series mean and its counts") {
    auto series = fortnight_series(71);
    auto all = fusion::aggregate_heatmap(series, "all", 0);

    double weighted = 0.0;
    std::int64_t total = 0;
    for (int d = 0; d < 7; ++d)
        for (int h = 0; h < 24; ++h) {
            weighted += all.mean[d][h] * static_cast<double>(all.count[d][h]);
            total += all.count[d][h];
        }
    double series_mean = 0.0;
    for (const auto& pt : series.points) series_mean += pt.eta;
    series_mean /= static_cast<double>(series.points.size());

    CHECK(total == static_cast<std::int64_t>(series.points.size()));
    CHECK(weighted / static_cast<double>(total) == doctest::Approx(series_mean).epsilon(1e-9));

    SUBCASE("weekday and weekend counts partition the total") {
        auto weekday = fusion::aggregate_heatmap(series, "weekday", 0);
        auto weekend = fusion::aggregate_heatmap(series, "weekend", 0);
        for (int d = 0; d < 7; ++d)
            for (int h = 0; h < 24; ++h)
                CHECK(weekday.count[d][h] + weekend.count[d][h] == all.count[d][h]);
    }

    SUBCASE("rain and dry counts partition the total") {
        auto rain = fusion::aggregate_heatmap(series, "all", 0, WeatherFilter::Rain);
        auto dry = fusion::aggregate_heatmap(series, "all", 0, WeatherFilter::Dry);
        for (int d = 0; d < 7; ++d)
            for (int h = 0; h < 24; ++h)
                CHECK(rain.count[d][h] + dry.count[d][h] == all.count[d][h]);
    }

    SUBCASE("date range selector narrows the counts") {
        auto day = fusion::aggregate_heatmap(series, "2016-08-02", 0);
        std::int64_t n = 0;
        for (int d = 0; d < 7; ++d)
            for (int h = 0; h < 24; ++h) n += day.count[d][h];
        CHECK(n == 288);
        for (int h = 0; h < 24; ++h) CHECK(day.count[0][h] == 0);  // nothing on Monday
    }
}

TEST_CASE("empty selections raise instead of writing blank maps") {
    auto series = fortnight_series(72);
    CHECK_THROWS_AS(fusion::aggregate_heatmap(series, "2017-01-01", 0), Error);

    fusion::UtilizationSeries monday;
    monday.node_uid = "n1";
    fusion::SeriesPoint pt;
    pt.window_start_ms = kMonday;
    pt.eta = 1.0;
    pt.weather = "dry";
    monday.points.push_back(pt);
    CHECK_THROWS_AS(fusion::aggregate_heatmap(monday, "weekend", 0), Error);
    CHECK_THROWS_AS(fusion::aggregate_heatmap(monday, "all", 0, WeatherFilter::Rain), Error);
    CHECK_THROWS_AS(fusion::weather_filter_from_name("drizzle"), Error);
}

TEST_CASE("fixed6 pins the exported number format") {
    CHECK(exporter::fixed6(0.0) == "0.000000");
    CHECK(exporter::fixed6(1.0) == "1.000000");
    CHECK(exporter::fixed6(0.5) == "0.500000");
    CHECK(exporter::fixed6(1.0 / 3.0) == "0.333333");
}

TEST_CASE("motion json round-trips") {
    motion::MotionSeries series;
    series.node_uid = "n3";
    series.windows_without_motion = 7;
    for (int i = 0; i < 4; ++i) {
        motion::MotionPoint pt;
        pt.window_start_ms = ws(i);
        pt.raw = 10.0 + i;
        pt.p = 0.25;
        pt.d = 1.5;
        pt.rescaled = 9.375;
        pt.eta = 0.9375;
        series.points.push_back(pt);
    }
    auto path = std::filesystem::temp_directory_path() / "spaceutil_motion_test.json";
    exporter::write_motion_json(series, path.string());
    auto back = exporter::read_motion_json(path.string());
    CHECK(back.node_uid == "n3");
    CHECK(back.windows_without_motion == 7);
    REQUIRE(back.points.size() == 4);
    CHECK(back.points[2].window_start_ms == ws(2));
    CHECK(back.points[2].raw == 12.0);
    CHECK(back.points[2].p == 0.25);
    CHECK(back.points[2].d == 1.5);
    CHECK(back.points[2].rescaled == 9.375);
    CHECK(back.points[2].eta == 0.9375);
    std::filesystem::remove(path);
}

TEST_CASE("sound json round-trips") {
    exporter::SoundOutput out;
    out.node_uid = "n2";
    out.beta = 8.75;
    for (int i = 0; i < 3; ++i) {
        exporter::SoundWindowRecord rec;
        rec.window = ws(i);
        rec.date = CivilDate{2016, 8, 1};
        rec.chi2 = 2.5 * i;
        rec.eta_n = i == 2 ? 1 : 0;
        rec.cluster = 1 + i % 2;
        rec.period_id = i / 2;
        out.windows.push_back(rec);
    }
    auto path = std::filesystem::temp_directory_path() / "spaceutil_sound_test.json";
    exporter::write_sound_json(out, path.string());
    auto back = exporter::read_sound_json(path.string());
    CHECK(back.node_uid == "n2");
    CHECK(back.beta == 8.75);
    REQUIRE(back.windows.size() == 3);
    CHECK(back.windows[1].window == ws(1));
    CHECK(back.windows[1].date == CivilDate{2016, 8, 1});
    CHECK(back.windows[1].chi2 == 2.5);
    CHECK(back.windows[2].eta_n == 1);
    CHECK(back.windows[2].cluster == 1);
    CHECK(back.windows[2].period_id == 1);
    std::filesystem::remove(path);
}

TEST_CASE("series json round-trips with weather tags") {
    auto series = fortnight_series(73);
    series.missing_motion = 3;
    series.missing_sound = 9;
    series.points.resize(600);
    auto path = std::filesystem::temp_directory_path() / "spaceutil_series_test.json";
    exporter::write_series_json(series, path.string());
    auto back = exporter::read_series_json(path.string());
    CHECK(back.node_uid == series.node_uid);
    CHECK(back.missing_motion == 3);
    CHECK(back.missing_sound == 9);
    REQUIRE(back.points.size() == series.points.size());
    for (std::size_t i = 0; i < back.points.size(); i += 97) {
        CHECK(back.points[i].window_start_ms == series.points[i].window_start_ms);
        CHECK(back.points[i].eta == doctest::Approx(series.points[i].eta).epsilon(5e-7));
        CHECK(back.points[i].weather == series.points[i].weather);
    }
    std::filesystem::remove(path);
}

TEST_CASE("rain csv round-trips") {
    std::vector<exporter::DatedRainInterval> intervals{
        {CivilDate{2016, 8, 3}, {ws(100), ws(120)}},
        {CivilDate{2016, 8, 6}, {ws(400), ws(428)}},
    };
    auto path = std::filesystem::temp_directory_path() / "spaceutil_rain_test.csv";
    exporter::write_rain_csv(intervals, path.string());
    CHECK(slurp(path).substr(0, 14) == "day,start,end\n");
    auto back = exporter::read_rain_csv(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == CivilDate{2016, 8, 3});
    CHECK(back[0].second.start_ms == ws(100));
    CHECK(back[1].second.end_ms == ws(428));
    std::filesystem::remove(path);
}

TEST_CASE("heatmap csv layout: Mon..Sun rows, blank missing cells") {
    fusion::UtilizationSeries series;
    series.node_uid = "n1";
    fusion::SeriesPoint pt;
    pt.window_start_ms = kMonday;
    pt.eta = 0.5;
    pt.weather = "dry";
    series.points.push_back(pt);
    auto map = fusion::aggregate_heatmap(series, "all", 0);

    auto path = std::filesystem::temp_directory_path() / "spaceutil_heatmap_test.csv";
    exporter::write_heatmap_csv(map, path.string());
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.substr(0, 12) == "dow,h00,h01,");
    CHECK(line.substr(line.size() - 4) == ",h23");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].substr(0, 13) == "Mon,0.500000,");
    CHECK(rows[1].substr(0, 5) == "Tue,,");
    CHECK(rows[6].substr(0, 4) == "Sun,");
    std::filesystem::remove(path);

    auto jpath = std::filesystem::temp_directory_path() / "spaceutil_heatmap_test.json";
    exporter::write_heatmap_json(map, jpath.string());
    auto text = slurp(jpath);
    CHECK(text.find("\"days\": [\"Mon\", \"Tue\", \"Wed\", \"Thu\", \"Fri\", \"Sat\", \"Sun\"]") !=
          std::string::npos);
    CHECK(text.find("null") != std::string::npos);
    CHECK(text.find("0.500000") != std::string::npos);
    std::filesystem::remove(jpath);
}

TEST_CASE("color ramp saturates halfway unless told otherwise") {
    CHECK(exporter::ramp_color(0.0) == "#0000ff");
    CHECK(exporter::ramp_color(0.5) == "#ff0000");
    CHECK(exporter::ramp_color(0.9) == "#ff0000");  // clamped
    CHECK(exporter::ramp_color(0.25) == "#80007f");
    CHECK(exporter::ramp_color(0.5, true) == "#80007f");
    CHECK(exporter::ramp_color(1.0, true) == "#ff0000");
}

TEST_CASE("heatmap svg paints present cells and greys the rest") {
    fusion::UtilizationSeries series;
    series.node_uid = "n1";
    fusion::SeriesPoint pt;
    pt.window_start_ms = kMonday;
    pt.eta = 0.5;
    pt.weather = "dry";
    series.points.push_back(pt);
    auto map = fusion::aggregate_heatmap(series, "all", 0);

    auto path = std::filesystem::temp_directory_path() / "spaceutil_heatmap_test.svg";
    exporter::write_heatmap_svg(map, path.string());
    auto text = slurp(path);
    CHECK(text.find("<svg") == 0);
    CHECK(text.find("#ff0000") != std::string::npos);   // the one hot cell
    CHECK(text.find("#cccccc") != std::string::npos);   // everything else
    CHECK(text.find("<title>0.500000</title>") != std::string::npos);
    std::filesystem::remove(path);
}
