// Acceptance gate: one PASS/FAIL line per release criterion, exit code is
// the number of failures.  Tolerances are pinned here and nowhere else.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "oracle_helpers.hpp"
#include "spaceutil/catalog.hpp"
#include "spaceutil/error.hpp"
#include "spaceutil/export.hpp"
#include "spaceutil/fusion.hpp"
#include "spaceutil/haar.hpp"
#include "spaceutil/hcluster.hpp"
#include "spaceutil/ingest.hpp"
#include "spaceutil/local_time.hpp"
#include "spaceutil/motion_calib.hpp"
#include "spaceutil/pca.hpp"
#include "spaceutil/pipeline.hpp"
#include "spaceutil/sound_pipeline.hpp"
#include "spaceutil/synthgen.hpp"
#include "spaceutil/timeline.hpp"

using namespace spaceutil;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------- shared ---

// The tuned month scenario run once through the real file-based chain; most
// deployment-level criteria read from here.
struct MonthRun {
    synth::Scenario scenario;
    std::vector<synth::WindowTruth> truth;
    synth::GenerateResult generated;
    pipeline::FrameSet frames;
    motion::CalibrationConfig calib;
    double norm_value = 0.0;
    std::vector<motion::MotionSeries> motion_series;  // frame order
    pipeline::SoundStageResult sound_stage;           // beta_empirical
    std::vector<fusion::UtilizationSeries> fused;     // frame order
    double chain_seconds = 0.0;
};

MonthRun run_month(const fs::path& dir) {
    MonthRun run;
    run.scenario = synth::Scenario::default_month();
    run.truth = synth::simulate(run.scenario);

    auto t0 = Clock::now();
    fs::remove_all(dir);
    run.generated = synth::generate(run.scenario, dir.string());

    auto catalog = SensorCatalog::defaults();
    run.frames = pipeline::build_frames(run.generated.log_paths, catalog);

    auto corpus = pipeline::read_labeled_csv(run.generated.false_alarm_truth_path);
    run.calib = pipeline::fit_calibration(corpus, motion::CalibrationConfig{});
    auto pool = pipeline::pooled_motion(run.frames.frames);
    run.norm_value = motion::cdf_threshold(pool, 0.85);
    if (run.norm_value > 0.0) run.calib.norm_value = run.norm_value;

    for (const auto& frame : run.frames.frames)
        run.motion_series.push_back(motion::calibrate_frame(frame, run.calib));

    sound::SoundConfig sound_cfg;
    sound_cfg.beta_empirical = true;
    run.sound_stage =
        pipeline::analyze_sound(run.frames.frames, sound_cfg, run.scenario.utc_offset_minutes);

    for (std::size_t i = 0; i < run.frames.frames.size(); ++i)
        run.fused.push_back(pipeline::fuse_node(run.motion_series[i],
                                                run.sound_stage.nodes[i].output,
                                                run.sound_stage.rain));
    run.chain_seconds = seconds_since(t0);
    return run;
}

struct TruthEvent {
    CivilDate date{};
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
};

std::vector<TruthEvent> truth_events(const synth::Scenario& sc) {
    std::vector<TruthEvent> events;
    for (const auto& e : sc.rain_events) {
        TruthEvent t;
        t.date = e.date;
        t.start_ms = local_midnight_ms(e.date, sc.utc_offset_minutes) +
                     static_cast<std::int64_t>(std::llround(e.start_hour * 3600.0 * 1000.0));
        t.end_ms = t.start_ms + static_cast<std::int64_t>(std::llround(e.duration_min * 60000.0));
        events.push_back(t);
    }
    return events;
}

// IoU of a truth range against the union of detected intervals overlapping it.
double interval_iou(std::int64_t ts, std::int64_t te,
                    const std::vector<sound::RainInterval>& detected) {
    std::int64_t inter = 0, extra = 0;
    for (const auto& d : detected) {
        std::int64_t ov = std::min(te, d.end_ms) - std::max(ts, d.start_ms);
        if (ov > 0) {
            inter += ov;
            extra += d.end_ms - d.start_ms;
        }
    }
    if (inter == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(te - ts + extra - inter);
}

} // namespace

// ------------------------------------------------------------- criteria ---

Verdict criterion_equations() {
    Verdict v;
    auto t0 = Clock::now();

    motion::CalibrationConfig cfg;
    v.require(motion::likelihood(27.0, 28.0, 40.0) == 0.0, "likelihood below lower");
    v.require(motion::likelihood(28.0, 28.0, 40.0) == 0.0, "likelihood at lower");
    v.require(motion::likelihood(34.0, 28.0, 40.0) == 0.5, "likelihood midpoint");
    v.require(motion::likelihood(31.0, 28.0, 40.0) == 0.25, "likelihood quarter");
    v.require(motion::likelihood(45.0, 28.0, 40.0) == 1.0, "likelihood above upper");
    v.require(motion::aggregate_likelihood({0.5, 0.25}) == 0.375, "aggregate mean");
    v.require(motion::window_likelihood(34.0, 20500.0, cfg) == 0.5, "window likelihood");
    v.require(motion::window_likelihood(34.0, std::nullopt, cfg) == 0.25,
              "missing lux halves the evidence");
    v.require(motion::window_likelihood(std::nullopt, std::nullopt, cfg) == 0.0,
              "no evidence, no likelihood");
    v.require(motion::deduction_bin(0.1) == 0, "bin upper edge stays");
    v.require(motion::deduction_bin(std::nextafter(0.1, 1.0)) == 1, "bin lower edge moves on");
    v.require(motion::deduction_bin(1.0) == 9, "top bin");
    v.require(motion::calibrate(18.0, 12.0) == 6.0, "calibrate subtracts");
    v.require(motion::calibrate(5.0, 9.0) == 0.0, "calibrate clamps at zero");
    v.require(motion::rescale(18.0, 12.0, 100.0) == 18.0 * 100.0 / 88.0, "rescale");
    v.require(motion::normalize_motion(5.0, 10.0) == 0.5, "normalize");
    v.require(motion::normalize_motion(25.0, 10.0) == 1.0, "normalize saturates");
    v.require(fusion::fuse(0.3, 0) == 0.3, "fuse keeps motion");
    v.require(fusion::fuse(0.05, 1) == 1.0, "fuse keeps sound");
    bool threw = false;
    try {
        motion::rescale(1.0, 100.0, 100.0);
    } catch (const Error&) {
        threw = true;
    }
    v.require(threw, "rescale at capacity must throw");

    // Fit a table from a false-alarm-shaped corpus, then hammer the chain.
    std::mt19937_64 rng(4711);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 4000; ++i) {
        double p = u01(rng);
        double m = std::round(13.0 * std::pow(p, 1.25) * (1.0 + 0.2 * (2.0 * u01(rng) - 1.0)));
        samples.emplace_back(p, m);
    }
    cfg.table = motion::fit_deduction_table(samples, cfg.gain, cfg.inflation);

    std::uniform_real_distribution<double> temp(20.0, 45.0);
    std::uniform_real_distribution<double> lux(0.0, 40000.0);
    std::uniform_real_distribution<double> motion_counts(0.0, 100.0);
    auto eta_of = [&](double m, double p) {
        double d = motion::deduction(cfg.table, p);
        double r = motion::rescale(motion::calibrate(m, d), d, cfg.gain);
        return motion::normalize_motion(r, cfg.norm_value);
    };
    int trials = 100000;
    for (int i = 0; i < trials && v.pass; ++i) {
        double k1 = temp(rng), k2 = temp(rng);
        double l1 = lux(rng), l2 = lux(rng);
        if (k1 > k2) std::swap(k1, k2);
        if (l1 > l2) std::swap(l1, l2);
        double p1 = motion::window_likelihood(k1, l1, cfg);
        double p2 = motion::window_likelihood(k2, l2, cfg);
        v.require(p1 >= 0.0 && p2 <= 1.0 && p1 <= p2, "likelihood bounds/monotonicity");

        double m1 = motion_counts(rng), m2 = motion_counts(rng);
        if (m1 > m2) std::swap(m1, m2);
        double eta_low = eta_of(m2, p2), eta_high = eta_of(m2, p1);
        v.require(eta_low >= 0.0 && eta_low <= 1.0, "eta out of [0,1]");
        v.require(eta_low <= eta_high + 1e-12, "eta must not grow with likelihood");
        v.require(eta_of(m1, p1) <= eta_high + 1e-12, "eta must not shrink with motion");
        v.require(fusion::fuse(eta_low, 0) == eta_low && fusion::fuse(eta_low, 1) == 1.0,
                  "fuse bounds");
    }
    double elapsed = seconds_since(t0);
    v.require(elapsed < 5.0, fmt("runtime %.2fs exceeds 5s", elapsed));
    if (v.pass) v.detail = fmt("hand values exact, %d randomized chains in %.2fs", trials, elapsed);
    return v;
}

Verdict criterion_haar() {
    Verdict v;
    std::mt19937_64 rng(4712);
    std::uniform_int_distribution<int> count(0, 600);
    auto literal = oracle::haar_matrix_literal();
    for (int trial = 0; trial < 10000 && v.pass; ++trial) {
        Histogram h;
        for (int& b : h) b = count(rng);
        auto coeffs = sound::haar_features(h);
        sound::Vec8 x = sound::Vec8::Zero();
        for (int i = 0; i < kNoiseBins; ++i) x(i) = h[i];

        v.require(std::abs(coeffs.norm() - x.norm()) <= 1e-9, "norm not preserved");
        v.require((sound::haar_inverse(coeffs) - x).cwiseAbs().maxCoeff() <= 1e-9,
                  "round-trip error above 1e-9");

        std::array<double, 8> xa{};
        for (int i = 0; i < 8; ++i) xa[static_cast<std::size_t>(i)] = x(i);
        auto expect = oracle::haar_apply_literal(xa);
        for (int i = 0; i < 8; ++i)
            v.require(std::abs(coeffs(i) - expect[static_cast<std::size_t>(i)]) <= 1e-9,
                      "disagrees with literal matrix");
    }
    if (v.pass) v.detail = "10000 histograms: orthonormal, invertible, matches matrix oracle";
    return v;
}

Verdict criterion_pca() {
    Verdict v;
    int checked = 0;
    for (unsigned seed = 0; seed < 100 && v.pass; ++seed) {
        std::mt19937_64 rng(8000 + seed);
        std::normal_distribution<double> z(0.0, 1.0);
        int ndirs = 1 + static_cast<int>(seed % 6);
        Eigen::MatrixXd basis(ndirs, 8);
        for (Eigen::Index r = 0; r < basis.rows(); ++r)
            for (Eigen::Index c = 0; c < 8; ++c) basis(r, c) = z(rng);
        Eigen::MatrixXd X(288, 8);
        for (Eigen::Index i = 0; i < 288; ++i) {
            Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(8);
            for (int j = 0; j < ndirs; ++j)
                row += z(rng) * 60.0 / std::pow(1.0 + j, 1.5) * basis.row(j);
            for (Eigen::Index c = 0; c < 8; ++c) row(c) += 0.5 * z(rng) + 40.0;
            X.row(i) = row;
        }

        auto model = sound::fit_pca(X, 0.95);
        v.require(model.p == oracle::smallest_p(X, 0.05),
                  fmt("seed %u: p=%d oracle=%d", seed, model.p, oracle::smallest_p(X, 0.05)));

        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 8; ++k) {
            double ratio = oracle::reconstruction_ratio(X, k);
            v.require(ratio <= prev + 1e-12, fmt("seed %u: ratio grew at k=%d", seed, k));
            prev = ratio;
        }
        ++checked;
    }
    if (v.pass) v.detail = fmt("%d seeded datasets: p matches oracle, error monotone", checked);
    return v;
}

Verdict criterion_ccc() {
    Verdict v;
    std::mt19937_64 rng(4714);
    std::uniform_int_distribution<std::size_t> size(4, 50);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    for (int trial = 0; trial < 100 && v.pass; ++trial) {
        std::size_t n = size(rng);
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 3);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (int c = 0; c < 3; ++c) X(i, c) = coord(rng);
        auto d = cluster::CondensedDistances::from_points(X);
        auto linkage = cluster::kAllLinkages[static_cast<std::size_t>(trial) % 4];
        auto tree = cluster::linkage_cluster(d, linkage);
        double impl = cluster::ccc(tree, d);
        double ref = oracle::ccc_double_loop(d, tree);
        v.require(std::abs(impl - ref) <= 1e-9, fmt("trial %d: |%.12f - %.12f|", trial, impl, ref));

        auto scaled = d;
        for (double& value : scaled.raw()) value *= 37.5;
        double impl_scaled =
            cluster::ccc(cluster::linkage_cluster(scaled, linkage), scaled);
        v.require(std::abs(impl - impl_scaled) <= 1e-9, fmt("trial %d: scale variant", trial));
    }

    cluster::CondensedDistances ultra(4);
    ultra.at(0, 1) = 1.0;
    ultra.at(2, 3) = 1.0;
    for (std::size_t i : {0u, 1u})
        for (std::size_t j : {2u, 3u}) ultra.at(i, j) = 10.0;
    double one = cluster::ccc(cluster::linkage_cluster(ultra, cluster::Linkage::Single), ultra);
    v.require(std::abs(one - 1.0) <= 1e-12, "ultrametric input must give ccc 1.0");
    if (v.pass) v.detail = "100 instances within 1e-9; ultrametric gives 1.0; scale invariant";
    return v;
}

Verdict criterion_ch() {
    Verdict v;
    for (unsigned seed = 0; seed < 100 && v.pass; ++seed) {
        std::mt19937_64 rng(9000 + seed);
        std::normal_distribution<double> z(0.0, 1.0);
        std::uniform_real_distribution<double> center(0.0, 20.0);
        int k_true = 2 + static_cast<int>(seed % 4);
        int n = 40 + static_cast<int>(seed % 30);
        double spread = 0.8 + 0.4 * static_cast<double>(seed % 5);
        std::vector<std::pair<double, double>> centers;
        for (int c = 0; c < k_true; ++c) centers.emplace_back(center(rng), center(rng));
        Eigen::MatrixXd X(n, 2);
        for (int i = 0; i < n; ++i) {
            auto [cx, cy] = centers[static_cast<std::size_t>(i % k_true)];
            X(i, 0) = cx + spread * z(rng);
            X(i, 1) = cy + spread * z(rng);
        }
        auto selection = cluster::cluster_select(cluster::CondensedDistances::from_points(X));
        auto pick = cluster::choose_k(X, selection.dendrogram, 8);

        std::size_t best_k = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 2; k <= 8; ++k) {
            auto labels = cluster::cut_k(selection.dendrogram, k);
            double ch = oracle::ch_explicit(X, labels, static_cast<int>(k), false);
            if (ch > best) {
                best = ch;
                best_k = k;
            }
        }
        v.require(pick.k == best_k,
                  fmt("seed %u: picked %zu, oracle says %zu", seed, pick.k, best_k));
    }

    int three = 0;
    for (unsigned seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(10000 + seed);
        std::normal_distribution<double> z(0.0, 0.6);
        Eigen::MatrixXd X(60, 2);
        const double cx[3] = {0.0, 10.0, 5.0};
        const double cy[3] = {0.0, 0.0, 9.0};
        for (int i = 0; i < 60; ++i) {
            X(i, 0) = cx[i % 3] + z(rng);
            X(i, 1) = cy[i % 3] + z(rng);
        }
        auto selection = cluster::cluster_select(cluster::CondensedDistances::from_points(X));
        if (cluster::choose_k(X, selection.dendrogram, 8).k == 3) ++three;
    }
    v.require(three >= 95, fmt("3 clusters found in only %d/100 seeds", three));
    if (v.pass)
        v.detail = fmt("100 argmax matches; well-separated case picked k=3 in %d/100", three);
    return v;
}

Verdict criterion_beta(const MonthRun& month) {
    Verdict v;

    // Background-only node-days: quiet scenario with sum-preserving noise.
    auto scenario = synth::Scenario::quiet(10);
    scenario.sound.transfer_noise = 20.0;
    scenario.sound.dropout_frac = 0.02;
    auto rows = synth::simulate(scenario);
    const std::size_t per_day = 288;
    const std::size_t days = static_cast<std::size_t>(scenario.days);

    std::vector<double> pool;
    int day_count = 0;
    for (std::size_t ni = 0; ni < scenario.nodes.size(); ++ni) {
        for (std::size_t day = 0; day < days; ++day) {
            Eigen::MatrixXd F(static_cast<Eigen::Index>(per_day), sound::kHaarDim);
            for (std::size_t r = 0; r < per_day; ++r) {
                const auto& t = rows[(ni * days + day) * per_day + r];
                F.row(static_cast<Eigen::Index>(r)) = sound::haar_features(t.histogram).transpose();
            }
            auto model = sound::fit_pca(F, 0.95);
            auto scores = sound::chi_square_scores(F, 0.95);
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= static_cast<double>(scores.size());
            v.require(std::abs(mean / model.p - 1.0) <= 0.05,
                      fmt("day %zu/%zu: mean chi2 %.3f vs p=%d", ni, day, mean, model.p));
            pool.insert(pool.end(), scores.begin(), scores.end());
            ++day_count;
        }
    }

    double beta85 = sound::empirical_beta(pool, 0.85);
    std::size_t flagged = 0;
    for (double s : pool)
        if (s >= beta85) ++flagged;
    double frac = static_cast<double>(flagged) / static_cast<double>(pool.size());
    v.require(std::abs(frac - 0.15) <= 0.02,
              fmt("flagged fraction %.4f outside 15%%+-2%%", frac));

    double month_beta = month.sound_stage.beta;
    v.require(month_beta >= 8.25 && month_beta <= 9.25,
              fmt("empirical beta %.3f outside [8.25, 9.25]", month_beta));
    v.require(month.norm_value >= 9.0 && month.norm_value <= 11.0,
              fmt("cdf threshold %.2f outside 10 +- 1", month.norm_value));
    if (v.pass)
        v.detail = fmt("%d background days mean~p, flagged %.3f, beta %.2f, norm %.0f",
                       day_count, frac, month_beta, month.norm_value);
    return v;
}

Verdict criterion_calibration(const MonthRun& month) {
    Verdict v;

    std::map<std::pair<std::string, std::int64_t>, double> eta;
    for (std::size_t i = 0; i < month.frames.frames.size(); ++i)
        for (const auto& pt : month.motion_series[i].points)
            eta[{month.frames.frames[i].node_uid, pt.window_start_ms}] = pt.eta;

    std::int64_t fa_total = 0, fa_quiet = 0, act_total = 0, act_live = 0;
    for (const auto& t : month.truth) {
        auto it = eta.find({t.node_uid, t.window_start_ms});
        if (it == eta.end()) continue;  // motion token lost to corruption
        if (t.event_motion == 0 && t.fa_motion > 0) {
            ++fa_total;
            if (it->second < 0.1) ++fa_quiet;
        } else if (t.event_motion >= month.scenario.activity_truth_motion) {
            ++act_total;
            if (it->second >= 0.2) ++act_live;
        }
    }
    double fa_frac = static_cast<double>(fa_quiet) / static_cast<double>(fa_total);
    double act_frac = static_cast<double>(act_live) / static_cast<double>(act_total);
    v.require(fa_total > 1000 && act_total > 500, "too few labeled windows to judge");
    v.require(fa_frac >= 0.90,
              fmt("only %.1f%% of %lld false-alarm windows muted", 100.0 * fa_frac,
                  static_cast<long long>(fa_total)));
    v.require(act_frac >= 0.80,
              fmt("only %.1f%% of %lld activity windows kept", 100.0 * act_frac,
                  static_cast<long long>(act_total)));
    v.require(month.chain_seconds < 60.0,
              fmt("full month chain took %.1fs", month.chain_seconds));
    if (v.pass)
        v.detail = fmt("false alarms muted %.1f%% (n=%lld), activity kept %.1f%% (n=%lld), %.1fs",
                       100.0 * fa_frac, static_cast<long long>(fa_total), 100.0 * act_frac,
                       static_cast<long long>(act_total), month.chain_seconds);
    return v;
}

Verdict criterion_rain(const MonthRun& month) {
    Verdict v;

    auto check_run = [&](const synth::Scenario& sc,
                         const std::vector<exporter::DatedRainInterval>& detected,
                         const std::string& tag) {
        std::set<CivilDate> event_dates;
        for (const auto& e : sc.rain_events) event_dates.insert(e.date);

        for (const auto& [date, interval] : detected)
            v.require(event_dates.count(date) > 0,
                      fmt("%s: interval on rain-free %04d-%02d-%02d", tag.c_str(), date.year,
                          date.month, date.day));

        for (const auto& event : truth_events(sc)) {
            std::vector<sound::RainInterval> same_day;
            for (const auto& [date, interval] : detected)
                if (date == event.date) same_day.push_back(interval);
            double iou = interval_iou(event.start_ms, event.end_ms, same_day);
            v.require(iou >= 0.5, fmt("%s: event on %04d-%02d-%02d IoU %.2f", tag.c_str(),
                                      event.date.year, event.date.month, event.date.day, iou));
        }
    };

    check_run(month.scenario, month.sound_stage.rain, "seed default");

    sound::SoundConfig cfg;
    for (unsigned k = 1; k < 20 && v.pass; ++k) {
        auto scenario = synth::Scenario::default_month();
        scenario.seed = scenario.seed + k * 7919;
        scenario.corruption = {};  // detection quality is the subject here
        auto rows = synth::simulate(scenario);
        const std::size_t per_node = static_cast<std::size_t>(scenario.days) * 288;

        std::vector<exporter::DatedRainInterval> detected;
        for (int day = 0; day < scenario.days; ++day) {
            std::vector<sound::NodeDayFeatures> nodes;
            CivilDate date{};
            for (std::size_t ni = 0; ni < scenario.nodes.size(); ++ni) {
                timeline::AlignedFrame frame;
                frame.node_uid = scenario.nodes[ni];
                for (std::size_t r = 0; r < 288; ++r) {
                    const auto& t =
                        rows[ni * per_node + static_cast<std::size_t>(day) * 288 + r];
                    ValidatedReading reading;
                    reading.timestamp_ms = t.window_start_ms;
                    reading.node_uid = t.node_uid;
                    reading.noise = t.histogram;
                    frame.rows.push_back(reading);
                    date = local_fields(t.window_start_ms, scenario.utc_offset_minutes).date;
                }
                nodes.push_back(sound::node_day_features(frame));
            }
            auto result = sound::detect_rain(nodes, cfg);
            for (const auto& interval : result.intervals) detected.emplace_back(date, interval);
        }
        check_run(scenario, detected, fmt("seed +%u", k));
    }
    if (v.pass) v.detail = "20 seeds: all events IoU >= 0.5, rain-free days stay clean";
    return v;
}

Verdict criterion_determinism() {
    Verdict v;
    auto scenario = synth::Scenario::default_month();
    pipeline::PipelineConfig cfg;
    fs::path dir_a = fs::temp_directory_path() / "spaceutil_accept_e2e_a";
    fs::path dir_b = fs::temp_directory_path() / "spaceutil_accept_e2e_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    pipeline::run_e2e(scenario, cfg, dir_a.string());
    pipeline::run_e2e(scenario, cfg, dir_b.string());

    auto collect = [](const fs::path& root) {
        std::vector<fs::path> rel;
        for (auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), root));
        std::sort(rel.begin(), rel.end());
        return rel;
    };
    auto rel_a = collect(dir_a);
    auto rel_b = collect(dir_b);
    v.require(rel_a == rel_b, "runs produced different file sets");
    std::size_t bytes = 0;
    if (v.pass)
        for (const auto& r : rel_a) {
            auto a = slurp(dir_a / r);
            bytes += a.size();
            v.require(a == slurp(dir_b / r), "differs: " + r.string());
        }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    if (v.pass)
        v.detail = fmt("%zu files, %.1f MB, byte-identical", rel_a.size(),
                       static_cast<double>(bytes) / 1048576.0);
    return v;
}

Verdict criterion_fuzz() {
    Verdict v;
    auto catalog = SensorCatalog::defaults();
    std::mt19937_64 rng(4719);
    std::uniform_int_distribution<int> length(0, 100);
    std::uniform_int_distribution<int> byte(32, 126);
    std::uniform_int_distribution<int> num(-500, 40000);
    const char* ids[] = {"M", "X", "K", "L", "R", "U", "B", "H", "Z", "QQ", ""};

    auto fuzz_line = [&](std::string& line) {
        line.clear();
        switch (rng() % 4) {
            case 0: {
                int n = length(rng);
                for (int i = 0; i < n; ++i) line.push_back(static_cast<char>(byte(rng)));
                break;
            }
            case 1: {
                line = std::to_string(static_cast<std::int64_t>(rng() % 2000000000000LL));
                line += ",";
                int n = length(rng) / 4;
                for (int i = 0; i < n; ++i) line.push_back(static_cast<char>(byte(rng)));
                break;
            }
            case 2: {
                line = std::to_string(static_cast<std::int64_t>(rng() % 2000000000000LL));
                line += ",n" + std::to_string(rng() % 9);
                int tokens = static_cast<int>(rng() % 10);
                for (int t = 0; t < tokens; ++t) {
                    line += (t == 0 ? "," : ";");
                    line += ids[rng() % 11];
                    line += ":";
                    switch (rng() % 3) {
                        case 0: line += std::to_string(num(rng)); break;
                        case 1: line += "xx" + std::to_string(rng() % 100); break;
                        case 2:
                            line += std::to_string(num(rng)) + "," + std::to_string(num(rng));
                            break;
                    }
                }
                break;
            }
            default: {
                char buf[256];
                std::snprintf(buf, sizeof(buf),
                              "%lld,n%d,M:%d;X:%d,%d,%d,%d,%d;K:%.2f;L:%.1f;R:%.1f;U:%.1f;B:%.2f;"
                              "H:%.2f",
                              static_cast<long long>(1470009600000LL + num(rng)),
                              static_cast<int>(rng() % 9), num(rng) % 200, num(rng), num(rng),
                              num(rng), num(rng), num(rng), 20.0 + (num(rng) % 400) / 10.0,
                              static_cast<double>(num(rng)), (num(rng) % 12000) / 10.0,
                              (num(rng) % 9000) / 10.0, 900.0 + (num(rng) % 2000) / 10.0,
                              (num(rng) % 1200) / 10.0);
                line = buf;
            }
        }
    };

    const int total_lines = 1000000;
    const int batch = 20000;
    std::int64_t lines_seen = 0, readings_seen = 0;
    std::string line;
    for (int done = 0; done < total_lines && v.pass; done += batch) {
        std::ostringstream stream;
        for (int i = 0; i < batch; ++i) {
            fuzz_line(line);
            stream << line << "\n";
        }
        std::istringstream in(stream.str());
        ingest::IngestStats stats;
        std::vector<ValidatedReading> readings;
        try {
            readings = ingest::ingest_lines(in, catalog, stats);
        } catch (const std::exception& e) {
            v.require(false, fmt("ingest threw: %s", e.what()));
            break;
        }
        v.require(stats.lines_total == batch, "lost track of line count");
        v.require(stats.conserved(), "line/token conservation violated");
        lines_seen += stats.lines_total;
        readings_seen += static_cast<std::int64_t>(readings.size());

        for (const auto& r : readings) {
            for (const auto& [id, entry] : catalog.entries()) {
                if (entry.kind == Sensor::Noise) continue;
                const auto* field = numeric_field(r, entry.kind);
                if (field && field->has_value())
                    v.require(**field >= entry.min && **field <= entry.max,
                              fmt("out-of-range %s survived: %f", id.c_str(), **field));
            }
            if (r.noise) {
                int sum = 0;
                for (int b : *r.noise) {
                    v.require(b >= 0, "negative histogram bin survived");
                    sum += b;
                }
                v.require(sum <= catalog.histogram_sum_max(), "histogram sum cap violated");
            }
        }
    }
    if (v.pass)
        v.detail = fmt("%lld lines fuzzed, %lld readings, all in range, counts conserved",
                       static_cast<long long>(lines_seen), static_cast<long long>(readings_seen));
    return v;
}

Verdict criterion_heatmap(const MonthRun& month) {
    Verdict v;
    int utc = month.scenario.utc_offset_minutes;
    for (const auto& series : month.fused) {
        auto all = fusion::aggregate_heatmap(series, "all", utc);
        double weighted = 0.0;
        std::int64_t total = 0;
        for (int d = 0; d < 7; ++d)
            for (int h = 0; h < 24; ++h) {
                weighted += all.mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)] *
                            static_cast<double>(
                                all.count[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)]);
                total += all.count[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)];
            }
        double series_mean = 0.0;
        for (const auto& pt : series.points) series_mean += pt.eta;
        series_mean /= static_cast<double>(series.points.size());
        v.require(total == static_cast<std::int64_t>(series.points.size()),
                  series.node_uid + ": cell counts lost windows");
        v.require(std::abs(weighted / static_cast<double>(total) - series_mean) <= 1e-9,
                  series.node_uid + ": weighted mean drifts from series mean");

        auto weekday = fusion::aggregate_heatmap(series, "weekday", utc);
        auto weekend = fusion::aggregate_heatmap(series, "weekend", utc);
        for (std::size_t d = 0; d < 7; ++d)
            for (std::size_t h = 0; h < 24; ++h)
                v.require(weekday.count[d][h] + weekend.count[d][h] == all.count[d][h],
                          series.node_uid + ": weekday+weekend does not partition all");
    }
    if (v.pass)
        v.detail = fmt("%zu node series conserve means and counts", month.fused.size());
    return v;
}

// ----------------------------------------------------------------- main ---

int main() {
    struct Entry {
        int id;
        const char* name;
        Verdict verdict;
    };
    std::vector<Entry> entries;

    fs::path month_dir = fs::temp_directory_path() / "spaceutil_accept_month";
    MonthRun month = run_month(month_dir);

    entries.push_back({1, "equation chain", criterion_equations()});
    entries.push_back({2, "haar transform", criterion_haar()});
    entries.push_back({3, "pca selection", criterion_pca()});
    entries.push_back({4, "cophenetic correlation", criterion_ccc()});
    entries.push_back({5, "cluster count selection", criterion_ch()});
    entries.push_back({6, "chi-square threshold", criterion_beta(month)});
    entries.push_back({7, "calibration efficacy", criterion_calibration(month)});
    entries.push_back({8, "rain detection", criterion_rain(month)});
    entries.push_back({9, "e2e determinism", criterion_determinism()});
    entries.push_back({10, "ingest robustness", criterion_fuzz()});
    entries.push_back({11, "heatmap conservation", criterion_heatmap(month)});

    fs::remove_all(month_dir);

    int failures = 0;
    for (const auto& entry : entries) {
        if (!entry.verdict.pass) ++failures;
        std::printf("%s %2d %-24s %s\n", entry.verdict.pass ? "PASS" : "FAIL", entry.id,
                    entry.name, entry.verdict.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failures,
                entries.size());
    return failures;
}
