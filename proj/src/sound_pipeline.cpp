#include "spaceutil/sound_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "spaceutil/error.hpp"
#include "spaceutil/haar.hpp"
#include "spaceutil/motion_calib.hpp"

namespace spaceutil::sound {

void SoundConfig::check() const {
    if (!(alpha > 0.0) || !(alpha < 1.0)) raise(Errc::InvalidConfig, "alpha must lie in (0, 1)");
    if (max_clusters < 2) raise(Errc::InvalidConfig, "max_clusters must be at least 2");
    if (min_run < 1) raise(Errc::InvalidConfig, "min_run must be at least 1");
    if (!(beta > 0.0)) raise(Errc::InvalidConfig, "beta must be positive");
    if (!(beta_quantile > 0.0) || beta_quantile > 1.0)
        raise(Errc::InvalidConfig, "beta_quantile must lie in (0, 1]");
    if (!(rain_quorum > 0.0) || rain_quorum > 1.0)
        raise(Errc::InvalidConfig, "rain_quorum must lie in (0, 1]");
    if (rain_min_len < 1) raise(Errc::InvalidConfig, "rain_min_len must be at least 1");
}

nlohmann::json SoundConfig::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["literal_alpha"] = literal_alpha;
    j["max_clusters"] = max_clusters;
    j["min_run"] = min_run;
    j["beta"] = beta;
    j["beta_empirical"] = beta_empirical;
    j["beta_quantile"] = beta_quantile;
    j["ch_denominator"] =
        ch_denominator == cluster::ChDenominator::Standard ? "standard" : "paper";
    j["rain_quorum"] = rain_quorum;
    j["rain_min_len"] = rain_min_len;
    return j;
}

SoundConfig SoundConfig::from_json(const nlohmann::json& j) {
    SoundConfig cfg;
    try {
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("literal_alpha")) cfg.literal_alpha = j.at("literal_alpha").get<bool>();
        if (j.contains("max_clusters"))
            cfg.max_clusters = j.at("max_clusters").get<std::size_t>();
        if (j.contains("min_run")) cfg.min_run = j.at("min_run").get<int>();
        if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
        if (j.contains("beta_empirical"))
            cfg.beta_empirical = j.at("beta_empirical").get<bool>();
        if (j.contains("beta_quantile"))
            cfg.beta_quantile = j.at("beta_quantile").get<double>();
        if (j.contains("ch_denominator")) {
            std::string mode = j.at("ch_denominator").get<std::string>();
            if (mode == "standard") {
                cfg.ch_denominator = cluster::ChDenominator::Standard;
            } else if (mode == "paper") {
                cfg.ch_denominator = cluster::ChDenominator::TotalMinusOne;
            } else {
                raise(Errc::InvalidConfig, "ch_denominator must be standard or paper");
            }
        }
        if (j.contains("rain_quorum")) cfg.rain_quorum = j.at("rain_quorum").get<double>();
        if (j.contains("rain_min_len")) cfg.rain_min_len = j.at("rain_min_len").get<int>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad sound config: ") + e.what());
    }
    cfg.check();
    return cfg;
}

SoundConfig SoundConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open sound config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad sound config json: ") + e.what());
    }
    return from_json(j);
}

void SoundConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write sound config: " + path);
    out << to_json().dump(2) << "\n";
}

namespace {

struct Run {
    int start = 0;
    int end = 0;  // inclusive
    int label = 0;
    int length() const { return end - start + 1; }
};

std::vector<Run> label_runs(const std::vector<int>& labels) {
    std::vector<Run> runs;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!runs.empty() && runs.back().label == labels[i]) {
            runs.back().end = static_cast<int>(i);
        } else {
            runs.push_back({static_cast<int>(i), static_cast<int>(i), labels[i]});
        }
    }
    return runs;
}

Eigen::VectorXd row_mean(const Eigen::MatrixXd& features, int start, int end) {
    return features.middleRows(start, end - start + 1).colwise().mean();
}

} // namespace

std::vector<Period> segment_background(const std::vector<int>& labels,
                                       const Eigen::MatrixXd& features, int min_run) {
    if (labels.empty()) return {};
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        raise(Errc::InvalidConfig, "label count does not match feature rows");
    if (min_run < 1) raise(Errc::InvalidConfig, "min_run must be at least 1");

    std::vector<Run> runs = label_runs(labels);
    std::vector<int> anchors;
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (runs[i].length() >= min_run) anchors.push_back(static_cast<int>(i));

    if (anchors.empty()) {
        // Nothing stable enough all day: one period under the majority label.
        std::map<int, int> counts;
        for (int l : labels) ++counts[l];
        int best = labels[0];
        int best_n = 0;
        for (const auto& [l, n] : counts)
            if (n > best_n) {
                best = l;
                best_n = n;
            }
        return {{0, static_cast<int>(labels.size()) - 1, best}};
    }

    // Assign every short run to its nearer anchor, measured between mean
    // feature vectors.
    std::vector<int> owner(runs.size(), -1);
    for (int a : anchors) owner[static_cast<std::size_t>(a)] = a;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (owner[i] >= 0) continue;
        int left = -1, right = -1;
        for (int a : anchors) {
            if (a < static_cast<int>(i)) left = a;
            if (a > static_cast<int>(i) && right < 0) right = a;
        }
        if (left < 0) {
            owner[i] = right;
        } else if (right < 0) {
            owner[i] = left;
        } else {
            Eigen::VectorXd mine = row_mean(features, runs[i].start, runs[i].end);
            const Run& lr = runs[static_cast<std::size_t>(left)];
            const Run& rr = runs[static_cast<std::size_t>(right)];
            double dl = (mine - row_mean(features, lr.start, lr.end)).norm();
            double dr = (mine - row_mean(features, rr.start, rr.end)).norm();
            owner[i] = dl <= dr ? left : right;
        }
    }

    std::vector<Period> periods;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        int label = runs[static_cast<std::size_t>(owner[i])].label;
        if (!periods.empty() && periods.back().label == label &&
            periods.back().end + 1 == runs[i].start) {
            periods.back().end = runs[i].end;
        } else {
            periods.push_back({runs[i].start, runs[i].end, label});
        }
    }
    return periods;
}

std::vector<double> chi_square_scores(const Eigen::MatrixXd& period_features, double alpha,
                                      bool literal_alpha) {
    PcaModel model = fit_pca(period_features, alpha, literal_alpha);
    std::vector<double> out(static_cast<std::size_t>(period_features.rows()), 0.0);
    for (Eigen::Index i = 0; i < period_features.rows(); ++i)
        out[static_cast<std::size_t>(i)] =
            chi_square(model, period_features.row(i).transpose());
    return out;
}

ActivityMarks detect_activity(const std::vector<double>& chi2, double beta) {
    if (!(beta > 0.0)) raise(Errc::InvalidConfig, "beta must be positive");
    ActivityMarks marks;
    marks.beta = beta;
    marks.chi2 = chi2;
    marks.eta_n.reserve(chi2.size());
    for (double c : chi2) marks.eta_n.push_back(c >= beta ? 1 : 0);
    return marks;
}

double empirical_beta(const std::vector<double>& chi2, double quantile) {
    return motion::cdf_threshold(chi2, quantile);
}

NodeDayFeatures node_day_features(const timeline::AlignedFrame& day_frame) {
    NodeDayFeatures out;
    out.node_uid = day_frame.node_uid;
    std::vector<Vec8> rows;
    for (const auto& row : day_frame.rows) {
        if (!row.noise) continue;
        out.window_starts.push_back(row.timestamp_ms);
        rows.push_back(haar_features(*row.noise));
    }
    out.features.resize(static_cast<Eigen::Index>(rows.size()), kHaarDim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return out;
}

NodeDayAnalysis analyze_node_day(const timeline::AlignedFrame& day_frame,
                                 const CivilDate& date, const SoundConfig& cfg) {
    cfg.check();
    NodeDayAnalysis a;
    a.node_uid = day_frame.node_uid;
    a.date = date;

    NodeDayFeatures feats = node_day_features(day_frame);
    a.window_starts = std::move(feats.window_starts);
    a.features = std::move(feats.features);
    const auto n = static_cast<std::size_t>(a.features.rows());
    a.labels.assign(n, 1);
    a.period_id.assign(n, 0);
    a.chi2.assign(n, 0.0);
    if (n == 0) {
        a.degenerate = true;
        return a;
    }
    a.periods = {{0, static_cast<int>(n) - 1, 1}};

    Eigen::MatrixXd scores;
    try {
        PcaModel model = fit_pca(a.features, cfg.alpha, cfg.literal_alpha);
        a.pca_p = model.p;
        scores.resize(static_cast<Eigen::Index>(n), model.p);
        for (Eigen::Index i = 0; i < a.features.rows(); ++i)
            scores.row(i) = standardized_scores(model, a.features.row(i).transpose()).transpose();

        auto distances = cluster::CondensedDistances::from_points(scores);
        cluster::LinkageSelection linkage_sel = cluster::cluster_select(distances);
        a.linkage = linkage_sel.linkage;
        cluster::KSelection k_sel = cluster::choose_k(scores, linkage_sel.dendrogram,
                                                      cfg.max_clusters, cfg.ch_denominator);
        a.n_clusters = k_sel.k;
        a.labels = k_sel.labels;
        a.periods = segment_background(a.labels, scores, cfg.min_run);
    } catch (const Error& e) {
        switch (e.code()) {
            case Errc::DegenerateData:
            case Errc::TooFewSamples:
            case Errc::ZeroVariance:
                // Quiet or sparse day: keep the single all-day period.
                a.degenerate = true;
                a.n_clusters = 1;
                return a;
            default:
                throw;
        }
    }

    for (std::size_t pid = 0; pid < a.periods.size(); ++pid) {
        const Period& period = a.periods[pid];
        for (int r = period.start; r <= period.end; ++r)
            a.period_id[static_cast<std::size_t>(r)] = static_cast<int>(pid);
        Eigen::MatrixXd sub = a.features.middleRows(period.start, period.end - period.start + 1);
        try {
            std::vector<double> chi2 = chi_square_scores(sub, cfg.alpha, cfg.literal_alpha);
            for (int r = period.start; r <= period.end; ++r)
                a.chi2[static_cast<std::size_t>(r)] = chi2[static_cast<std::size_t>(r - period.start)];
        } catch (const Error& e) {
            if (e.code() != Errc::DegenerateData && e.code() != Errc::TooFewSamples) throw;
            // Constant or single-row period: every row sits at the mean.
        }
    }
    return a;
}

RainDayResult detect_rain(const std::vector<NodeDayFeatures>& nodes, const SoundConfig& cfg) {
    cfg.check();
    if (nodes.size() < 2)
        raise(Errc::TooFewNodes, "rain detection needs at least 2 nodes, got " +
                                     std::to_string(nodes.size()));

    RainDayResult result;
    const auto n_nodes = static_cast<double>(nodes.size());

    std::size_t total_rows = 0;
    for (const auto& node : nodes) total_rows += node.window_starts.size();
    if (total_rows < 3) {
        result.degenerate = true;
        return result;
    }

    Eigen::MatrixXd pooled(static_cast<Eigen::Index>(total_rows), kHaarDim);
    std::vector<std::size_t> row_node(total_rows);
    std::vector<std::int64_t> row_window(total_rows);
    std::size_t r = 0;
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
        const auto& node = nodes[ni];
        for (std::size_t i = 0; i < node.window_starts.size(); ++i, ++r) {
            pooled.row(static_cast<Eigen::Index>(r)) =
                node.features.row(static_cast<Eigen::Index>(i));
            row_node[r] = ni;
            row_window[r] = node.window_starts[i];
        }
    }

    std::vector<int> labels;
    try {
        PcaModel model = fit_pca(pooled, cfg.alpha, cfg.literal_alpha);
        Eigen::MatrixXd scores(pooled.rows(), model.p);
        for (Eigen::Index i = 0; i < pooled.rows(); ++i)
            scores.row(i) = standardized_scores(model, pooled.row(i).transpose()).transpose();
        auto distances = cluster::CondensedDistances::from_points(scores);
        cluster::LinkageSelection linkage_sel = cluster::cluster_select(distances);
        result.linkage = linkage_sel.linkage;
        cluster::KSelection k_sel = cluster::choose_k(scores, linkage_sel.dendrogram,
                                                      cfg.max_clusters, cfg.ch_denominator);
        result.n_clusters = k_sel.k;
        labels = k_sel.labels;
    } catch (const Error& e) {
        switch (e.code()) {
            case Errc::DegenerateData:
            case Errc::TooFewSamples:
            case Errc::ZeroVariance:
                result.degenerate = true;
                return result;
            default:
                throw;
        }
    }

    // Per window: which nodes report, and how many of them share a cluster.
    std::map<std::int64_t, std::map<std::size_t, int>> window_labels;
    for (std::size_t i = 0; i < total_rows; ++i)
        window_labels[row_window[i]][row_node[i]] = labels[i];

    for (const auto& [window, node_label] : window_labels) {
        auto reporting = static_cast<double>(node_label.size());
        if (reporting / n_nodes < cfg.rain_quorum) continue;
        std::map<int, int> coverage;
        for (const auto& [_, label] : node_label) ++coverage[label];
        int best = 0;
        for (const auto& [_, count] : coverage) best = std::max(best, count);
        if (static_cast<double>(best) / reporting >= cfg.rain_quorum)
            result.candidate_windows.push_back(window);
    }

    std::size_t i = 0;
    while (i < result.candidate_windows.size()) {
        std::size_t j = i;
        while (j + 1 < result.candidate_windows.size() &&
               result.candidate_windows[j + 1] == result.candidate_windows[j] + kWindowMs)
            ++j;
        if (static_cast<int>(j - i + 1) >= cfg.rain_min_len)
            result.intervals.push_back(
                {result.candidate_windows[i], result.candidate_windows[j] + kWindowMs});
        i = j + 1;
    }
    return result;
}

} // namespace spaceutil::sound
