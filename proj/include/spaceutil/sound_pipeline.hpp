#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "spaceutil/hcluster.hpp"
#include "spaceutil/local_time.hpp"
#include "spaceutil/pca.hpp"
#include "spaceutil/timeline.hpp"

namespace spaceutil::sound {

struct SoundConfig {
    double alpha = 0.95;
    bool literal_alpha = false;
    std::size_t max_clusters = 10;
    int min_run = 6;  // 30 minutes of 5-minute windows
    double beta = 8.75;
    bool beta_empirical = false;  // derive beta from the pooled chi2 quantile
    double beta_quantile = 0.85;
    cluster::ChDenominator ch_denominator = cluster::ChDenominator::Standard;
    double rain_quorum = 0.7;
    int rain_min_len = 2;

    void check() const;
    nlohmann::json to_json() const;
    static SoundConfig from_json(const nlohmann::json& j);
    static SoundConfig from_file(const std::string& path);
    void save(const std::string& path) const;
};

// Contiguous block of feature rows sharing one cluster label.  Indices are
// inclusive row positions, not window ids.
struct Period {
    int start = 0;
    int end = 0;
    int label = 0;
};

// Runs of at least min_run identical labels anchor the day's background
// periods; shorter runs join the neighboring anchor whose mean feature
// vector is closer (ties go left).  Touching periods with equal labels
// collapse into one.  With no run long enough, the whole day becomes a
// single period under the most frequent label.
std::vector<Period> segment_background(const std::vector<int>& labels,
                                       const Eigen::MatrixXd& features, int min_run);

// Chi-square statistic per row of one period: PCA refit on the period's
// features, scores standardized per component, squared and summed.
std::vector<double> chi_square_scores(const Eigen::MatrixXd& period_features, double alpha,
                                      bool literal_alpha = false);

struct ActivityMarks {
    std::vector<int> eta_n;  // 1 iff chi2 >= beta
    std::vector<double> chi2;
    double beta = 0.0;
};

ActivityMarks detect_activity(const std::vector<double>& chi2, double beta);

// Quantile of the pooled chi-square scores, lower-step convention.
double empirical_beta(const std::vector<double>& chi2, double quantile = 0.85);

struct NodeDayAnalysis {
    std::string node_uid;
    CivilDate date{};
    std::vector<std::int64_t> window_starts;  // rows that carried a histogram
    Eigen::MatrixXd features;                 // Haar coefficients per row
    int pca_p = 0;
    cluster::Linkage linkage = cluster::Linkage::Single;
    std::size_t n_clusters = 0;
    std::vector<int> labels;
    std::vector<Period> periods;
    std::vector<int> period_id;  // per row
    std::vector<double> chi2;    // per row
    bool degenerate = false;     // no usable structure; chi2 forced to zero
};

// Full per-node-day chain: Haar features, PCA projection, linkage and
// cluster-count selection, background segmentation, per-period chi-square.
// Days without enough data or variance come back with degenerate=true and
// zero scores rather than an error, so a month-long run survives quiet days.
NodeDayAnalysis analyze_node_day(const timeline::AlignedFrame& day_frame,
                                 const CivilDate& date, const SoundConfig& cfg);

struct NodeDayFeatures {
    std::string node_uid;
    std::vector<std::int64_t> window_starts;
    Eigen::MatrixXd features;
};

// Rows of one local day that carry histograms, as Haar features.
NodeDayFeatures node_day_features(const timeline::AlignedFrame& day_frame);

struct RainInterval {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;  // exclusive
};

struct RainDayResult {
    std::vector<RainInterval> intervals;
    std::vector<std::int64_t> candidate_windows;
    std::size_t n_clusters = 0;
    cluster::Linkage linkage = cluster::Linkage::Single;
    bool degenerate = false;
};

// Joint clustering of every node's features for one day.  A window is a rain
// candidate when at least rain_quorum of all nodes report it and at least
// rain_quorum of the reporting nodes fall into one cluster; candidate runs
// of rain_min_len or more windows become intervals.  Throws TooFewNodes.
RainDayResult detect_rain(const std::vector<NodeDayFeatures>& nodes, const SoundConfig& cfg);

} // namespace spaceutil::sound
