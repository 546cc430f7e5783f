#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spaceutil/timeline.hpp"

namespace spaceutil::motion {

constexpr int kDeductionBins = 10;

// Expected false-alarm counts per likelihood decile, plus the fitted cubic
// and the per-bin stats it came from.
struct DeductionTable {
    std::array<double, kDeductionBins> values{};
    std::array<double, 4> poly{};
    std::array<double, kDeductionBins> bin_mean{};
    std::array<std::int64_t, kDeductionBins> bin_count{};
};

struct CalibrationConfig {
    double temp_lower = 28.0;
    double temp_upper = 40.0;
    double lux_lower = 8000.0;
    double lux_upper = 33000.0;
    double gain = 100.0;
    double norm_value = 10.0;
    double inflation = 1.5;
    DeductionTable table;

    void check() const;
    nlohmann::json to_json() const;
    static CalibrationConfig from_json(const nlohmann::json& j);
    static CalibrationConfig from_file(const std::string& path);
    void save(const std::string& path) const;
};

// Piecewise-linear membership: 0 at or below lower, 1 at or above upper.
double likelihood(double value, double lower, double upper);

// Arithmetic mean of per-sensor likelihoods.
double aggregate_likelihood(const std::vector<double>& likelihoods);

// Aggregated likelihood of one window.  A missing sensor contributes zero
// but still counts toward the mean, so partial evidence stays weak.
double window_likelihood(const std::optional<double>& temperature,
                         const std::optional<double>& lux,
                         const CalibrationConfig& cfg);

int deduction_bin(double p);
double deduction_bin_center(int bin);

// Buckets (likelihood, false alarm count) samples into deciles, inflates the
// per-bin means, fits a cubic over the occupied bin centers and tabulates it
// at all ten centers.  The table is clamped to [0, gain) and made
// non-decreasing.  Needs at least four occupied bins.
DeductionTable fit_deduction_table(const std::vector<std::pair<double, double>>& samples,
                                   double gain, double inflation);

double deduction(const DeductionTable& table, double p);

// max(m - d, 0)
double calibrate(double m, double d);

// Spreads the surviving count back over the full scale: m * g / (g - d).
// Throws DeductionAtCapacity once the deduction eats the whole scale.
double rescale(double m_clamped, double d, double gain);

// min(m / norm_value, 1), floored at zero.
double normalize_motion(double m, double norm_value);

// Smallest sample value whose empirical CDF reaches q.
double cdf_threshold(std::vector<double> values, double q);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct MotionPoint {
    std::int64_t window_start_ms = 0;
    double raw = 0.0;
    double p = 0.0;
    double d = 0.0;
    double rescaled = 0.0;
    double eta = 0.0;
};

struct MotionSeries {
    std::string node_uid;
    std::vector<MotionPoint> points;
    std::int64_t windows_without_motion = 0;
};

// Runs the full per-window chain over a frame: likelihood, deduction, clamp,
// rescale, normalize.  Rows without a motion value are skipped and counted.
MotionSeries calibrate_frame(const timeline::AlignedFrame& frame,
                             const CalibrationConfig& cfg);

} // namespace spaceutil::motion
