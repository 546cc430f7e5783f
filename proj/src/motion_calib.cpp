#include "spaceutil/motion_calib.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Dense>

#include "spaceutil/error.hpp"

namespace spaceutil::motion {

void CalibrationConfig::check() const {
    if (!(temp_lower < temp_upper))
        raise(Errc::InvalidConfig, "temperature bounds must satisfy lower < upper");
    if (!(lux_lower < lux_upper))
        raise(Errc::InvalidConfig, "lux bounds must satisfy lower < upper");
    if (!(gain > 0.0)) raise(Errc::InvalidConfig, "gain must be positive");
    if (!(norm_value > 0.0)) raise(Errc::InvalidConfig, "norm_value must be positive");
    if (!(inflation >= 1.0)) raise(Errc::InvalidConfig, "inflation must be >= 1");
    for (int i = 0; i < kDeductionBins; ++i) {
        double d = table.values[static_cast<std::size_t>(i)];
        if (d < 0.0 || d >= gain)
            raise(Errc::InvalidConfig, "deduction table out of [0, gain)");
        if (i > 0 && d < table.values[static_cast<std::size_t>(i - 1)])
            raise(Errc::InvalidConfig, "deduction table must be non-decreasing");
    }
}

nlohmann::json CalibrationConfig::to_json() const {
    nlohmann::json j;
    j["likelihood"]["temperature"] = {{"lower", temp_lower}, {"upper", temp_upper}};
    j["likelihood"]["lux"] = {{"lower", lux_lower}, {"upper", lux_upper}};
    j["gain"] = gain;
    j["norm_value"] = norm_value;
    j["inflation"] = inflation;
    j["deduction_table"] = table.values;
    j["poly"] = table.poly;
    j["bin_mean"] = table.bin_mean;
    j["bin_count"] = table.bin_count;
    return j;
}

CalibrationConfig CalibrationConfig::from_json(const nlohmann::json& j) {
    CalibrationConfig cfg;
    try {
        if (j.contains("likelihood")) {
            const auto& lk = j.at("likelihood");
            if (lk.contains("temperature")) {
                cfg.temp_lower = lk.at("temperature").at("lower").get<double>();
                cfg.temp_upper = lk.at("temperature").at("upper").get<double>();
            }
            if (lk.contains("lux")) {
                cfg.lux_lower = lk.at("lux").at("lower").get<double>();
                cfg.lux_upper = lk.at("lux").at("upper").get<double>();
            }
        }
        if (j.contains("gain")) cfg.gain = j.at("gain").get<double>();
        if (j.contains("norm_value")) cfg.norm_value = j.at("norm_value").get<double>();
        if (j.contains("inflation")) cfg.inflation = j.at("inflation").get<double>();
        if (j.contains("deduction_table"))
            cfg.table.values = j.at("deduction_table").get<std::array<double, kDeductionBins>>();
        if (j.contains("poly")) cfg.table.poly = j.at("poly").get<std::array<double, 4>>();
        if (j.contains("bin_mean"))
            cfg.table.bin_mean = j.at("bin_mean").get<std::array<double, kDeductionBins>>();
        if (j.contains("bin_count"))
            cfg.table.bin_count =
                j.at("bin_count").get<std::array<std::int64_t, kDeductionBins>>();
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad calibration config: ") + e.what());
    }
    cfg.check();
    return cfg;
}

CalibrationConfig CalibrationConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open calibration config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::InvalidConfig, std::string("bad calibration config json: ") + e.what());
    }
    return from_json(j);
}

void CalibrationConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) raise(Errc::IoFailure, "cannot write calibration config: " + path);
    out << to_json().dump(2) << "\n";
}

double likelihood(double value, double lower, double upper) {
    if (!(lower < upper)) raise(Errc::InvalidConfig, "likelihood bounds must satisfy lower < upper");
    if (value <= lower) return 0.0;
    if (value >= upper) return 1.0;
    return (value - lower) / (upper - lower);
}

double aggregate_likelihood(const std::vector<double>& likelihoods) {
    if (likelihoods.empty()) raise(Errc::EmptyInput, "no likelihoods to aggregate");
    double sum = 0.0;
    for (double v : likelihoods) sum += v;
    return sum / static_cast<double>(likelihoods.size());
}

double window_likelihood(const std::optional<double>& temperature,
                         const std::optional<double>& lux,
                         const CalibrationConfig& cfg) {
    double lt = temperature ? likelihood(*temperature, cfg.temp_lower, cfg.temp_upper) : 0.0;
    double ll = lux ? likelihood(*lux, cfg.lux_lower, cfg.lux_upper) : 0.0;
    return aggregate_likelihood({lt, ll});
}

int deduction_bin(double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return kDeductionBins - 1;
    int bin = static_cast<int>(std::ceil(p * kDeductionBins)) - 1;
    return std::clamp(bin, 0, kDeductionBins - 1);
}

double deduction_bin_center(int bin) {
    return 0.05 + 0.1 * bin;
}

DeductionTable fit_deduction_table(const std::vector<std::pair<double, double>>& samples,
                                   double gain, double inflation) {
    if (samples.empty()) raise(Errc::EmptyInput, "no samples for deduction fit");
    DeductionTable table;
    std::array<double, kDeductionBins> sums{};
    for (const auto& [p, count] : samples) {
        int bin = deduction_bin(p);
        sums[static_cast<std::size_t>(bin)] += count;
        ++table.bin_count[static_cast<std::size_t>(bin)];
    }

    std::vector<double> centers;
    std::vector<double> targets;
    for (int i = 0; i < kDeductionBins; ++i) {
        auto idx = static_cast<std::size_t>(i);
        if (table.bin_count[idx] == 0) continue;
        table.bin_mean[idx] =
            sums[idx] / static_cast<double>(table.bin_count[idx]) * inflation;
        centers.push_back(deduction_bin_center(i));
        targets.push_back(table.bin_mean[idx]);
    }
    if (centers.size() < 4)
        raise(Errc::InsufficientBins,
              "deduction fit needs at least 4 occupied likelihood bins, got " +
                  std::to_string(centers.size()));

    Eigen::MatrixXd vand(static_cast<Eigen::Index>(centers.size()), 4);
    Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t r = 0; r < centers.size(); ++r) {
        double c = centers[r];
        auto row = static_cast<Eigen::Index>(r);
        vand(row, 0) = 1.0;
        vand(row, 1) = c;
        vand(row, 2) = c * c;
        vand(row, 3) = c * c * c;
        y(row) = targets[r];
    }
    Eigen::Vector4d coef = vand.colPivHouseholderQr().solve(y);
    for (int i = 0; i < 4; ++i) table.poly[static_cast<std::size_t>(i)] = coef(i);

    // Table values must stay strictly under the scale so rescaling is defined.
    const double cap = std::nextafter(gain, 0.0);
    double running = 0.0;
    for (int i = 0; i < kDeductionBins; ++i) {
        double c = deduction_bin_center(i);
        double v = coef(0) + c * (coef(1) + c * (coef(2) + c * coef(3)));
        v = std::clamp(v, 0.0, cap);
        running = std::max(running, v);
        table.values[static_cast<std::size_t>(i)] = running;
    }
    return table;
}

double deduction(const DeductionTable& table, double p) {
    if (p <= 0.0) return 0.0;
    return table.values[static_cast<std::size_t>(deduction_bin(p))];
}

double calibrate(double m, double d) {
    return std::max(m - d, 0.0);
}

double rescale(double m_clamped, double d, double gain) {
    if (d >= gain)
        raise(Errc::DeductionAtCapacity, "deduction " + std::to_string(d) +
                                             " consumes the whole scale " + std::to_string(gain));
    return m_clamped * gain / (gain - d);
}

double normalize_motion(double m, double norm_value) {
    if (!(norm_value > 0.0)) raise(Errc::InvalidConfig, "norm_value must be positive");
    return std::clamp(m / norm_value, 0.0, 1.0);
}

double cdf_threshold(std::vector<double> values, double q) {
    if (values.empty()) raise(Errc::EmptyInput, "cdf_threshold on empty sample");
    if (!(q > 0.0) || q > 1.0) raise(Errc::InvalidConfig, "quantile must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    auto n = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    if (k < 1) k = 1;
    if (k > values.size()) k = values.size();
    return values[k - 1];
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) raise(Errc::InvalidConfig, "pearson inputs differ in length");
    if (x.size() < 2) raise(Errc::TooFewSamples, "pearson needs at least 2 samples");
    auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        raise(Errc::ZeroVariance, "pearson undefined for a constant series");
    return sxy / std::sqrt(sxx * syy);
}

MotionSeries calibrate_frame(const timeline::AlignedFrame& frame,
                             const CalibrationConfig& cfg) {
    cfg.check();
    MotionSeries series;
    series.node_uid = frame.node_uid;
    for (const auto& row : frame.rows) {
        if (!row.motion) {
            ++series.windows_without_motion;
            continue;
        }
        MotionPoint pt;
        pt.window_start_ms = row.timestamp_ms;
        pt.raw = *row.motion;
        pt.p = window_likelihood(row.temperature, row.lux, cfg);
        pt.d = deduction(cfg.table, pt.p);
        pt.rescaled = rescale(calibrate(pt.raw, pt.d), pt.d, cfg.gain);
        pt.eta = normalize_motion(pt.rescaled, cfg.norm_value);
        series.points.push_back(pt);
    }
    return series;
}

} // namespace spaceutil::motion
