#pragma once

// Reference implementations for cross-checking the library. Everything here
// recomputes results from first principles with plain loops: no call may
// share code with the routine it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spaceutil/hcluster.hpp"

namespace oracle {

// Least-squares cubic through (x, y) via the normal equations and Gaussian
// elimination with partial pivoting. Coefficients ascending.
inline std::array<double, 4> cubic_fit(const std::vector<double>& x,
                                       const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 4) throw std::invalid_argument("cubic_fit input");
    double a[4][5] = {};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c)
            for (std::size_t i = 0; i < x.size(); ++i) a[r][c] += std::pow(x[i], r + c);
        for (std::size_t i = 0; i < x.size(); ++i) a[r][4] += std::pow(x[i], r) * y[i];
    }
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        for (int c = 0; c < 5; ++c) std::swap(a[col][c], a[pivot][c]);
        for (int r = col + 1; r < 4; ++r) {
            double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::array<double, 4> coeff{};
    for (int r = 3; r >= 0; --r) {
        double s = a[r][4];
        for (int c = r + 1; c < 4; ++c) s -= a[r][c] * coeff[static_cast<std::size_t>(c)];
        coeff[static_cast<std::size_t>(r)] = s / a[r][r];
    }
    return coeff;
}

// The orthonormal 8-point Haar basis written out digit by digit.
// s = 1/sqrt(8), q = 1/2, h = 1/sqrt(2).
inline std::array<std::array<double, 8>, 8> haar_matrix_literal() {
    const double s = 0.35355339059327373;  // 1/sqrt(8)
    const double q = 0.5;
    const double h = 0.7071067811865476;  // 1/sqrt(2)
    return {{{s, s, s, s, s, s, s, s},
             {s, s, s, s, -s, -s, -s, -s},
             {q, q, -q, -q, 0, 0, 0, 0},
             {0, 0, 0, 0, q, q, -q, -q},
             {h, -h, 0, 0, 0, 0, 0, 0},
             {0, 0, h, -h, 0, 0, 0, 0},
             {0, 0, 0, 0, h, -h, 0, 0},
             {0, 0, 0, 0, 0, 0, h, -h}}};
}

inline std::array<double, 8> haar_apply_literal(const std::array<double, 8>& v) {
    auto m = haar_matrix_literal();
    std::array<double, 8> out{};
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            out[static_cast<std::size_t>(r)] +=
                m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] *
                v[static_cast<std::size_t>(c)];
    return out;
}

// Residual energy ratio after reconstructing every sample from the top p
// eigenvectors of the centered scatter, relative to the raw (uncentered)
// energy. Reconstruction is spelled out per sample.
inline double reconstruction_ratio(const Eigen::MatrixXd& X, int p) {
    const auto n = X.rows();
    const auto d = X.cols();
    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    // eigenvalues ascending; take the last p columns as the kept basis
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd xi = X.row(i).transpose();
        Eigen::VectorXd rec = mean;
        for (int k = 0; k < p; ++k) {
            Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - k);
            rec += v * (v.dot(xi - mean));
        }
        num += (xi - rec).squaredNorm();
        den += xi.squaredNorm();
    }
    return den > 0.0 ? num / den : 0.0;
}

inline int smallest_p(const Eigen::MatrixXd& X, double residual_bound) {
    // At least one component is always kept.
    for (int p = 1; p < X.cols(); ++p)
        if (reconstruction_ratio(X, p) <= residual_bound) return p;
    return static_cast<int>(X.cols());
}

// Cophenetic distance of one leaf pair: walk the merge list keeping member
// sets and report the height of the merge that first unites them.
inline double pair_cophenetic(const spaceutil::cluster::Dendrogram& tree, int n, int i, int j) {
    std::vector<std::vector<int>> members(static_cast<std::size_t>(n) +
                                          tree.merges.size());
    for (int leaf = 0; leaf < n; ++leaf) members[static_cast<std::size_t>(leaf)] = {leaf};
    for (std::size_t m = 0; m < tree.merges.size(); ++m) {
        const auto& merge = tree.merges[m];
        auto& dst = members[static_cast<std::size_t>(n) + m];
        dst = members[static_cast<std::size_t>(merge.left)];
        dst.insert(dst.end(), members[static_cast<std::size_t>(merge.right)].begin(),
                   members[static_cast<std::size_t>(merge.right)].end());
        bool has_i = false, has_j = false;
        for (int leaf : dst) {
            has_i |= leaf == i;
            has_j |= leaf == j;
        }
        if (has_i && has_j) return merge.height;
    }
    throw std::logic_error("pair never merged");
}

// CCC as the paper's double loop: plain Pearson over all ordered pairs.
inline double ccc_double_loop(const spaceutil::cluster::CondensedDistances& d,
                              const spaceutil::cluster::Dendrogram& tree) {
    const int n = static_cast<int>(d.points());
    double sum_x = 0, sum_y = 0;
    int m = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            sum_x += d.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            sum_y += pair_cophenetic(tree, n, i, j);
            ++m;
        }
    double mx = sum_x / m, my = sum_y / m;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx = d.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - mx;
            double dy = pair_cophenetic(tree, n, i, j) - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    return sxy / std::sqrt(sxx * syy);
}

// Dispersion ratio from explicit centroids. labels are 1-based.
inline double ch_explicit(const Eigen::MatrixXd& X, const std::vector<int>& labels, int k,
                          bool denominator_n_minus_1) {
    const auto n = X.rows();
    Eigen::VectorXd grand = X.colwise().mean();
    std::vector<Eigen::VectorXd> centroid(static_cast<std::size_t>(k),
                                          Eigen::VectorXd::Zero(X.cols()));
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        centroid[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)] - 1)] +=
            X.row(i).transpose();
        ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)] - 1)];
    }
    for (int c = 0; c < k; ++c) centroid[static_cast<std::size_t>(c)] /= count[static_cast<std::size_t>(c)];
    double between = 0, within = 0;
    for (int c = 0; c < k; ++c)
        between += count[static_cast<std::size_t>(c)] *
                   (centroid[static_cast<std::size_t>(c)] - grand).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
        within += (X.row(i).transpose() -
                   centroid[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)] - 1)])
                      .squaredNorm();
    double df = denominator_n_minus_1 ? static_cast<double>(n - 1)
                                      : static_cast<double>(n - k);
    if (within <= 0.0 || df <= 0.0 || k < 2) return std::numeric_limits<double>::infinity();
    return (between / (k - 1)) / (within / df);
}

// Lower-step empirical quantile: smallest sample with CDF >= q.
inline double quantile_lower_step(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    for (std::size_t k = 1; k <= v.size(); ++k)
        if (static_cast<double>(k) / static_cast<double>(v.size()) >= q - 1e-12)
            return v[k - 1];
    return v.back();
}

} // namespace oracle
