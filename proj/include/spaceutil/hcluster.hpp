#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace spaceutil::cluster {

enum class Linkage { Single = 0, Complete, Average, Ward };
constexpr std::array<Linkage, 4> kAllLinkages{Linkage::Single, Linkage::Complete,
                                              Linkage::Average, Linkage::Ward};
const char* linkage_name(Linkage linkage);
Linkage linkage_from_name(const std::string& name);

// Pairwise distances of n points, stored upper-triangular row-major.
class CondensedDistances {
public:
    explicit CondensedDistances(std::size_t n);
    static CondensedDistances from_points(const Eigen::MatrixXd& X);

    std::size_t points() const { return n_; }
    std::size_t pairs() const { return data_.size(); }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

private:
    std::size_t n_;
    std::vector<double> data_;
};

// One agglomeration step.  Node ids follow the usual convention: 0..n-1 are
// leaves, n+k is the cluster created by merge k.  left < right.
struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
};

struct Dendrogram {
    std::size_t n = 0;
    Linkage linkage = Linkage::Single;
    std::vector<Merge> merges;  // n-1 rows, heights non-decreasing
};

// Agglomerative clustering via the nearest-neighbor chain, with
// Lance-Williams distance updates.  Ward works on squared distances and
// reports square-rooted heights, so heights stay commensurate with the
// input metric for all four linkages.
Dendrogram linkage_cluster(const CondensedDistances& d, Linkage linkage);

// Cophenetic distance of every pair: the height of the merge that first put
// the two points into one cluster.  Condensed layout, same order as the
// distance input.
std::vector<double> cophenetic(const Dendrogram& dend);

// Cophenetic correlation coefficient: Pearson correlation between original
// and cophenetic distances.  Throws ZeroVariance when either side is
// constant.
double ccc(const Dendrogram& dend, const CondensedDistances& d);

struct LinkageSelection {
    Linkage linkage = Linkage::Single;
    Dendrogram dendrogram;
    std::array<double, 4> ccc_by_linkage{};  // NaN where undefined
};

// Builds all four dendrograms and keeps the one with the highest cophenetic
// correlation.  Linkages with undefined correlation are skipped; ties keep
// the earlier entry of kAllLinkages.
LinkageSelection cluster_select(const CondensedDistances& d);

// Flat clustering from the first n-k merges.  Labels run 1..k, numbered by
// each cluster's smallest member index.
std::vector<int> cut_k(const Dendrogram& dend, std::size_t k);

enum class ChDenominator { Standard, TotalMinusOne };

// Variance ratio criterion for a flat clustering.  Returns +inf when the
// within-cluster scatter vanishes.
double ch_index(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                ChDenominator denom = ChDenominator::Standard);

struct KSelection {
    std::size_t k = 0;
    std::vector<int> labels;
    std::vector<double> ch_by_k;  // index 0 is k=2
};

// Scans k = 2..min(max_k, n-1) and keeps the flat cut with the highest
// index; ties keep the smaller k.
KSelection choose_k(const Eigen::MatrixXd& X, const Dendrogram& dend, std::size_t max_k = 10,
                    ChDenominator denom = ChDenominator::Standard);

} // namespace spaceutil::cluster
