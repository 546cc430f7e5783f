#include "spaceutil/hcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spaceutil/error.hpp"
#include "spaceutil/motion_calib.hpp"

namespace spaceutil::cluster {

const char* linkage_name(Linkage linkage) {
    switch (linkage) {
        case Linkage::Single: return "single";
        case Linkage::Complete: return "complete";
        case Linkage::Average: return "average";
        case Linkage::Ward: return "ward";
    }
    return "unknown";
}

Linkage linkage_from_name(const std::string& name) {
    for (Linkage l : kAllLinkages)
        if (name == linkage_name(l)) return l;
    raise(Errc::InvalidConfig, "unknown linkage: " + name);
}

CondensedDistances::CondensedDistances(std::size_t n) : n_(n) {
    if (n < 2) raise(Errc::TooFewSamples, "distance matrix needs at least 2 points");
    data_.assign(n * (n - 1) / 2, 0.0);
}

namespace {

inline std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
    // caller guarantees i < j < n
    return n * i - i * (i + 1) / 2 + j - i - 1;
}

} // namespace

double& CondensedDistances::at(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return data_[condensed_index(n_, i, j)];
}

double CondensedDistances::at(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return data_[condensed_index(n_, i, j)];
}

CondensedDistances CondensedDistances::from_points(const Eigen::MatrixXd& X) {
    auto n = static_cast<std::size_t>(X.rows());
    CondensedDistances d(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            d.at(i, j) = (X.row(static_cast<Eigen::Index>(i)) -
                          X.row(static_cast<Eigen::Index>(j)))
                             .norm();
    return d;
}

namespace {

// Lance-Williams update of d(a|b, c).  For ward all three inputs are squared
// distances and the result is squared as well.
double lw_update(Linkage linkage, double dac, double dbc, double dab, double na, double nb,
                 double nc) {
    switch (linkage) {
        case Linkage::Single:
            return std::min(dac, dbc);
        case Linkage::Complete:
            return std::max(dac, dbc);
        case Linkage::Average:
            return (na * dac + nb * dbc) / (na + nb);
        case Linkage::Ward: {
            double t = na + nb + nc;
            return ((na + nc) * dac + (nb + nc) * dbc - nc * dab) / t;
        }
    }
    return 0.0;
}

struct RawMerge {
    int a = 0;  // slot ids; each slot always contains its own leaf
    int b = 0;
    double height = 0.0;
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

} // namespace

Dendrogram linkage_cluster(const CondensedDistances& d, Linkage linkage) {
    const std::size_t n = d.points();
    std::vector<double> work = d.raw();
    if (linkage == Linkage::Ward)
        for (double& v : work) v *= v;

    auto dist = [&](int i, int j) -> double& {
        auto a = static_cast<std::size_t>(std::min(i, j));
        auto b = static_cast<std::size_t>(std::max(i, j));
        return work[condensed_index(n, a, b)];
    };

    std::vector<bool> active(n, true);
    std::vector<double> size(n, 1.0);
    std::vector<int> chain;
    chain.reserve(n);
    std::vector<RawMerge> raw;
    raw.reserve(n - 1);

    while (raw.size() < n - 1) {
        if (chain.empty()) {
            for (std::size_t i = 0; i < n; ++i)
                if (active[i]) {
                    chain.push_back(static_cast<int>(i));
                    break;
                }
        }
        while (true) {
            int a = chain.back();
            int prev = chain.size() >= 2 ? chain[chain.size() - 2] : -1;
            // Prefer the chain predecessor on ties so mutual pairs terminate.
            int best = prev;
            double best_d = prev >= 0 ? dist(a, prev) : std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < n; ++c) {
                if (!active[c] || static_cast<int>(c) == a || static_cast<int>(c) == prev)
                    continue;
                double dc = dist(a, static_cast<int>(c));
                if (dc < best_d) {
                    best_d = dc;
                    best = static_cast<int>(c);
                }
            }
            if (best == prev && prev >= 0) {
                // a and prev are mutual nearest neighbors: merge them.
                chain.pop_back();
                chain.pop_back();
                double height = linkage == Linkage::Ward ? std::sqrt(best_d) : best_d;
                double na = size[static_cast<std::size_t>(prev)];
                double nb = size[static_cast<std::size_t>(a)];
                double dab = best_d;
                for (std::size_t c = 0; c < n; ++c) {
                    if (!active[c] || static_cast<int>(c) == a || static_cast<int>(c) == prev)
                        continue;
                    double dac = dist(prev, static_cast<int>(c));
                    double dbc = dist(a, static_cast<int>(c));
                    dist(a, static_cast<int>(c)) =
                        lw_update(linkage, dac, dbc, dab, na, nb, size[c]);
                }
                active[static_cast<std::size_t>(prev)] = false;
                size[static_cast<std::size_t>(a)] = na + nb;
                raw.push_back({prev, a, height});
                break;
            }
            chain.push_back(best);
        }
    }

    // The chain finds merges out of height order; sort and renumber into the
    // conventional leaf/internal node ids.  A stable sort keeps equal-height
    // merges in discovery order, which is always child before parent.
    std::stable_sort(raw.begin(), raw.end(),
                     [](const RawMerge& x, const RawMerge& y) { return x.height < y.height; });

    Dendrogram dend;
    dend.n = n;
    dend.linkage = linkage;
    dend.merges.reserve(n - 1);
    UnionFind uf(n);
    std::vector<int> node_id(n);
    std::iota(node_id.begin(), node_id.end(), 0);
    int next_id = static_cast<int>(n);
    for (const RawMerge& m : raw) {
        int ra = uf.find(m.a);
        int rb = uf.find(m.b);
        int ida = node_id[static_cast<std::size_t>(ra)];
        int idb = node_id[static_cast<std::size_t>(rb)];
        dend.merges.push_back({std::min(ida, idb), std::max(ida, idb), m.height});
        uf.unite(ra, rb);
        node_id[static_cast<std::size_t>(uf.find(ra))] = next_id++;
    }
    return dend;
}

std::vector<double> cophenetic(const Dendrogram& dend) {
    const std::size_t n = dend.n;
    std::vector<double> out(n * (n - 1) / 2, 0.0);
    // members[k] lists the leaves below node k (leaves and internal nodes).
    std::vector<std::vector<int>> members(n + dend.merges.size());
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};
    for (std::size_t k = 0; k < dend.merges.size(); ++k) {
        const Merge& m = dend.merges[k];
        const auto& left = members[static_cast<std::size_t>(m.left)];
        const auto& right = members[static_cast<std::size_t>(m.right)];
        for (int u : left)
            for (int v : right) {
                auto i = static_cast<std::size_t>(std::min(u, v));
                auto j = static_cast<std::size_t>(std::max(u, v));
                out[condensed_index(n, i, j)] = m.height;
            }
        auto& merged = members[n + k];
        merged.reserve(left.size() + right.size());
        merged.insert(merged.end(), left.begin(), left.end());
        merged.insert(merged.end(), right.begin(), right.end());
        members[static_cast<std::size_t>(m.left)].clear();
        members[static_cast<std::size_t>(m.right)].clear();
    }
    return out;
}

double ccc(const Dendrogram& dend, const CondensedDistances& d) {
    if (dend.n != d.points())
        raise(Errc::InvalidConfig, "dendrogram and distances disagree on point count");
    return motion::pearson(d.raw(), cophenetic(dend));
}

LinkageSelection cluster_select(const CondensedDistances& d) {
    if (d.points() < 3)
        raise(Errc::TooFewSamples, "linkage selection needs at least 3 points");
    LinkageSelection sel;
    sel.ccc_by_linkage.fill(std::numeric_limits<double>::quiet_NaN());
    bool have = false;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kAllLinkages.size(); ++i) {
        Linkage l = kAllLinkages[i];
        Dendrogram dend = linkage_cluster(d, l);
        double c = 0.0;
        try {
            c = ccc(dend, d);
        } catch (const Error& e) {
            if (e.code() == Errc::ZeroVariance) continue;
            throw;
        }
        sel.ccc_by_linkage[i] = c;
        if (!have || c > best) {
            have = true;
            best = c;
            sel.linkage = l;
            sel.dendrogram = std::move(dend);
        }
    }
    if (!have)
        raise(Errc::ZeroVariance, "cophenetic correlation undefined for every linkage");
    return sel;
}

std::vector<int> cut_k(const Dendrogram& dend, std::size_t k) {
    const std::size_t n = dend.n;
    if (k < 1 || k > n) raise(Errc::InvalidConfig, "cut size outside [1, n]");
    UnionFind uf(n);
    std::vector<int> node_repr(n + dend.merges.size());
    std::iota(node_repr.begin(), node_repr.end(), 0);
    for (std::size_t m = 0; m < n - k; ++m) {
        int left = node_repr[static_cast<std::size_t>(dend.merges[m].left)];
        int right = node_repr[static_cast<std::size_t>(dend.merges[m].right)];
        uf.unite(left, right);
        node_repr[n + m] = uf.find(left);
    }
    std::vector<int> labels(n, 0);
    std::vector<int> order(n, 0);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int root = uf.find(static_cast<int>(i));
        if (order[static_cast<std::size_t>(root)] == 0) order[static_cast<std::size_t>(root)] = ++next;
        labels[i] = order[static_cast<std::size_t>(root)];
    }
    return labels;
}

double ch_index(const Eigen::MatrixXd& X, const std::vector<int>& labels, ChDenominator denom) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (labels.size() != n) raise(Errc::InvalidConfig, "label count does not match data");
    int k = 0;
    for (int l : labels) k = std::max(k, l);
    if (k < 2) raise(Errc::InvalidConfig, "variance ratio needs at least 2 clusters");

    Eigen::VectorXd overall = X.colwise().mean();
    Eigen::MatrixXd centroid = Eigen::MatrixXd::Zero(k, X.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < n; ++i) {
        int c = labels[i] - 1;
        if (c < 0) raise(Errc::InvalidConfig, "labels must be positive");
        centroid.row(c) += X.row(static_cast<Eigen::Index>(i));
        count(c) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
        if (count(c) == 0.0) raise(Errc::InvalidConfig, "empty cluster label");
        centroid.row(c) /= count(c);
    }

    double between = 0.0;
    for (int c = 0; c < k; ++c)
        between += count(c) * (centroid.row(c) - overall.transpose()).squaredNorm();
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        within += (X.row(static_cast<Eigen::Index>(i)) - centroid.row(labels[i] - 1)).squaredNorm();

    double df_within = denom == ChDenominator::Standard
                           ? static_cast<double>(n) - static_cast<double>(k)
                           : static_cast<double>(n) - 1.0;
    if (within <= 0.0 || df_within <= 0.0) return std::numeric_limits<double>::infinity();
    return (between / (static_cast<double>(k) - 1.0)) / (within / df_within);
}

KSelection choose_k(const Eigen::MatrixXd& X, const Dendrogram& dend, std::size_t max_k,
                    ChDenominator denom) {
    const std::size_t n = dend.n;
    if (static_cast<std::size_t>(X.rows()) != n)
        raise(Errc::InvalidConfig, "data and dendrogram disagree on point count");
    if (n < 3) raise(Errc::TooFewSamples, "cluster count selection needs at least 3 points");
    std::size_t hi = std::min(max_k, n - 1);

    KSelection sel;
    for (std::size_t k = 2; k <= hi; ++k) {
        std::vector<int> labels = cut_k(dend, k);
        double ch = ch_index(X, labels, denom);
        sel.ch_by_k.push_back(ch);
        if (sel.k == 0 || ch > sel.ch_by_k[sel.k - 2]) {
            sel.k = k;
            sel.labels = std::move(labels);
        }
    }
    return sel;
}

} // namespace spaceutil::cluster
