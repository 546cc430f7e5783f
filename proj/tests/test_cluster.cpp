#include <doctest.h>

#include <random>

#include "oracle_helpers.hpp"
#include "spaceutil/error.hpp"
#include "spaceutil/hcluster.hpp"

using namespace spaceutil;
using cluster::CondensedDistances;
using cluster::Linkage;

namespace {

CondensedDistances random_instance(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.1, 10.0);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (int c = 0; c < 3; ++c) X(i, c) = u(rng);
    return CondensedDistances::from_points(X);
}

} // namespace

TEST_CASE("condensed layout addresses the upper triangle") {
    CondensedDistances d(4);
    double v = 1.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) d.at(i, j) = v++;
    CHECK(d.pairs() == 6);
    CHECK(d.at(0, 1) == 1.0);
    CHECK(d.at(1, 0) == 1.0);  // symmetric access
    CHECK(d.at(2, 3) == 6.0);
    CHECK(d.raw()[1] == 2.0);
}

TEST_CASE("hand-checked three-point dendrograms") {
    // 1-D points {0, 1, 5}: d01=1, d02=5, d12=4.
    Eigen::MatrixXd X(3, 1);
    X << 0.0, 1.0, 5.0;
    auto d = CondensedDistances::from_points(X);

    auto single = cluster::linkage_cluster(d, Linkage::Single);
    REQUIRE(single.merges.size() == 2);
    CHECK(single.merges[0].left == 0);
    CHECK(single.merges[0].right == 1);
    CHECK(single.merges[0].height == doctest::Approx(1.0));
    CHECK(single.merges[1].height == doctest::Approx(4.0));

    auto complete = cluster::linkage_cluster(d, Linkage::Complete);
    CHECK(complete.merges[1].height == doctest::Approx(5.0));

    auto average = cluster::linkage_cluster(d, Linkage::Average);
    CHECK(average.merges[1].height == doctest::Approx(4.5));

    // Ward joins {0,1} with {5}: sqrt( (2*2*1/3) * |0.5-5|^2 ) = sqrt(27).
    auto ward = cluster::linkage_cluster(d, Linkage::Ward);
    CHECK(ward.merges[0].height == doctest::Approx(1.0));
    CHECK(ward.merges[1].height == doctest::Approx(std::sqrt(27.0)));
}

TEST_CASE("merge heights are non-decreasing for every linkage") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        auto d = random_instance(rng, 2 + static_cast<std::size_t>(trial) % 30);
        for (Linkage linkage : cluster::kAllLinkages) {
            auto tree = cluster::linkage_cluster(d, linkage);
            for (std::size_t m = 1; m < tree.merges.size(); ++m)
                CHECK(tree.merges[m].height >= tree.merges[m - 1].height - 1e-12);
        }
    }
}

TEST_CASE("cophenetic distances match a per-pair tree walk") {
    std::mt19937 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        auto d = random_instance(rng, 12);
        for (Linkage linkage : cluster::kAllLinkages) {
            auto tree = cluster::linkage_cluster(d, linkage);
            auto coph = cluster::cophenetic(tree);
            std::size_t idx = 0;
            for (int i = 0; i < 12; ++i)
                for (int j = i + 1; j < 12; ++j)
                    CHECK(coph[idx++] ==
                          doctest::Approx(oracle::pair_cophenetic(tree, 12, i, j)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ccc equals the double-loop definition") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<std::size_t> size(4, 50);
    for (int trial = 0; trial < 100; ++trial) {
        auto d = random_instance(rng, size(rng));
        for (Linkage linkage : {Linkage::Average, Linkage::Ward}) {
            auto tree = cluster::linkage_cluster(d, linkage);
            CHECK(cluster::ccc(tree, d) ==
                  doctest::Approx(oracle::ccc_double_loop(d, tree)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ultrametric distances give ccc of exactly one") {
    // Two tight pairs far apart; the strong triangle inequality holds.
    CondensedDistances d(4);
    d.at(0, 1) = 1.0;
    d.at(2, 3) = 1.0;
    for (std::size_t i : {0u, 1u})
        for (std::size_t j : {2u, 3u}) d.at(i, j) = 10.0;
    auto tree = cluster::linkage_cluster(d, Linkage::Single);
    CHECK(cluster::ccc(tree, d) == doctest::Approx(1.0).epsilon(1e-12));

    auto selection = cluster::cluster_select(d);
    CHECK(selection.linkage == Linkage::Single);  // tie broken by fixed order
    CHECK(selection.ccc_by_linkage[0] == doctest::Approx(1.0));
}

TEST_CASE("ccc is invariant under positive scaling of the distances") {
    std::mt19937 rng(24);
    auto d = random_instance(rng, 20);
    auto scaled = d;
    for (double& v : scaled.raw()) v *= 37.5;
    for (Linkage linkage : cluster::kAllLinkages) {
        double a = cluster::ccc(cluster::linkage_cluster(d, linkage), d);
        double b = cluster::ccc(cluster::linkage_cluster(scaled, linkage), scaled);
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("degenerate ccc inputs raise") {
    CondensedDistances d(3);
    d.at(0, 1) = d.at(0, 2) = d.at(1, 2) = 2.0;  // all pairs identical
    auto tree = cluster::linkage_cluster(d, Linkage::Single);
    CHECK_THROWS_AS(cluster::ccc(tree, d), Error);

    CondensedDistances two(2);
    two.at(0, 1) = 1.0;
    CHECK_THROWS_AS(cluster::cluster_select(two), Error);
}

TEST_CASE("cut_k labels by smallest member, every label used") {
    Eigen::MatrixXd X(6, 1);
    X << 0.0, 0.1, 5.0, 5.1, 9.0, 9.1;
    auto d = CondensedDistances::from_points(X);
    auto tree = cluster::linkage_cluster(d, Linkage::Average);
    auto labels = cluster::cut_k(tree, 3);
    CHECK(labels == std::vector<int>{1, 1, 2, 2, 3, 3});
    auto two = cluster::cut_k(tree, 2);
    CHECK(two[0] == 1);
    CHECK(*std::max_element(two.begin(), two.end()) == 2);
}

TEST_CASE("ch index matches explicit centroid arithmetic") {
    std::mt19937 rng(25);
    for (int trial = 0; trial < 40; ++trial) {
        auto n = static_cast<Eigen::Index>(8 + trial);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        Eigen::MatrixXd X(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, 0) = u(rng);
            X(i, 1) = u(rng);
        }
        auto d = CondensedDistances::from_points(X);
        auto tree = cluster::linkage_cluster(d, Linkage::Ward);
        for (std::size_t k = 2; k < 6; ++k) {
            auto labels = cluster::cut_k(tree, k);
            CHECK(cluster::ch_index(X, labels, cluster::ChDenominator::Standard) ==
                  doctest::Approx(oracle::ch_explicit(X, labels, static_cast<int>(k), false))
                      .epsilon(1e-9));
            CHECK(cluster::ch_index(X, labels, cluster::ChDenominator::TotalMinusOne) ==
                  doctest::Approx(oracle::ch_explicit(X, labels, static_cast<int>(k), true))
                      .epsilon(1e-9));
        }
    }
}

TEST_CASE("identical-point clusters score infinite and win") {
    Eigen::MatrixXd X(6, 1);
    X << 1.0, 1.0, 1.0, 4.0, 4.0, 4.0;
    auto d = CondensedDistances::from_points(X);
    auto tree = cluster::linkage_cluster(d, Linkage::Single);
    auto pick = cluster::choose_k(X, tree, 5);
    CHECK(pick.k == 2);
    CHECK(std::isinf(pick.ch_by_k[0]));
}

TEST_CASE("choose_k argmax equals the exhaustive scan") {
    std::mt19937 rng(26);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        // three loose blobs, cluster count not obvious
        Eigen::MatrixXd X(30, 2);
        for (Eigen::Index i = 0; i < 30; ++i) {
            double cx = (i % 3) * 4.0;
            X(i, 0) = cx + z(rng) * 1.2;
            X(i, 1) = z(rng) * 1.2;
        }
        auto d = CondensedDistances::from_points(X);
        auto tree = cluster::linkage_cluster(d, Linkage::Ward);
        auto pick = cluster::choose_k(X, tree, 10);

        std::size_t best_k = 0;
        double best = -1.0;
        for (std::size_t k = 2; k <= 10; ++k) {
            double v = oracle::ch_explicit(X, cluster::cut_k(tree, k), static_cast<int>(k), false);
            if (v > best) {
                best = v;
                best_k = k;
            }
        }
        CHECK(pick.k == best_k);
    }
}

TEST_CASE("collinear points match the oracle with a narrow k range") {
    Eigen::MatrixXd X(9, 1);
    for (Eigen::Index i = 0; i < 9; ++i) X(i, 0) = static_cast<double>(i);
    auto d = CondensedDistances::from_points(X);
    auto tree = cluster::linkage_cluster(d, Linkage::Average);
    auto pick = cluster::choose_k(X, tree, 3);
    double ch2 = oracle::ch_explicit(X, cluster::cut_k(tree, 2), 2, false);
    double ch3 = oracle::ch_explicit(X, cluster::cut_k(tree, 3), 3, false);
    CHECK(pick.k == (ch3 > ch2 ? 3u : 2u));
}

TEST_CASE("three well-separated groups select three clusters") {
    std::mt19937 rng(27);
    std::normal_distribution<double> z(0.0, 0.2);
    Eigen::MatrixXd X(45, 2);
    for (Eigen::Index i = 0; i < 45; ++i) {
        X(i, 0) = (i % 3) * 10.0 + z(rng);
        X(i, 1) = (i % 3 == 1 ? 8.0 : 0.0) + z(rng);
    }
    auto selection = cluster::cluster_select(CondensedDistances::from_points(X));
    auto pick = cluster::choose_k(X, selection.dendrogram, 10);
    CHECK(pick.k == 3);
}
