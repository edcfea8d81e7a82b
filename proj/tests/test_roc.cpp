#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "ranktest/rng.hpp"
#include "ranktest/roc.hpp"

using namespace ranktest;

namespace {

std::vector<double> random_scores(Rng& rng, int n) {
    std::vector<double> v(n);
    for (auto& s : v) s = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("empirical_roc breakpoints") {
    // neg = {1, 3}, pos = {2, 4}: alternating, no ties
    auto c = empirical_roc({1, 3}, {2, 4});
    std::vector<std::pair<double, double>> want = {
        {0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
    REQUIRE(c.breakpoints.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(c.breakpoints[i].first == doctest::Approx(want[i].first).epsilon(1e-14));
        CHECK(c.breakpoints[i].second == doctest::Approx(want[i].second).epsilon(1e-14));
    }

    // perfect separation
    auto p = empirical_roc({1, 2}, {3, 4});
    CHECK(auc_from_curve(p) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.at(0.0) == doctest::Approx(1.0).epsilon(1e-14));

    // all tied: single diagonal segment
    auto t = empirical_roc({5, 5}, {5, 5});
    REQUIRE(t.breakpoints.size() == 2);
    CHECK(auc_from_curve(t) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(roc_distance(t, RocMetric::Sup) == 0.0);
    CHECK(roc_distance(t, RocMetric::L1) == 0.0);
}

TEST_CASE("auc examples") {
    CHECK(auc_pairwise({1, 3}, {2, 4}) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(auc_pairwise({1}, {1}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(auc_pairwise({1, 2}, {3, 4}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(auc_pairwise({3, 4}, {1, 2}) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("auc_from_curve equals auc_pairwise") {
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 1 + static_cast<int>(rng.uniform_below(30));
        int m = 1 + static_cast<int>(rng.uniform_below(30));
        auto neg = random_scores(rng, n);
        auto pos = random_scores(rng, m);
        if (rep % 3 == 0)  // inject ties
            for (auto& v : neg) v = std::floor(3 * v);
        if (rep % 3 == 0)
            for (auto& v : pos) v = std::floor(3 * v);
        double a = auc_pairwise(neg, pos);
        double b = auc_from_curve(empirical_roc(neg, pos));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(auc_pairwise_serial(neg, pos) == a);  // OpenMP path must match exactly
    }
}

TEST_CASE("roc_distance") {
    RocCurve diag{{{0, 0}, {1, 1}}};
    CHECK(roc_distance(diag, RocMetric::L1) == 0.0);
    CHECK(roc_distance(diag, RocMetric::Sup) == 0.0);

    RocCurve corner{{{0, 0}, {0, 1}, {1, 1}}};
    CHECK(roc_distance(corner, RocMetric::L1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(roc_distance(corner, RocMetric::Sup) == doctest::Approx(1.0).epsilon(1e-14));

    auto c = empirical_roc({1, 3}, {2, 4});
    CHECK(roc_distance(c, RocMetric::L1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(roc_distance(c, RocMetric::Sup) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("invariance properties") {
    Rng rng(23);
    auto neg = random_scores(rng, 40);
    auto pos = random_scores(rng, 35);
    double a = auc_pairwise(neg, pos);

    // strictly increasing transforms leave the empirical ROC unchanged
    auto tneg = neg, tpos = pos;
    for (auto& v : tneg) v = std::exp(2.0 * v) + 1.0;
    for (auto& v : tpos) v = std::exp(2.0 * v) + 1.0;
    CHECK(auc_pairwise(tneg, tpos) == doctest::Approx(a).epsilon(1e-13));
    auto c1 = empirical_roc(neg, pos);
    auto c2 = empirical_roc(tneg, tpos);
    REQUIRE(c1.breakpoints.size() == c2.breakpoints.size());
    for (std::size_t i = 0; i < c1.breakpoints.size(); ++i) {
        CHECK(c1.breakpoints[i].first == doctest::Approx(c2.breakpoints[i].first));
        CHECK(c1.breakpoints[i].second == doctest::Approx(c2.breakpoints[i].second));
    }

    // negating scores reflects the AUC
    auto nneg = neg, npos = pos;
    for (auto& v : nneg) v = -v;
    for (auto& v : npos) v = -v;
    CHECK(auc_pairwise(nneg, npos) == doctest::Approx(1.0 - a).epsilon(1e-13));
}

TEST_CASE("mid-distribution AUC identity") {
    // AUC = 1/2 + mean(G_mid(X)) - mean(H_mid(Y)) with mid-cdfs of the
    // opposite sample; exact on tie-free data
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        int n = 5 + static_cast<int>(rng.uniform_below(25));
        int m = 5 + static_cast<int>(rng.uniform_below(25));
        auto neg = random_scores(rng, n);
        auto pos = random_scores(rng, m);
        auto mid_cdf = [](const std::vector<double>& ref, double t) {
            double lt = 0, le = 0;
            for (double r : ref) {
                if (r < t) lt += 1;
                if (r <= t) le += 1;
            }
            return (lt + le) / (2.0 * ref.size());
        };
        double gx = 0;  // mean over negatives of the positive-sample mid-cdf
        for (double v : neg) gx += mid_cdf(pos, v);
        gx /= n;
        double hy = 0;  // mean over positives of the negative-sample mid-cdf
        for (double v : pos) hy += mid_cdf(neg, v);
        hy /= m;
        double auc = auc_pairwise(neg, pos);
        CHECK(auc == doctest::Approx(0.5 + 0.5 * (hy - gx)).epsilon(1e-12));
    }
}

TEST_CASE("GaussianOracle") {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    GaussianOracle null_oracle(zero, id);
    CHECK(null_oracle.auc_star() == doctest::Approx(0.5).epsilon(1e-13));
    for (double a : {0.01, 0.2, 0.5, 0.9})
        CHECK(null_oracle.roc_star(a) == doctest::Approx(a).epsilon(1e-12));

    Eigen::VectorXd d1(1);
    d1 << 1.0;
    Eigen::MatrixXd g1 = Eigen::MatrixXd::Identity(1, 1);
    GaussianOracle unit(d1, g1);
    CHECK(unit.separation() == doctest::Approx(1.0).epsilon(1e-13));
    // Phi(1/sqrt(2) * sqrt(2)/... ) check against frozen Phi(1) via the
    // separation-2 oracle: AUC* = Phi(sqrt(2)/sqrt(2)) = Phi(1)
    Eigen::VectorXd d2(1);
    d2 << std::sqrt(2.0);
    GaussianOracle sep2(d2, g1);
    CHECK(sep2.auc_star() == doctest::Approx(0.841344746069).epsilon(1e-10));

    // ROC* is above the diagonal and nondecreasing
    double prev = 0.0;
    for (int i = 1; i < 100; ++i) {
        double a = i / 100.0;
        double r = unit.roc_star(a);
        CHECK(r >= a);
        CHECK(r >= prev - 1e-12);
        prev = r;
    }

    // concavity on a grid
    for (int i = 2; i < 98; ++i) {
        double a = i / 100.0;
        double mid = unit.roc_star(a);
        double chord = 0.5 * (unit.roc_star(a - 0.01) + unit.roc_star(a + 0.01));
        CHECK(mid >= chord - 1e-10);
    }

    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 0) = -1.0;
    Eigen::VectorXd d3 = Eigen::VectorXd::Ones(2);
    CHECK_THROWS(GaussianOracle(d3, bad));
}

TEST_CASE("write_roc_csv") {
    auto c = empirical_roc({1, 3}, {2, 4});
    std::stringstream ss;
    write_roc_csv(c, ss);
    CHECK(ss.str() ==
          "fpr,tpr\n0,0\n0,0.5\n0.5,0.5\n0.5,1\n1,1\n");
}

TEST_CASE("RocCurve::at") {
    RocCurve corner{{{0, 0}, {0, 1}, {1, 1}}};
    CHECK(corner.at(0.0) == 1.0);  // vertical segment evaluates to upper endpoint
    CHECK(corner.at(0.5) == 1.0);
    RocCurve diag{{{0, 0}, {1, 1}}};
    CHECK(diag.at(0.25) == doctest::Approx(0.25).epsilon(1e-14));
}
