#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"

#include "ranktest/roc.hpp"
#include "ranktest/synth.hpp"

using namespace ranktest;

namespace {

double sample_auc(const ScoringModel& model, const Sample& x, const Sample& y) {
    return auc_pairwise(model.score_rows(y), model.score_rows(x));
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

TEST_CASE("build_covariance matrices") {
    Eigen::MatrixXd l1m = build_covariance(ModelVariant::L1minus, 4);
    Eigen::MatrixXd want(4, 4);
    want << 2, -1, -1, -1,
           -1,  6,  0,  0,
           -1,  0,  1,  0,
           -1,  0,  0,  5;
    CHECK((l1m - want).norm() == 0.0);
    CHECK((l1m - l1m.transpose()).norm() == 0.0);

    Eigen::MatrixXd l1m6 = build_covariance(ModelVariant::L1minus, 6);
    CHECK(l1m6.rows() == 6);
    CHECK(l1m6(0, 0) == 2);
    CHECK(l1m6(5, 5) == 3);
    CHECK(l1m6(0, 5) == -1);

    Eigen::MatrixXd s1 = build_covariance(ModelVariant::S1, 3, 0.2);
    Eigen::MatrixXd s1w(3, 3);
    s1w << 1.0, 0.2, 0.04,
           0.2, 1.0, 0.2,
           0.04, 0.2, 1.0;
    CHECK((s1 - s1w).norm() < 1e-15);

    Eigen::MatrixXd s2 = build_covariance(ModelVariant::S2, 5, 0.0);
    CHECK((s2 - Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
    Eigen::MatrixXd s2c = build_covariance(ModelVariant::S2, 3, 0.4);
    CHECK(s2c(0, 1) == 0.4);
    CHECK(s2c(1, 1) == 1.0);

    // the published L1+ band matrices are not positive definite; this must
    // surface as an error, never be silently repaired
    CHECK_THROWS_AS(build_covariance(ModelVariant::L1plus, 4), ModelError);
    CHECK_THROWS_AS(build_covariance(ModelVariant::L1plus, 6), ModelError);
    CHECK_THROWS_AS(build_covariance(ModelVariant::L1minus, 5), ModelError);
    CHECK_THROWS_AS(build_covariance(ModelVariant::T1, 3), ModelError);
}

TEST_CASE("generate determinism and shapes") {
    auto spec = ModelSpec::l1minus(4, 0.1);
    auto [x1, y1] = generate(spec, 30, 20, 5);
    auto [x2, y2] = generate(spec, 30, 20, 5);
    CHECK(x1.rows() == 30);
    CHECK(y1.rows() == 20);
    CHECK(x1.cols() == 4);
    CHECK((x1 - x2).norm() == 0.0);
    CHECK((y1 - y2).norm() == 0.0);
    auto [x3, y3] = generate(spec, 30, 20, 6);
    CHECK((x1 - x3).norm() != 0.0);
    CHECK_THROWS_AS(generate(spec, 0, 5, 1), ModelError);
    CHECK_THROWS_AS(generate(ModelSpec::l1plus(4, 0.1), 5, 5, 1), ModelError);
}

TEST_CASE("generate moments") {
    // location shift: each X coordinate has mean eps/sqrt(d)
    const int n = 100000;
    auto [x, y] = generate(ModelSpec::l1minus(4, 0.1), n, n, 9);
    Eigen::MatrixXd sigma = build_covariance(ModelVariant::L1minus, 4);
    for (int k = 0; k < 4; ++k) {
        double se = std::sqrt(sigma(k, k) / n);
        CHECK(std::abs(x.col(k).mean() - 0.05) <= 3 * se);
        CHECK(std::abs(y.col(k).mean()) <= 3 * se);
    }

    // scale model: empirical covariance entry tracks the correlation
    const int ns = 20000;
    auto [xs, ys] = generate(ModelSpec::s1(3, 0.3), ns, ns, 10);
    auto cov01 = [](const Sample& s) {
        Eigen::VectorXd c0 = s.col(0).array() - s.col(0).mean();
        Eigen::VectorXd c1 = s.col(1).array() - s.col(1).mean();
        return c0.dot(c1) / (s.rows() - 1);
    };
    CHECK(std::abs(cov01(xs) - 0.5) <= 5.0 / std::sqrt(ns));  // beta + eps
    CHECK(std::abs(cov01(ys) - 0.2) <= 5.0 / std::sqrt(ns));  // beta

    // T1: Cauchy coordinates with medians (eps, eps, 0)
    auto [xt, yt] = generate(ModelSpec::t1(0.5), 50000, 50000, 11);
    CHECK(xt.cols() == 3);
    std::vector<double> c0(static_cast<std::size_t>(xt.rows()));
    for (int i = 0; i < xt.rows(); ++i) c0[static_cast<std::size_t>(i)] = xt(i, 0);
    CHECK(std::abs(median_of(c0) - 0.5) <= 0.03);
    for (int i = 0; i < xt.rows(); ++i) c0[static_cast<std::size_t>(i)] = xt(i, 2);
    CHECK(std::abs(median_of(c0)) <= 0.03);
    for (int i = 0; i < yt.rows(); ++i) c0[static_cast<std::size_t>(i)] = yt(i, 1);
    CHECK(std::abs(median_of(c0)) <= 0.03);

    // lognormal transforms are strictly positive
    auto [xl, yl] = generate(ModelSpec::t2(0.2), 500, 500, 12);
    CHECK(xl.minCoeff() > 0.0);
    CHECK(yl.minCoeff() > 0.0);
    CHECK(xl.cols() == 4);
    auto [xt3, yt3] = generate(ModelSpec::t3(0.2), 100, 100, 13);
    CHECK(xt3.cols() == 20);
    CHECK(xt3.minCoeff() > 0.0);
}

TEST_CASE("oracle_scorer") {
    // zero separation: zero weights
    auto flat = oracle_scorer(ModelSpec::l1minus(4, 0.0));
    CHECK(flat.weights.norm() == 0.0);

    CHECK_THROWS_AS(oracle_scorer(ModelSpec::t1(0.1)), NoClosedFormOracle);
    CHECK_THROWS_AS(oracle_scorer(ModelSpec::t2(0.1)), NoClosedFormOracle);
    CHECK_THROWS_AS(oracle_scorer(ModelSpec::t3(0.1)), NoClosedFormOracle);

    // frozen binormal values for l1minus(d=4, eps=0.3)
    auto spec = ModelSpec::l1minus(4, 0.3);
    Eigen::VectorXd delta = Eigen::VectorXd::Constant(4, 0.3 / 2.0);
    GaussianOracle g(delta, build_covariance(ModelVariant::L1minus, 4));
    CHECK(g.separation() == doctest::Approx(0.229736842105).epsilon(1e-9));
    CHECK(g.auc_star() == doctest::Approx(0.632665920794).epsilon(1e-9));

    // the empirical AUC of the oracle scorer approaches AUC*
    auto [x, y] = generate(spec, 20000, 20000, 14);
    auto oracle = oracle_scorer(spec);
    CHECK(sample_auc(oracle, x, y) == doctest::Approx(g.auc_star()).epsilon(0.02));

    // quadratic oracle beats chance on the equicorrelated scale model
    auto s2spec = ModelSpec::s2(20, 0.15);
    auto [xs, ys] = generate(s2spec, 5000, 5000, 15);
    auto qo = oracle_scorer(s2spec);
    CHECK(qo.augment_quadratic);
    double auc = sample_auc(qo, xs, ys);
    CHECK(auc > 0.5 + 3.0 / std::sqrt(5000.0));

    // checked variant preserves (or fixes) the orientation
    auto checked = oracle_scorer_checked(s2spec, 16);
    CHECK(sample_auc(checked, xs, ys) >= 0.5);
    auto lin_checked = oracle_scorer_checked(spec, 17);
    CHECK(sample_auc(lin_checked, x, y) > 0.6);
}

TEST_CASE("csv round trip and metadata") {
    auto spec = ModelSpec::s1(3, 0.2);
    auto [x, y] = generate(spec, 25, 10, 3);
    auto dir = std::filesystem::temp_directory_path() / "ranktest_synth_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "x.csv").string();

    write_sample_csv(x, path, true);
    Sample back = read_sample_csv(path);
    CHECK((back - x).norm() == 0.0);  // %.17g round-trips doubles exactly

    write_sample_csv(x, path, false);  // headerless variant reads identically
    CHECK((read_sample_csv(path) - x).norm() == 0.0);

    write_sample_metadata(path, spec, "x", 3);
    std::ifstream meta(path + ".meta");
    std::string line;
    std::getline(meta, line);
    CHECK(line == "prng splitmix64-counter");
    std::getline(meta, line);
    CHECK(line == "model " + spec.name());
    std::getline(meta, line);
    CHECK(line == "role x");
    std::getline(meta, line);
    CHECK(line == "seed 3");
    std::filesystem::remove_all(dir);
}

TEST_CASE("ModelSpec parse and name") {
    auto a = ModelSpec::parse("l1minus(d=6,eps=0.1)");
    CHECK(a.variant == ModelVariant::L1minus);
    CHECK(a.d == 6);
    CHECK(a.epsilon == doctest::Approx(0.1));
    CHECK(a.name() == "l1minus(d=6,eps=0.1)");
    CHECK(ModelSpec::parse(a.name()).name() == a.name());

    auto b = ModelSpec::parse("s2(d=100, eps=0.1)");
    CHECK(b.variant == ModelVariant::S2);
    CHECK(b.d == 100);
    CHECK(b.beta == doctest::Approx(0.3));  // default baseline correlation

    auto c = ModelSpec::parse("t1(eps=0.05)");
    CHECK(c.variant == ModelVariant::T1);
    CHECK(c.d == 3);
    CHECK(ModelSpec::parse(c.name()).epsilon == doctest::Approx(0.05));

    CHECK_THROWS_AS(ModelSpec::parse("gauss(d=2)"), ModelError);
    CHECK_THROWS_AS(ModelSpec::parse("t1(d=5)"), ModelError);
    CHECK_THROWS_AS(ModelSpec::parse("l1minus(eps=-1)"), ModelError);
    CHECK_THROWS_AS(ModelSpec::parse("l1minus(junk=1)"), ModelError);

    for (const char* name : {"s1(d=20,eps=0.2,beta=0.2)", "t3(eps=0.4)", "t2(eps=1)"})
        CHECK(ModelSpec::parse(name).name() == ModelSpec::parse(ModelSpec::parse(name).name()).name());
}
