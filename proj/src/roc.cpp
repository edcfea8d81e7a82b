#include "ranktest/roc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "ranktest/rng.hpp"

namespace ranktest {

double RocCurve::at(double alpha) const {
    if (alpha < 0.0) return 0.0;
    if (alpha >= 1.0) return 1.0;
    double best = 0.0;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        const auto& [x0, y0] = breakpoints[i - 1];
        const auto& [x1, y1] = breakpoints[i];
        if (alpha < x0 || alpha > x1) continue;
        if (x1 == x0) {
            best = std::max(best, y1);
        } else {
            const double t = (alpha - x0) / (x1 - x0);
            best = std::max(best, y0 + t * (y1 - y0));
        }
    }
    return best;
}

RocCurve empirical_roc(const std::vector<double>& neg_scores,
                       const std::vector<double>& pos_scores) {
    if (neg_scores.empty() || pos_scores.empty())
        throw std::invalid_argument("empirical_roc: empty sample");
    const double n = static_cast<double>(pos_scores.size());
    const double m = static_cast<double>(neg_scores.size());
    // counts per distinct pooled value, swept from the largest threshold down
    std::map<double, std::pair<int, int>> counts;  // value -> (neg, pos)
    for (double v : neg_scores) counts[v].first++;
    for (double v : pos_scores) counts[v].second++;

    RocCurve curve;
    curve.breakpoints.emplace_back(0.0, 0.0);
    double fpr = 0.0, tpr = 0.0;
    for (auto it = counts.rbegin(); it != counts.rend(); ++it) {
        fpr += it->second.first / m;
        tpr += it->second.second / n;
        curve.breakpoints.emplace_back(fpr, tpr);
    }
    return curve;
}

double auc_pairwise_serial(const std::vector<double>& neg_scores,
                           const std::vector<double>& pos_scores) {
    if (neg_scores.empty() || pos_scores.empty())
        throw std::invalid_argument("auc_pairwise: empty sample");
    double s = 0.0;
    for (double x : pos_scores)
        for (double y : neg_scores)
            s += (y < x) ? 1.0 : (y == x ? 0.5 : 0.0);
    return s / (static_cast<double>(neg_scores.size()) * static_cast<double>(pos_scores.size()));
}

double auc_pairwise(const std::vector<double>& neg_scores,
                    const std::vector<double>& pos_scores) {
    if (neg_scores.empty() || pos_scores.empty())
        throw std::invalid_argument("auc_pairwise: empty sample");
    const std::int64_t n = static_cast<std::int64_t>(pos_scores.size());
    std::vector<double> row(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = pos_scores[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (double y : neg_scores) s += (y < x) ? 1.0 : (y == x ? 0.5 : 0.0);
        row[static_cast<std::size_t>(i)] = s;
    }
    double total = 0.0;
    for (double r : row) total += r;  // index-ordered reduction
    return total / (static_cast<double>(neg_scores.size()) * static_cast<double>(n));
}

double auc_from_curve(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.breakpoints.size(); ++i) {
        const auto& [x0, y0] = curve.breakpoints[i - 1];
        const auto& [x1, y1] = curve.breakpoints[i];
        area += (x1 - x0) * 0.5 * (y0 + y1);
    }
    return area;
}

namespace {

// exact integral of |g| over [0, w] where g is linear from g0 to g1
double abs_linear_integral(double g0, double g1, double w) {
    if (w <= 0.0) return 0.0;
    if (g0 * g1 >= 0.0) return 0.5 * std::abs(g0 + g1) * w;
    const double t = g0 / (g0 - g1);  // sign crossing in (0,1)
    return 0.5 * w * (t * std::abs(g0) + (1.0 - t) * std::abs(g1));
}

}  // namespace

double roc_distance(const RocCurve& curve, RocMetric metric) {
    if (metric == RocMetric::Sup) {
        double sup = 0.0;
        for (const auto& [x, y] : curve.breakpoints) sup = std::max(sup, std::abs(y - x));
        return sup;
    }
    double l1 = 0.0;
    for (std::size_t i = 1; i < curve.breakpoints.size(); ++i) {
        const auto& [x0, y0] = curve.breakpoints[i - 1];
        const auto& [x1, y1] = curve.breakpoints[i];
        l1 += abs_linear_integral(y0 - x0, y1 - x1, x1 - x0);
    }
    return l1;
}

void write_roc_csv(const RocCurve& curve, std::ostream& out) {
    out << "fpr,tpr\n";
    char buf[64];
    for (const auto& [x, y] : curve.breakpoints) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x, y);
        out << buf;
    }
}

GaussianOracle::GaussianOracle(const Eigen::VectorXd& delta, const Eigen::MatrixXd& gamma) {
    if (gamma.rows() != gamma.cols() || gamma.rows() != delta.size())
        throw std::invalid_argument("GaussianOracle: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("GaussianOracle: covariance is not positive definite");
    direction_ = llt.solve(delta);
    separation_ = delta.dot(direction_);
}

double GaussianOracle::roc_star(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("roc_star: alpha must be in (0,1)");
    return 1.0 - normal_cdf(normal_quantile(1.0 - alpha) - std::sqrt(separation_));
}

double GaussianOracle::auc_star() const {
    return normal_cdf(std::sqrt(separation_) / std::sqrt(2.0));
}

}  // namespace ranktest
