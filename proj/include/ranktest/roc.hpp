#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace ranktest {

// Piecewise-linear monotone curve in [0,1]^2 from (0,0) to (1,1).
struct RocCurve {
    std::vector<std::pair<double, double>> breakpoints;  // (fpr, tpr)

    // value at a given false-positive rate, linear interpolation between
    // breakpoints; vertical segments evaluate to their upper endpoint
    double at(double alpha) const;
};

enum class RocMetric { L1, Sup };

// Broken line through the jump points of the empirical step curve. Tied
// pooled values move FPR and TPR jointly (one diagonal-direction segment).
RocCurve empirical_roc(const std::vector<double>& neg_scores,
                       const std::vector<double>& pos_scores);

// (1/(nm)) sum_{ij} [ 1{y_j < x_i} + 1/2 1{y_j = x_i} ]
double auc_pairwise(const std::vector<double>& neg_scores,
                    const std::vector<double>& pos_scores);
double auc_pairwise_serial(const std::vector<double>& neg_scores,
                           const std::vector<double>& pos_scores);

// trapezoidal area under the piecewise-linear curve
double auc_from_curve(const RocCurve& curve);

// L1: integral of |ROC(a) - a| da;  Sup: sup over the polyline of |tpr - fpr|.
// Both exact from the breakpoints.
double roc_distance(const RocCurve& curve, RocMetric metric);

// CSV serialization: "fpr,tpr" rows
void write_roc_csv(const RocCurve& curve, std::ostream& out);

// Closed-form optimal ROC for two Gaussians with common covariance.
class GaussianOracle {
public:
    // delta = theta_+ - theta_-; gamma must be symmetric positive definite
    GaussianOracle(const Eigen::VectorXd& delta, const Eigen::MatrixXd& gamma);

    // ROC*(alpha) = 1 - Phi(Phi^{-1}(1 - alpha) - sqrt(delta' Gamma^{-1} delta))
    double roc_star(double alpha) const;

    // binormal AUC: Phi(sqrt(delta' Gamma^{-1} delta) / sqrt(2))
    double auc_star() const;

    // optimal linear scorer direction Gamma^{-1} delta
    const Eigen::VectorXd& direction() const { return direction_; }

    double separation() const { return separation_; }  // delta' Gamma^{-1} delta

private:
    Eigen::VectorXd direction_;
    double separation_;
};

}  // namespace ranktest
