#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ranktest {

// Observations are rows; Sample(i, k) is feature k of observation i.
using Sample = Eigen::MatrixXd;

// Per-feature affine normalization learned on training data and stored inside
// the model, so holdout scoring never touches holdout statistics.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd inv_std;  // 1/std, zero-variance features mapped to 0

    bool active() const { return mean.size() > 0; }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        if (!active()) return x;
        return (x - mean).cwiseProduct(inv_std);
    }
    static Standardizer fit(const Sample& pooled);
};

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    double left = 0.0;   // value when x[feature] <= threshold
    double right = 0.0;  // value otherwise
    double weight = 1.0;
};

// appends all pairwise products x_i x_j (i <= j) to the feature vector
Eigen::VectorXd augment_quadratic_features(const Eigen::VectorXd& x);
int augmented_dim(int d);

class ScoringModel {
public:
    enum class Kind { Linear, Mlp, BoostedStumps, Fixed };

    Kind kind = Kind::Linear;
    int input_dim = 0;
    bool augment_quadratic = false;
    bool degenerate = false;  // trainer saw no usable signal (all points equal)
    Standardizer standardizer;

    // Linear / Fixed
    Eigen::VectorXd weights;
    double bias = 0.0;

    // Mlp (one hidden layer, tanh)
    Eigen::MatrixXd w1;  // width x features
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;

    // BoostedStumps
    std::vector<Stump> stumps;

    double score(const Eigen::VectorXd& x) const;
    std::vector<double> score_rows(const Sample& data) const;

    static ScoringModel linear(const Eigen::VectorXd& w, double b = 0.0);
    // Fixed coefficients over raw (optionally quadratic-augmented) features
    static ScoringModel fixed(const Eigen::VectorXd& w, double b = 0.0,
                              bool augmented = false);

    void save(std::ostream& out) const;
    static ScoringModel load(std::istream& in);
    void save_file(const std::string& path) const;
    static ScoringModel load_file(const std::string& path);
};

}  // namespace ranktest
