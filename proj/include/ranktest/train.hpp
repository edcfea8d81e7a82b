#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ranktest/score_generator.hpp"
#include "ranktest/scoring_model.hpp"

namespace ranktest {

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.05;
    double l2_penalty = 1e-3;
    int pair_budget = 20000;
    double bandwidth = 0.1;  // smoothing h for the W_phi surrogate
    std::uint64_t seed = 0;
    bool standardize = true;
    bool augment_quadratic = false;
    int mlp_width = 16;
};

// Pairwise squared-hinge ("RankSVM with L2 loss") over sampled pairs,
// full-gradient descent, linear scorer.
ScoringModel train_linear_pairwise(const Sample& x_train, const Sample& y_train,
                                   const TrainConfig& cfg);

// Pairwise logistic loss, one-hidden-layer tanh network.
ScoringModel train_mlp_pairwise(const Sample& x_train, const Sample& y_train,
                                const TrainConfig& cfg);

// Gradient boosting of decision stumps on the pairwise logistic loss.
ScoringModel train_boosted_pairwise(const Sample& x_train, const Sample& y_train,
                                    const TrainConfig& cfg);

// Direct ascent on the kernel-smoothed empirical W_phi criterion
// (smooth phi only), linear scorer.
ScoringModel train_smoothed_wphi(const Sample& x_train, const Sample& y_train,
                                 const ScoreGenerator& phi, const TrainConfig& cfg);

// ---- surrogate objectives exposed for gradient verification ----

struct MlpParams {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
};

// mean pairwise logistic loss over the given (positive idx, negative idx)
// pairs; when grad is non-null, fills it with the analytic gradient
double mlp_pairwise_loss(const MlpParams& params, const Sample& x, const Sample& y,
                         const std::vector<std::pair<int, int>>& pairs,
                         MlpParams* grad = nullptr);

// smoothed W_phi objective for a linear scorer w; when grad is non-null,
// fills it with the analytic ascent gradient
double smoothed_wphi_objective(const Eigen::VectorXd& w, const Sample& x, const Sample& y,
                               const ScoreGenerator& phi, double h,
                               Eigen::VectorXd* grad = nullptr);

// epoch pair sample: all n*m pairs when they fit the budget, else
// `pair_budget` uniform draws with the epoch-derived seed
std::vector<std::pair<int, int>> sample_pairs(int n, int m, int pair_budget,
                                              std::uint64_t seed, int epoch);

}  // namespace ranktest
