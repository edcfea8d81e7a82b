#include "ranktest/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ranktest/rng.hpp"

namespace ranktest {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (cfg.pair_budget < 1) throw std::invalid_argument("TrainConfig: pair_budget must be >= 1");
    if (!(cfg.bandwidth > 0.0)) throw std::invalid_argument("TrainConfig: bandwidth must be > 0");
}

struct Prepared {
    Sample x, y;  // transformed training features
    Standardizer standardizer;
    bool degenerate = false;
};

Sample transform_rows(const Sample& data, const Standardizer& st, bool augment) {
    const int cols = augment ? augmented_dim(static_cast<int>(data.cols()))
                             : static_cast<int>(data.cols());
    Sample out(data.rows(), cols);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        Eigen::VectorXd z = st.apply(data.row(i).transpose());
        if (augment) z = augment_quadratic_features(z);
        out.row(i) = z.transpose();
    }
    return out;
}

Prepared prepare(const Sample& x_train, const Sample& y_train, const TrainConfig& cfg) {
    if (x_train.rows() < 1 || y_train.rows() < 1)
        throw std::invalid_argument("train: empty sample");
    if (x_train.cols() != y_train.cols())
        throw std::invalid_argument("train: samples have different dimensions");
    Prepared prep;
    Sample pooled(x_train.rows() + y_train.rows(), x_train.cols());
    pooled << x_train, y_train;
    if (cfg.standardize) prep.standardizer = Standardizer::fit(pooled);
    Standardizer check = Standardizer::fit(pooled);
    prep.degenerate = check.inv_std.isZero(0.0);
    prep.x = transform_rows(x_train, prep.standardizer, cfg.augment_quadratic);
    prep.y = transform_rows(y_train, prep.standardizer, cfg.augment_quadratic);
    return prep;
}

void stamp_common(ScoringModel& model, const Sample& x_train, const Prepared& prep,
                  const TrainConfig& cfg) {
    model.input_dim = static_cast<int>(x_train.cols());
    model.augment_quadratic = cfg.augment_quadratic;
    model.standardizer = prep.standardizer;
    model.degenerate = prep.degenerate;
}

}  // namespace

std::vector<std::pair<int, int>> sample_pairs(int n, int m, int pair_budget,
                                              std::uint64_t seed, int epoch) {
    std::vector<std::pair<int, int>> pairs;
    const std::int64_t total = static_cast<std::int64_t>(n) * m;
    if (total <= pair_budget) {
        pairs.reserve(static_cast<std::size_t>(total));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) pairs.emplace_back(i, j);
        return pairs;
    }
    Rng rng(derive_seed(seed, 0x70616972ULL, static_cast<std::uint64_t>(epoch)));
    pairs.reserve(static_cast<std::size_t>(pair_budget));
    for (int k = 0; k < pair_budget; ++k)
        pairs.emplace_back(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n))),
                           static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m))));
    return pairs;
}

ScoringModel train_linear_pairwise(const Sample& x_train, const Sample& y_train,
                                   const TrainConfig& cfg) {
    validate(cfg);
    Prepared prep = prepare(x_train, y_train, cfg);
    const int n = static_cast<int>(prep.x.rows());
    const int m = static_cast<int>(prep.y.rows());
    const int dim = static_cast<int>(prep.x.cols());

    Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
    if (!prep.degenerate) {
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            auto pairs = sample_pairs(n, m, cfg.pair_budget, cfg.seed, epoch);
            Eigen::VectorXd grad = 2.0 * cfg.l2_penalty * w;
            const double inv_p = 1.0 / static_cast<double>(pairs.size());
            for (const auto& [i, j] : pairs) {
                const double margin = w.dot(prep.x.row(i) - prep.y.row(j));
                if (margin < 1.0)
                    grad += (2.0 * (margin - 1.0) * inv_p) *
                            (prep.x.row(i) - prep.y.row(j)).transpose();
            }
            w -= cfg.learning_rate * grad;
        }
    }
    ScoringModel model;
    model.kind = ScoringModel::Kind::Linear;
    model.weights = w;
    model.bias = 0.0;
    stamp_common(model, x_train, prep, cfg);
    return model;
}

double mlp_pairwise_loss(const MlpParams& params, const Sample& x, const Sample& y,
                         const std::vector<std::pair<int, int>>& pairs, MlpParams* grad) {
    if (grad) {
        grad->w1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
        grad->b1 = Eigen::VectorXd::Zero(params.b1.size());
        grad->w2 = Eigen::VectorXd::Zero(params.w2.size());
        grad->b2 = 0.0;
    }
    const double inv_p = 1.0 / static_cast<double>(pairs.size());
    double loss = 0.0;
    // cache forward pass per point
    Eigen::MatrixXd hx = ((params.w1 * x.transpose()).colwise() + params.b1).array().tanh();
    Eigen::MatrixXd hy = ((params.w1 * y.transpose()).colwise() + params.b1).array().tanh();
    Eigen::VectorXd sx = hx.transpose() * params.w2;
    Eigen::VectorXd sy = hy.transpose() * params.w2;
    // the per-point Jacobian is pairing-independent, so only a scalar
    // coefficient per point needs to be accumulated over the pairs
    Eigen::VectorXd cx = Eigen::VectorXd::Zero(x.rows());
    Eigen::VectorXd cy = Eigen::VectorXd::Zero(y.rows());
    for (const auto& [i, j] : pairs) {
        const double margin = sx[i] - sy[j];
        // log(1 + exp(-margin)), stable form
        loss += margin > 0.0 ? std::log1p(std::exp(-margin))
                             : -margin + std::log1p(std::exp(margin));
        if (grad) {
            const double coef = -sigmoid(-margin) * inv_p;  // d loss / d margin
            cx[i] += coef;
            cy[j] -= coef;
        }
    }
    if (grad) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (cx[i] == 0.0) continue;
            Eigen::VectorXd dh =
                params.w2.cwiseProduct((1.0 - hx.col(i).array().square()).matrix());
            grad->w2 += cx[i] * hx.col(i);
            grad->b1 += cx[i] * dh;
            grad->w1.noalias() += (cx[i] * dh) * x.row(i);
        }
        for (Eigen::Index j = 0; j < y.rows(); ++j) {
            if (cy[j] == 0.0) continue;
            Eigen::VectorXd dh =
                params.w2.cwiseProduct((1.0 - hy.col(j).array().square()).matrix());
            grad->w2 += cy[j] * hy.col(j);
            grad->b1 += cy[j] * dh;
            grad->w1.noalias() += (cy[j] * dh) * y.row(j);
        }
        // b2 cancels in the margin
    }
    return loss * inv_p;
}

ScoringModel train_mlp_pairwise(const Sample& x_train, const Sample& y_train,
                                const TrainConfig& cfg) {
    validate(cfg);
    if (cfg.mlp_width < 1) throw std::invalid_argument("TrainConfig: mlp_width must be >= 1");
    Prepared prep = prepare(x_train, y_train, cfg);
    const int n = static_cast<int>(prep.x.rows());
    const int m = static_cast<int>(prep.y.rows());
    const int dim = static_cast<int>(prep.x.cols());
    const int width = cfg.mlp_width;

    // seeded uniform init
    Rng rng(derive_seed(cfg.seed, 0x6d6c70ULL));
    MlpParams params;
    params.w1.resize(width, dim);
    const double a1 = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index r = 0; r < params.w1.rows(); ++r)
        for (Eigen::Index c = 0; c < params.w1.cols(); ++c)
            params.w1(r, c) = a1 * (2.0 * rng.uniform() - 1.0);
    params.b1.resize(width);
    for (Eigen::Index r = 0; r < width; ++r) params.b1[r] = a1 * (2.0 * rng.uniform() - 1.0);
    const double a2 = 1.0 / std::sqrt(static_cast<double>(width));
    params.w2.resize(width);
    for (Eigen::Index r = 0; r < width; ++r) params.w2[r] = a2 * (2.0 * rng.uniform() - 1.0);
    params.b2 = 0.0;

    if (!prep.degenerate) {
        MlpParams grad;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            auto pairs = sample_pairs(n, m, cfg.pair_budget, cfg.seed, epoch);
            mlp_pairwise_loss(params, prep.x, prep.y, pairs, &grad);
            params.w1 -= cfg.learning_rate * (grad.w1 + 2.0 * cfg.l2_penalty * params.w1);
            params.b1 -= cfg.learning_rate * grad.b1;
            params.w2 -= cfg.learning_rate * (grad.w2 + 2.0 * cfg.l2_penalty * params.w2);
        }
    }
    ScoringModel model;
    model.kind = ScoringModel::Kind::Mlp;
    model.w1 = params.w1;
    model.b1 = params.b1;
    model.w2 = params.w2;
    model.b2 = params.b2;
    stamp_common(model, x_train, prep, cfg);
    return model;
}

namespace {

struct FeatureOrder {
    std::vector<int> order;  // pooled point indices sorted by this feature
};

// least-squares stump fit to per-point residuals over the pooled sample
Stump fit_stump(const Sample& pooled, const std::vector<FeatureOrder>& orders,
                const Eigen::VectorXd& residual) {
    const int npts = static_cast<int>(pooled.rows());
    const double total = residual.sum();
    Stump best;
    double best_gain = -1.0;
    for (int f = 0; f < pooled.cols(); ++f) {
        const auto& ord = orders[static_cast<std::size_t>(f)].order;
        double left_sum = 0.0;
        for (int k = 0; k + 1 < npts; ++k) {
            left_sum += residual[ord[static_cast<std::size_t>(k)]];
            const double v0 = pooled(ord[static_cast<std::size_t>(k)], f);
            const double v1 = pooled(ord[static_cast<std::size_t>(k + 1)], f);
            if (v0 == v1) continue;  // can't split inside a tie group
            const int cl = k + 1, cr = npts - cl;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / cl + right_sum * right_sum / cr;
            if (gain > best_gain) {
                best_gain = gain;
                best.feature = f;
                best.threshold = 0.5 * (v0 + v1);
                best.left = left_sum / cl;
                best.right = right_sum / cr;
            }
        }
    }
    if (best_gain < 0.0) {  // all features constant: flat stump
        best.left = best.right = total / npts;
    }
    return best;
}

}  // namespace

ScoringModel train_boosted_pairwise(const Sample& x_train, const Sample& y_train,
                                    const TrainConfig& cfg) {
    validate(cfg);
    Prepared prep = prepare(x_train, y_train, cfg);
    const int n = static_cast<int>(prep.x.rows());
    const int m = static_cast<int>(prep.y.rows());
    const int npts = n + m;

    Sample pooled(npts, prep.x.cols());
    pooled << prep.x, prep.y;
    std::vector<FeatureOrder> orders(static_cast<std::size_t>(pooled.cols()));
    for (int f = 0; f < pooled.cols(); ++f) {
        auto& ord = orders[static_cast<std::size_t>(f)].order;
        ord.resize(static_cast<std::size_t>(npts));
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(),
                  [&](int a, int b) { return pooled(a, f) < pooled(b, f); });
    }

    ScoringModel model;
    model.kind = ScoringModel::Kind::BoostedStumps;
    stamp_common(model, x_train, prep, cfg);
    if (prep.degenerate) return model;

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(npts);
    for (int stage = 0; stage < cfg.epochs; ++stage) {
        auto pairs = sample_pairs(n, m, cfg.pair_budget, cfg.seed, stage);
        Eigen::VectorXd residual = Eigen::VectorXd::Zero(npts);
        for (const auto& [i, j] : pairs) {
            const double d = sigmoid(-(scores[i] - scores[n + j]));
            residual[i] += d;
            residual[n + j] -= d;
        }
        Stump stump = fit_stump(pooled, orders, residual);
        stump.weight = cfg.learning_rate;
        model.stumps.push_back(stump);
        for (int k = 0; k < npts; ++k)
            scores[k] += stump.weight *
                         (pooled(k, stump.feature) <= stump.threshold ? stump.left : stump.right);
    }
    return model;
}

double smoothed_wphi_objective(const Eigen::VectorXd& w, const Sample& x, const Sample& y,
                               const ScoreGenerator& phi, double h, Eigen::VectorXd* grad) {
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(y.rows());
    const int npts = n + m;
    Sample pooled(npts, x.cols());
    pooled << x, y;
    Eigen::VectorXd s = pooled * w;
    const double inv_np1 = 1.0 / static_cast<double>(npts + 1);

    if (grad) grad->setZero(w.size());
    double objective = 0.0;
    for (int i = 0; i < n; ++i) {
        double soft_rank = 0.5;
        for (int z = 0; z < npts; ++z) soft_rank += sigmoid((s[i] - s[z]) / h);
        objective += phi(soft_rank * inv_np1);
        if (grad) {
            const double outer = phi.deriv(soft_rank * inv_np1) * inv_np1 / h;
            for (int z = 0; z < npts; ++z) {
                const double sig = sigmoid((s[i] - s[z]) / h);
                *grad += outer * sig * (1.0 - sig) *
                         (pooled.row(i) - pooled.row(z)).transpose();
            }
        }
    }
    return objective;
}

ScoringModel train_smoothed_wphi(const Sample& x_train, const Sample& y_train,
                                 const ScoreGenerator& phi, const TrainConfig& cfg) {
    validate(cfg);
    if (!phi.smooth())
        throw std::domain_error("train_smoothed_wphi: unsupported (non-smooth) generator");
    Prepared prep = prepare(x_train, y_train, cfg);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(prep.x.cols());
    if (!prep.degenerate) {
        Eigen::VectorXd grad(w.size());
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            smoothed_wphi_objective(w, prep.x, prep.y, phi, cfg.bandwidth, &grad);
            w += cfg.learning_rate * (grad - 2.0 * cfg.l2_penalty * w);
        }
    }
    ScoringModel model;
    model.kind = ScoringModel::Kind::Linear;
    model.weights = w;
    stamp_common(model, x_train, prep, cfg);
    return model;
}

}  // namespace ranktest
