#include "ranktest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ranktest/rng.hpp"

namespace ranktest {
namespace {

void check_rows(const Sample& x, const Sample& y, int min_rows) {
    if (x.rows() < min_rows || y.rows() < min_rows)
        throw std::invalid_argument("baseline statistic: sample too small");
    if (x.cols() != y.cols())
        throw std::invalid_argument("baseline statistic: dimension mismatch");
}

Eigen::MatrixXd pooled_rows(const Sample& x, const Sample& y) {
    Eigen::MatrixXd z(x.rows() + y.rows(), x.cols());
    z.topRows(x.rows()) = x;
    z.bottomRows(y.rows()) = y;
    return z;
}

// Symmetric pooled pairwise matrix f(||z_i - z_j||^2); diagonal f(0).
template <typename F>
Eigen::MatrixXd pair_matrix(const Eigen::MatrixXd& z, F f, bool parallel) {
    const int N = static_cast<int>(z.rows());
    Eigen::MatrixXd k(N, N);
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < N; ++i) {
        for (int j = i; j < N; ++j) {
            double d2 = (z.row(i) - z.row(j)).squaredNorm();
            double v = f(d2);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

// MMD^2_u from the pooled pair matrix and an index labelling.
double mmd_from_matrix(const Eigen::MatrixXd& k, const std::vector<int>& idx, int n) {
    const int N = static_cast<int>(idx.size());
    const int m = N - n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) sxx += k(idx[a], idx[b]);
    for (int a = n; a < N; ++a)
        for (int b = n; b < N; ++b)
            if (a != b) syy += k(idx[a], idx[b]);
    for (int a = 0; a < n; ++a)
        for (int b = n; b < N; ++b) sxy += k(idx[a], idx[b]);
    return sxx / (static_cast<double>(n) * (n - 1)) +
           syy / (static_cast<double>(m) * (m - 1)) -
           2.0 * sxy / (static_cast<double>(n) * m);
}

double energy_from_matrix(const Eigen::MatrixXd& d, const std::vector<int>& idx, int n) {
    const int N = static_cast<int>(idx.size());
    const int m = N - n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) sxx += d(idx[a], idx[b]);
    for (int a = n; a < N; ++a)
        for (int b = n; b < N; ++b)
            if (a != b) syy += d(idx[a], idx[b]);
    for (int a = 0; a < n; ++a)
        for (int b = n; b < N; ++b) sxy += d(idx[a], idx[b]);
    double within_x = n > 1 ? sxx / (static_cast<double>(n) * (n - 1)) : 0.0;
    double within_y = m > 1 ? syy / (static_cast<double>(m) * (m - 1)) : 0.0;
    return 2.0 * sxy / (static_cast<double>(n) * m) - within_x - within_y;
}

std::vector<int> identity_labels(int N) {
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

std::vector<int> permuted_labels(int N, std::uint64_t seed, int b) {
    std::vector<int> idx = identity_labels(N);
    Rng rng(derive_seed(seed, 0x7065726dULL, static_cast<std::uint64_t>(b)));
    for (int i = N - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

double pvalue_from_counts(const std::vector<double>& perms, double observed, Tail tail) {
    int extreme = 0;
    for (double v : perms) {
        if (tail == Tail::Upper ? v >= observed : v <= observed) ++extreme;
    }
    return (1.0 + extreme) / (1.0 + static_cast<double>(perms.size()));
}

struct MstResult {
    std::vector<std::pair<int, int>> edges;
};

// Prim on squared Euclidean distances (same tree as Euclidean); ties broken
// by the lowest candidate index.
MstResult prim_mst(const Eigen::MatrixXd& z, bool parallel) {
    const int N = static_cast<int>(z.rows());
    std::vector<double> key(N, std::numeric_limits<double>::infinity());
    std::vector<int> parent(N, -1);
    std::vector<char> used(N, 0);
    key[0] = 0.0;
    MstResult out;
    for (int step = 0; step < N; ++step) {
        int best = -1;
        for (int i = 0; i < N; ++i)
            if (!used[i] && (best < 0 || key[i] < key[best])) best = i;
        used[best] = 1;
        if (parent[best] >= 0) out.edges.emplace_back(parent[best], best);
#pragma omp parallel for schedule(static) if (parallel)
        for (int i = 0; i < N; ++i) {
            if (used[i]) continue;
            double d2 = (z.row(i) - z.row(best)).squaredNorm();
            if (d2 < key[i]) {
                key[i] = d2;
                parent[i] = best;
            }
        }
    }
    return out;
}

int cross_edges(const MstResult& mst, const std::vector<char>& is_x) {
    int cross = 0;
    for (const auto& [a, b] : mst.edges)
        if (is_x[a] != is_x[b]) ++cross;
    return cross;
}

}  // namespace

double mmd_unbiased(const Sample& x, const Sample& y, double bandwidth) {
    check_rows(x, y, 2);
    if (!(bandwidth > 0)) throw std::invalid_argument("mmd_unbiased: bandwidth must be > 0");
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd k =
        pair_matrix(pooled_rows(x, y), [inv](double d2) { return std::exp(-d2 * inv); }, true);
    return mmd_from_matrix(k, identity_labels(static_cast<int>(k.rows())),
                           static_cast<int>(x.rows()));
}

double mmd_unbiased_serial(const Sample& x, const Sample& y, double bandwidth) {
    check_rows(x, y, 2);
    if (!(bandwidth > 0)) throw std::invalid_argument("mmd_unbiased: bandwidth must be > 0");
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd k =
        pair_matrix(pooled_rows(x, y), [inv](double d2) { return std::exp(-d2 * inv); }, false);
    return mmd_from_matrix(k, identity_labels(static_cast<int>(k.rows())),
                           static_cast<int>(x.rows()));
}

double median_heuristic_bandwidth(const Sample& x, const Sample& y) {
    check_rows(x, y, 1);
    Eigen::MatrixXd z = pooled_rows(x, y);
    const int N = static_cast<int>(z.rows());
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(N) * (N - 1) / 2);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) dists.push_back((z.row(i) - z.row(j)).norm());
    if (dists.empty()) return 1.0;
    std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double med = dists[mid];
    return med > 0 ? med : 1.0;
}

double energy_statistic(const Sample& x, const Sample& y) {
    check_rows(x, y, 1);
    Eigen::MatrixXd d =
        pair_matrix(pooled_rows(x, y), [](double d2) { return std::sqrt(d2); }, true);
    return energy_from_matrix(d, identity_labels(static_cast<int>(d.rows())),
                              static_cast<int>(x.rows()));
}

double energy_statistic_serial(const Sample& x, const Sample& y) {
    check_rows(x, y, 1);
    Eigen::MatrixXd d =
        pair_matrix(pooled_rows(x, y), [](double d2) { return std::sqrt(d2); }, false);
    return energy_from_matrix(d, identity_labels(static_cast<int>(d.rows())),
                              static_cast<int>(x.rows()));
}

int fr_statistic(const Sample& x, const Sample& y) {
    check_rows(x, y, 1);
    Eigen::MatrixXd z = pooled_rows(x, y);
    if (z.rows() < 2) throw std::invalid_argument("fr_statistic: need at least two points");
    MstResult mst = prim_mst(z, true);
    std::vector<char> is_x(z.rows(), 0);
    std::fill(is_x.begin(), is_x.begin() + x.rows(), 1);
    return cross_edges(mst, is_x);
}

int fr_statistic_serial(const Sample& x, const Sample& y) {
    check_rows(x, y, 1);
    Eigen::MatrixXd z = pooled_rows(x, y);
    if (z.rows() < 2) throw std::invalid_argument("fr_statistic: need at least two points");
    MstResult mst = prim_mst(z, false);
    std::vector<char> is_x(z.rows(), 0);
    std::fill(is_x.begin(), is_x.begin() + x.rows(), 1);
    return cross_edges(mst, is_x);
}

double permutation_pvalue(const Statistic& statistic, const Sample& x, const Sample& y,
                          const PermutationScheme& scheme, Tail tail) {
    if (scheme.b_perm < 1) throw std::invalid_argument("permutation_pvalue: b_perm >= 1");
    const int n = static_cast<int>(x.rows());
    const int N = n + static_cast<int>(y.rows());
    Eigen::MatrixXd z = pooled_rows(x, y);
    double observed = statistic(x, y);
    std::vector<double> perms(scheme.b_perm);
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < scheme.b_perm; ++b) {
        std::vector<int> idx = permuted_labels(N, scheme.seed, b);
        Sample px(n, z.cols()), py(N - n, z.cols());
        for (int i = 0; i < n; ++i) px.row(i) = z.row(idx[i]);
        for (int i = n; i < N; ++i) py.row(i - n) = z.row(idx[i]);
        perms[b] = statistic(px, py);
    }
    return pvalue_from_counts(perms, observed, tail);
}

double mmd_permutation_pvalue(const Sample& x, const Sample& y, double bandwidth,
                              const PermutationScheme& scheme) {
    check_rows(x, y, 2);
    if (!(bandwidth > 0)) throw std::invalid_argument("mmd: bandwidth must be > 0");
    const int n = static_cast<int>(x.rows());
    const int N = n + static_cast<int>(y.rows());
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    Eigen::MatrixXd k =
        pair_matrix(pooled_rows(x, y), [inv](double d2) { return std::exp(-d2 * inv); }, true);
    double observed = mmd_from_matrix(k, identity_labels(N), n);
    std::vector<double> perms(scheme.b_perm);
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < scheme.b_perm; ++b)
        perms[b] = mmd_from_matrix(k, permuted_labels(N, scheme.seed, b), n);
    return pvalue_from_counts(perms, observed, Tail::Upper);
}

double energy_permutation_pvalue(const Sample& x, const Sample& y,
                                 const PermutationScheme& scheme) {
    check_rows(x, y, 1);
    const int n = static_cast<int>(x.rows());
    const int N = n + static_cast<int>(y.rows());
    Eigen::MatrixXd d =
        pair_matrix(pooled_rows(x, y), [](double d2) { return std::sqrt(d2); }, true);
    double observed = energy_from_matrix(d, identity_labels(N), n);
    std::vector<double> perms(scheme.b_perm);
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < scheme.b_perm; ++b)
        perms[b] = energy_from_matrix(d, permuted_labels(N, scheme.seed, b), n);
    return pvalue_from_counts(perms, observed, Tail::Upper);
}

double fr_permutation_pvalue(const Sample& x, const Sample& y,
                             const PermutationScheme& scheme) {
    check_rows(x, y, 1);
    Eigen::MatrixXd z = pooled_rows(x, y);
    const int n = static_cast<int>(x.rows());
    const int N = static_cast<int>(z.rows());
    if (N < 2) throw std::invalid_argument("fr: need at least two points");
    MstResult mst = prim_mst(z, true);
    std::vector<char> is_x(N, 0);
    std::fill(is_x.begin(), is_x.begin() + n, 1);
    double observed = cross_edges(mst, is_x);
    std::vector<double> perms(scheme.b_perm);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < scheme.b_perm; ++b) {
        std::vector<int> idx = permuted_labels(N, scheme.seed, b);
        std::vector<char> lab(N, 0);
        for (int i = 0; i < n; ++i) lab[idx[i]] = 1;
        perms[b] = cross_edges(mst, lab);
    }
    return pvalue_from_counts(perms, observed, Tail::Lower);
}

std::vector<double> mmd_bandwidth_grid() {
    return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

namespace {

// unit direction k is a pure function of (seed, k), so depths are monotone
// nonincreasing in the direction count for nested seeds
Eigen::MatrixXd depth_directions(int d, int count, std::uint64_t seed) {
    if (d == 1) return Eigen::MatrixXd::Ones(1, 1);  // exact: one axis suffices
    Eigen::MatrixXd u(d, count);
    for (int k = 0; k < count; ++k) {
        Rng rng(derive_seed(seed, 0x64697265ULL, static_cast<std::uint64_t>(k)));
        double norm2 = 0.0;
        do {
            for (int j = 0; j < d; ++j) u(j, k) = rng.normal();
            norm2 = u.col(k).squaredNorm();
        } while (norm2 == 0.0);
        u.col(k) /= std::sqrt(norm2);
    }
    return u;
}

// depths of many points at once: reference projections are computed and
// sorted once per direction, each point then costs a pair of binary searches
std::vector<double> tukey_depths_batch(const Sample& points, const Sample& reference,
                                       const DepthConfig& cfg) {
    if (reference.rows() == 0) throw std::invalid_argument("tukey_depth: empty reference");
    if (cfg.directions < 1) throw std::invalid_argument("tukey_depth: directions >= 1");
    const int n = static_cast<int>(reference.rows());
    Eigen::MatrixXd u = depth_directions(static_cast<int>(reference.cols()),
                                         cfg.directions, cfg.seed);
    const int K = static_cast<int>(u.cols());
    Eigen::MatrixXd ref_proj = reference * u;  // n x K
    std::vector<std::vector<double>> sorted_cols(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        auto& col = sorted_cols[static_cast<std::size_t>(k)];
        col.assign(ref_proj.col(k).data(), ref_proj.col(k).data() + n);
        std::sort(col.begin(), col.end());
    }
    Eigen::MatrixXd pts_proj = points * u;  // npts x K
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(points.rows()); ++i) {
        int best = n;
        for (int k = 0; k < K; ++k) {
            const auto& col = sorted_cols[static_cast<std::size_t>(k)];
            const double p = pts_proj(i, k);
            int below = static_cast<int>(std::upper_bound(col.begin(), col.end(), p) -
                                         col.begin());
            int above = n - static_cast<int>(std::lower_bound(col.begin(), col.end(), p) -
                                             col.begin());
            best = std::min(best, std::min(below, above));
        }
        out[static_cast<std::size_t>(i)] = static_cast<double>(best) / n;
    }
    return out;
}

}  // namespace

double tukey_depth(const Eigen::VectorXd& point, const Sample& reference,
                   const DepthConfig& cfg) {
    Sample one(1, point.size());
    one.row(0) = point.transpose();
    return tukey_depths_batch(one, reference, cfg)[0];
}

TestReport tukey_depth_test(const Sample& x, const Sample& y, const ScoreGenerator& phi,
                            double alpha, const DepthConfig& cfg, std::uint64_t split_seed,
                            NullTableCache& tables) {
    if (x.rows() < 1 || y.rows() < 1)
        throw std::invalid_argument("tukey_depth_test: empty sample");
    if (!(alpha > 0 && alpha < 1))
        throw std::invalid_argument("tukey_depth_test: alpha in (0,1)");

    const bool x_larger = x.rows() >= y.rows();
    const Sample& big = x_larger ? x : y;
    const Sample& small = x_larger ? y : x;
    const int nb = static_cast<int>(big.rows());

    std::vector<int> order(nb);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(split_seed, 0x64737068ULL));
    for (int i = nb - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    int n_ref = static_cast<int>(std::floor(cfg.reference_fraction * nb));
    n_ref = std::clamp(n_ref, 1, nb - 1);

    Sample reference(n_ref, big.cols());
    Sample big_rest(nb - n_ref, big.cols());
    for (int i = 0; i < n_ref; ++i) reference.row(i) = big.row(order[i]);
    for (int i = n_ref; i < nb; ++i) big_rest.row(i - n_ref) = big.row(order[i]);

    std::vector<double> big_depths = tukey_depths_batch(big_rest, reference, cfg);
    std::vector<double> small_depths = tukey_depths_batch(small, reference, cfg);

    const std::vector<double>& x_depths = x_larger ? big_depths : small_depths;
    const std::vector<double>& y_depths = x_larger ? small_depths : big_depths;

    auto table = tables.get(static_cast<int>(x_depths.size()),
                            static_cast<int>(y_depths.size()), phi, 0);
    LinearRankStat stat = linear_rank_statistic(x_depths, y_depths, phi);
    double p_upper = p_value(*table, stat.centered);
    double p_lower = p_value_lower(*table, stat.centered);
    double p_two = std::min(1.0, 2.0 * std::min(p_upper, p_lower));

    TestReport report;
    report.statistic_centered = stat.centered;
    report.quantile = null_quantile(*table, alpha / 2.0);
    report.p_value = p_two;
    report.reject = p_upper <= alpha / 2.0 || p_lower <= alpha / 2.0;
    report.alpha = alpha;
    report.n_train = x_larger ? n_ref : 0;
    report.m_train = x_larger ? 0 : n_ref;
    report.n_test = static_cast<int>(x_depths.size());
    report.m_test = static_cast<int>(y_depths.size());
    report.phi = phi.name();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "tukey-depth(K=%d)", cfg.directions);
    report.ranker = buf;
    report.seed = split_seed;
    return report;
}

}  // namespace ranktest
