#include "ranktest/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ranktest/rng.hpp"

namespace ranktest {

namespace {

constexpr double kValueMergeTol = 1e-12;

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
}

// C(N, n) with saturation so budget comparisons never overflow
double binom_approx(int N, int n) {
    double r = 1.0;
    n = std::min(n, N - n);
    for (int i = 1; i <= n; ++i) {
        r *= static_cast<double>(N - n + i) / i;
        if (r > 1e18) return 1e18;
    }
    return r;
}

// collapse a sorted list of sampled values into (value, probability) support
std::vector<std::pair<double, double>> collapse(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> support;
    const double w = 1.0 / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] - values[i] <= kValueMergeTol) ++j;
        support.emplace_back(values[i], w * static_cast<double>(j - i));
        i = j;
    }
    return support;
}

}  // namespace

RankVector midranks(const std::vector<double>& pooled) {
    if (pooled.empty()) throw std::invalid_argument("midranks: empty input");
    check_finite(pooled, "midranks");
    const int N = static_cast<int>(pooled.size());
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pooled[a] < pooled[b]; });
    RankVector rv;
    rv.pooled_size = N;
    rv.ranks.assign(N, 0.0);
    for (int i = 0; i < N;) {
        int j = i;
        while (j < N && pooled[order[j]] == pooled[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1 .. j
        for (int k = i; k < j; ++k) rv.ranks[order[k]] = mean_rank;
        i = j;
    }
    return rv;
}

LinearRankStat linear_rank_statistic(const std::vector<double>& x_scores,
                                     const std::vector<double>& y_scores,
                                     const ScoreGenerator& phi) {
    if (x_scores.empty() || y_scores.empty())
        throw std::invalid_argument("linear_rank_statistic: empty sample");
    const int n = static_cast<int>(x_scores.size());
    std::vector<double> pooled(x_scores);
    pooled.insert(pooled.end(), y_scores.begin(), y_scores.end());
    RankVector rv = midranks(pooled);
    const double Np1 = static_cast<double>(rv.pooled_size + 1);
    double raw = 0.0;
    for (int i = 0; i < n; ++i) raw += phi(rv.ranks[i] / Np1);
    return {raw, raw / n - phi.integral()};
}

double mww_statistic(const std::vector<double>& x_scores,
                     const std::vector<double>& y_scores) {
    if (x_scores.empty() || y_scores.empty())
        throw std::invalid_argument("mww_statistic: empty sample");
    const int n = static_cast<int>(x_scores.size());
    std::vector<double> pooled(x_scores);
    pooled.insert(pooled.end(), y_scores.begin(), y_scores.end());
    RankVector rv = midranks(pooled);
    double w = 0.0;
    for (int i = 0; i < n; ++i) w += rv.ranks[i];
    return w;
}

namespace {

// centered statistic for the rank subset (1-based ranks)
double subset_statistic(const std::vector<int>& ranks, int n,
                        const std::vector<double>& phi_at_rank, double phi_integral) {
    double s = 0.0;
    for (int r : ranks) s += phi_at_rank[r];
    return s / n - phi_integral;
}

NullTable make_exact(int n, int m, const ScoreGenerator& phi) {
    const int N = n + m;
    std::vector<double> phi_at_rank(N + 1, 0.0);
    for (int r = 1; r <= N; ++r)
        phi_at_rank[r] = phi(static_cast<double>(r) / (N + 1));
    const double c = phi.integral();

    std::vector<double> values;
    std::vector<int> comb(n);
    std::iota(comb.begin(), comb.end(), 1);  // first combination 1..n
    while (true) {
        values.push_back(subset_statistic(comb, n, phi_at_rank, c));
        // next lexicographic combination of {1..N}
        int i = n - 1;
        while (i >= 0 && comb[i] == N - (n - 1 - i)) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
    }

    NullTable t;
    t.n = n;
    t.m = m;
    t.generator = phi;
    t.method = NullMethod::Exact;
    t.support = collapse(values);
    return t;
}

std::vector<double> mc_values(int n, int m, const ScoreGenerator& phi,
                              std::int64_t draws, std::uint64_t seed, bool parallel) {
    const int N = n + m;
    std::vector<double> phi_at_rank(N + 1, 0.0);
    for (int r = 1; r <= N; ++r)
        phi_at_rank[r] = phi(static_cast<double>(r) / (N + 1));
    const double c = phi.integral();

    std::vector<double> values(static_cast<std::size_t>(draws));
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t d = 0; d < draws; ++d) {
        Rng rng(derive_seed(seed, 0x6e756c6cULL, static_cast<std::uint64_t>(d)));
        std::vector<int> picked = sample_without_replacement(N, n, rng);
        double s = 0.0;
        for (int r : picked) s += phi_at_rank[r + 1];
        values[static_cast<std::size_t>(d)] = s / n - c;
    }
    return values;
}

}  // namespace

NullTable null_distribution(int n, int m, const ScoreGenerator& phi, NullMethod method,
                            std::int64_t budget, std::int64_t draws, std::uint64_t seed) {
    if (n < 1 || m < 1) throw std::invalid_argument("null_distribution: n, m must be >= 1");
    if (method == NullMethod::Exact) {
        if (binom_approx(n + m, n) > static_cast<double>(budget))
            throw BudgetExceeded("null_distribution: C(N,n) exceeds enumeration budget");
        return make_exact(n, m, phi);
    }
    if (draws < 1) throw std::invalid_argument("null_distribution: draws must be >= 1");
    std::vector<double> values = mc_values(n, m, phi, draws, seed, true);
    NullTable t;
    t.n = n;
    t.m = m;
    t.generator = phi;
    t.method = NullMethod::MonteCarlo;
    t.draws = draws;
    t.seed = seed;
    t.support = collapse(values);
    return t;
}

NullTable null_distribution_mc_serial(int n, int m, const ScoreGenerator& phi,
                                      std::int64_t draws, std::uint64_t seed) {
    std::vector<double> values = mc_values(n, m, phi, draws, seed, false);
    NullTable t;
    t.n = n;
    t.m = m;
    t.generator = phi;
    t.method = NullMethod::MonteCarlo;
    t.draws = draws;
    t.seed = seed;
    t.support = collapse(values);
    return t;
}

NullTable null_distribution_auto(int n, int m, const ScoreGenerator& phi, std::uint64_t seed,
                                 std::int64_t budget, std::int64_t draws) {
    if (binom_approx(n + m, n) <= static_cast<double>(budget))
        return null_distribution(n, m, phi, NullMethod::Exact, budget, draws, seed);
    return null_distribution(n, m, phi, NullMethod::MonteCarlo, budget, draws, seed);
}

double null_quantile(const NullTable& table, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("null_quantile: alpha must be in (0,1)");
    const double target = 1.0 - alpha - 1e-9;
    double cum = 0.0;
    for (const auto& [v, p] : table.support) {
        cum += p;
        if (cum >= target) return std::max(0.0, v);
    }
    return std::max(0.0, table.support.back().first);
}

double p_value(const NullTable& table, double observed_centered) {
    double tail = 0.0;
    for (const auto& [v, p] : table.support)
        if (v >= observed_centered - kValueMergeTol) tail += p;
    return std::min(1.0, tail);
}

double p_value_lower(const NullTable& table, double observed_centered) {
    double tail = 0.0;
    for (const auto& [v, p] : table.support)
        if (v <= observed_centered + kValueMergeTol) tail += p;
    return std::min(1.0, tail);
}

double table_tv_distance(const NullTable& a, const NullTable& b) {
    // merge both supports with a matching tolerance wide enough to absorb
    // floating-point jitter between enumeration and sampling paths
    const double tol = 1e-9;
    std::size_t i = 0, j = 0;
    double tv = 0.0;
    while (i < a.support.size() || j < b.support.size()) {
        double va = i < a.support.size() ? a.support[i].first : 1e300;
        double vb = j < b.support.size() ? b.support[j].first : 1e300;
        if (std::abs(va - vb) <= tol) {
            tv += std::abs(a.support[i].second - b.support[j].second);
            ++i;
            ++j;
        } else if (va < vb) {
            tv += a.support[i].second;
            ++i;
        } else {
            tv += b.support[j].second;
            ++j;
        }
    }
    return 0.5 * tv;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double asymptotic_mean(const std::function<double(double)>& roc, double p,
                       const ScoreGenerator& phi, double tol) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("asymptotic_mean: p must be in (0,1)");
    auto integrand = [&](double alpha) {
        return phi(p * (1.0 - roc(alpha)) + (1.0 - p) * (1.0 - alpha));
    };
    // RTB's jump makes the integrand discontinuous; pre-split the domain so
    // each panel sees at most one crossing
    double integral = 0.0;
    const int panels = phi.has_kink() ? 64 : 4;
    for (int k = 0; k < panels; ++k) {
        const double a = static_cast<double>(k) / panels;
        const double b = static_cast<double>(k + 1) / panels;
        integral += integrate(integrand, a, b, tol / panels);
    }
    return phi.integral() / p - (1.0 - p) / p * integral;
}

double quantile_upper_bound(int N, double p, const ScoreGenerator& phi, double alpha) {
    if (!phi.smooth())
        throw std::domain_error("quantile_upper_bound: unsupported (non-smooth) generator");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile_upper_bound: p in (0,1)");
    if (N < 1.0 / p) throw std::invalid_argument("quantile_upper_bound: requires N >= 1/p");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("quantile_upper_bound: alpha in (0,1)");
    const double sup = phi.sup_norm();
    const double dsup = phi.deriv_sup_norm();
    const double C = 0.125 * std::min({p / (sup * sup), 1.0 / (p * dsup * dsup),
                                       1.0 / ((1.0 - p) * dsup * dsup)});
    return std::sqrt(std::log(18.0 / alpha) / (C * N));
}

void save_null_table(const NullTable& table, std::ostream& out) {
    out << "ranktest-nulltable v1\n";
    out << table.n << ' ' << table.m << ' ' << table.generator.name() << ' '
        << (table.method == NullMethod::Exact ? "exact" : "montecarlo") << ' '
        << table.seed << ' ' << table.draws << '\n';
    out << table.support.size() << '\n';
    char buf[64];
    for (const auto& [v, p] : table.support) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", v, p);
        out << buf;
    }
}

NullTable load_null_table(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "ranktest-nulltable" || version != "v1")
        throw std::runtime_error("load_null_table: unrecognized file format");
    NullTable t;
    std::string phi_name, method_name;
    in >> t.n >> t.m >> phi_name >> method_name >> t.seed >> t.draws;
    t.generator = ScoreGenerator::parse(phi_name);
    t.method = method_name == "exact" ? NullMethod::Exact : NullMethod::MonteCarlo;
    std::size_t k = 0;
    in >> k;
    t.support.resize(k);
    for (auto& [v, p] : t.support) in >> v >> p;
    if (!in) throw std::runtime_error("load_null_table: truncated file");
    return t;
}

void save_null_table_file(const NullTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_null_table(table, out);
}

NullTable load_null_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return load_null_table(in);
}

std::string null_table_cache_name(int n, int m, const ScoreGenerator& phi,
                                  NullMethod method, std::int64_t draws,
                                  std::uint64_t seed) {
    std::ostringstream name;
    name << "null_" << n << "_" << m << "_" << phi.name() << "_"
         << (method == NullMethod::Exact ? "exact" : "mc");
    if (method == NullMethod::MonteCarlo) name << "_" << draws << "_" << seed;
    std::string s = name.str();
    for (char& c : s)
        if (c == '(' || c == ')' || c == '.') c = '-';
    return s + ".tab";
}

}  // namespace ranktest
