#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ranktest/score_generator.hpp"

namespace ranktest {

// Midranks of the pooled sample: ties receive the mean of the rank positions
// they occupy, so ranks always sum to N(N+1)/2.
struct RankVector {
    std::vector<double> ranks;
    int pooled_size = 0;
};

RankVector midranks(const std::vector<double>& pooled);

// Two-sample linear rank statistic sum_i phi(Rank(x_i)/(N+1)) with midranks
// over the pooled sample. centered = raw/n - int_0^1 phi.
struct LinearRankStat {
    double raw = 0.0;
    double centered = 0.0;
};

LinearRankStat linear_rank_statistic(const std::vector<double>& x_scores,
                                     const std::vector<double>& y_scores,
                                     const ScoreGenerator& phi);

// Rank-sum statistic sum_i Rank(x_i) with midranks.
double mww_statistic(const std::vector<double>& x_scores,
                     const std::vector<double>& y_scores);

// Null distribution of the centered statistic under uniform rank subsets.
enum class NullMethod { Exact, MonteCarlo };

struct NullTable {
    int n = 0;
    int m = 0;
    ScoreGenerator generator = ScoreGenerator::mww();
    NullMethod method = NullMethod::Exact;
    std::int64_t draws = 0;      // MonteCarlo only
    std::uint64_t seed = 0;      // MonteCarlo only
    // sorted ascending; probabilities sum to 1
    std::vector<std::pair<double, double>> support;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact: enumerate all C(n+m, n) rank subsets (requires C(N,n) <= budget).
// MonteCarlo: `draws` uniform rank subsets, deterministic for fixed seed.
NullTable null_distribution(int n, int m, const ScoreGenerator& phi, NullMethod method,
                            std::int64_t budget = 2'000'000, std::int64_t draws = 200'000,
                            std::uint64_t seed = 0);

// Convenience: exact when C(N,n) fits the budget, MonteCarlo otherwise.
NullTable null_distribution_auto(int n, int m, const ScoreGenerator& phi,
                                 std::uint64_t seed = 0,
                                 std::int64_t budget = 2'000'000,
                                 std::int64_t draws = 200'000);

// Serial reference for the MonteCarlo tabulation; the OpenMP path in
// null_distribution must match it exactly.
NullTable null_distribution_mc_serial(int n, int m, const ScoreGenerator& phi,
                                      std::int64_t draws, std::uint64_t seed);

// q = inf{t >= 0 : P(centered <= t) >= 1 - alpha}
double null_quantile(const NullTable& table, double alpha);

// one-sided upper tail: P(centered >= observed)
double p_value(const NullTable& table, double observed_centered);

// lower tail: P(centered <= observed)
double p_value_lower(const NullTable& table, double observed_centered);

// total-variation distance between two tables over the merged support
double table_tv_distance(const NullTable& a, const NullTable& b);

// Asymptotic mean W_phi of W^phi_{n,m}/n for a given ROC curve, via adaptive
// Simpson quadrature to absolute tolerance 1e-8. `roc` maps [0,1] -> [0,1].
double asymptotic_mean(const std::function<double(double)>& roc, double p,
                       const ScoreGenerator& phi, double tol = 1e-8);

// Distribution-free upper bound on the null quantile for smooth phi:
// sqrt(log(18/alpha) / (C N)), C = (1/8) min(p/||phi||^2, 1/(p||phi'||^2),
// 1/((1-p)||phi'||^2)).
double quantile_upper_bound(int N, double p, const ScoreGenerator& phi, double alpha);

// NullTable persistence: text header + (value, probability) rows at full
// precision; reload is bit-exact.
void save_null_table(const NullTable& table, std::ostream& out);
NullTable load_null_table(std::istream& in);
void save_null_table_file(const NullTable& table, const std::string& path);
NullTable load_null_table_file(const std::string& path);

// Cache file name for a tabulation, derived from its defining parameters.
std::string null_table_cache_name(int n, int m, const ScoreGenerator& phi,
                                  NullMethod method, std::int64_t draws,
                                  std::uint64_t seed);

}  // namespace ranktest
