#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ranktest/rank_stats.hpp"
#include "ranktest/scoring_model.hpp"
#include "ranktest/train.hpp"

namespace ranktest {

struct SplitConfig {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Sample x_train, y_train, x_test, y_test;
};

// Stratified deterministic split: each sample shuffled with its own derived
// stream, first floor(fraction * size) rows go to training.
SplitResult split_samples(const Sample& x, const Sample& y, const SplitConfig& cfg);

struct RankerSpec {
    enum class Kind { Linear, Mlp, Boosted, SmoothedWphi, Fixed };
    Kind kind = Kind::Linear;
    TrainConfig config;
    ScoreGenerator smoothed_phi = ScoreGenerator::mww();  // SmoothedWphi only
    ScoringModel fixed_model;                             // Fixed only

    std::string name() const;
    static RankerSpec parse(const std::string& text, const TrainConfig& base = {});
};

ScoringModel train_ranker(const RankerSpec& spec, const Sample& x_train,
                          const Sample& y_train);

struct TestReport {
    double statistic_centered = 0.0;
    double quantile = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.0;
    int n_train = 0, m_train = 0, n_test = 0, m_test = 0;
    std::string phi;
    std::string ranker;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

// Thread-safe memo for null tabulations, optionally persisted to a directory.
class NullTableCache {
public:
    explicit NullTableCache(std::string dir = "") : dir_(std::move(dir)) {}
    std::shared_ptr<const NullTable> get(int n, int m, const ScoreGenerator& phi,
                                         std::uint64_t seed = 0);

private:
    std::string dir_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const NullTable>> memo_;
};

// The full two-stage procedure: split, train on the first halves, score the
// holdout halves, compare the centered linear rank statistic to the null
// quantile at level alpha.
TestReport ranking_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                        const ScoreGenerator& phi, double alpha, const SplitConfig& split,
                        NullTableCache& tables);

// Null distribution of the sup-distance between the empirical ROC of a
// uniform rank subset and the diagonal.
struct RocRegionTable {
    int n = 0, m = 0;
    std::int64_t draws = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> support;  // (sup distance, probability)

    double threshold(double alpha) const;           // (1-alpha) quantile
    double upper_p_value(double observed) const;    // P(distance >= observed)
};

RocRegionTable roc_null_threshold(int n_test, int m_test, std::int64_t draws,
                                  std::uint64_t seed);

// ROC-space variant: reject when the holdout empirical ROC is farther (sup
// norm) from the diagonal than the null threshold.
TestReport roc_space_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                          double alpha, const SplitConfig& split,
                          const RocRegionTable& region);

// Bonferroni combination: reject iff any sub-test rejects; requires the
// sub-test levels to sum to alpha.
bool combined_test(const std::vector<TestReport>& reports, double alpha);

// Convenience: run one ranking test per (phi_k, alpha_k) on a shared split
// and trained scorer, then combine.
bool combined_ranking_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                           const std::vector<ScoreGenerator>& phis,
                           const std::vector<double>& levels, double alpha,
                           const SplitConfig& split, NullTableCache& tables);

}  // namespace ranktest
