#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "ranktest/scoring_model.hpp"

namespace ranktest {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoClosedFormOracle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelVariant { L1minus, L1plus, S1, S2, T1, T2, T3 };

struct ModelSpec {
    ModelVariant variant = ModelVariant::L1minus;
    int d = 4;
    double epsilon = 0.0;
    double beta = 0.0;  // baseline correlation for S1/S2 (and T3's base model)

    static ModelSpec l1minus(int d, double eps);
    static ModelSpec l1plus(int d, double eps);
    static ModelSpec s1(int d, double eps, double beta = 0.2);
    static ModelSpec s2(int d, double eps, double beta = 0.3);
    static ModelSpec t1(double eps);
    static ModelSpec t2(double eps);
    static ModelSpec t3(double eps);

    std::string name() const;
    // "l1minus(d=6,eps=0.1)", "s2(d=100,eps=0.1)", "t1(eps=0.05)", ...
    static ModelSpec parse(const std::string& text);
};

// The exact banded/closed-form covariances; Cholesky-validated, non-PD
// matrices raise ModelError rather than being repaired.
Eigen::MatrixXd build_covariance(ModelVariant variant, int d, double correlation = 0.0);

// Draws (X, Y) for the spec with independent derived streams per role;
// deterministic given the seed. Non-finite draws are regenerated.
std::pair<Sample, Sample> generate(const ModelSpec& spec, int n, int m, std::uint64_t seed);

// Closed-form optimal scorer: linear for the location models, quadratic
// (augmented Fixed) for the scale models; T-models have none.
ScoringModel oracle_scorer(const ModelSpec& spec);

// Same scorer with the sign resolved empirically: a pilot draw decides the
// orientation by holdout AUC >= 1/2 (the closed-form sign is kept when the
// pilot agrees, which it does for every listed model).
ScoringModel oracle_scorer_checked(const ModelSpec& spec, std::uint64_t seed);

// CSV persistence for the CLI: one row per observation, optional header;
// a ".meta" sidecar records generator provenance (model, role, seed, PRNG).
void write_sample_csv(const Sample& sample, const std::string& path, bool header);
Sample read_sample_csv(const std::string& path);
void write_sample_metadata(const std::string& csv_path, const ModelSpec& spec,
                           const std::string& role, std::uint64_t seed);

}  // namespace ranktest
