#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranktest/baselines.hpp"
#include "ranktest/synth.hpp"
#include "ranktest/two_stage.hpp"

namespace ranktest {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One entry of the experiment's method list.
struct MethodSpec {
    enum class Kind { Ranking, RocSpace, Mmd, Energy, Fr, Tukey };
    Kind kind = Kind::Ranking;
    RankerSpec ranker;                              // Ranking / RocSpace
    ScoreGenerator phi = ScoreGenerator::mww();     // Ranking / Tukey
    std::string bandwidth = "median";               // Mmd: "median", "grid", or a number

    std::string name() const;
    // "rank:linear:mww", "rank:mlp:rtb(0.8)", "roc:linear", "mmd", "mmd:grid",
    // "energy", "fr", "tukey", "tukey:mww"
    static MethodSpec parse(const std::string& text, const TrainConfig& base = {});
};

struct ExperimentConfig {
    std::vector<ModelSpec> models;
    std::vector<MethodSpec> methods;
    int n_total = 400;          // pooled size N; n = floor(p N), m = N - n
    double p = 0.5;
    double split_fraction = 0.8;
    int replications = 100;
    std::vector<double> alphas = {0.05};
    int b_perm = 200;
    int depth_directions = 1000;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string table_dir = "";  // NullTable cache directory ("" = in-memory only)
    std::string echo;            // verbatim config file text, embedded in reports

    void validate() const;
};

// Minimal declarative config file: `key = value` lines, arrays in brackets,
// strings quoted, '#' comments.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text);

struct CellResult {
    std::string model;
    std::string method;
    std::vector<double> p_values;                // one per successful replication, in order
    std::vector<std::uint64_t> seeds;            // per-replication derived seeds
    std::vector<int> rejections;                 // per alpha, counts over replications
    std::vector<std::string> errors;             // per-replication failures ("" if ok)
    int failed = 0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;  // models x methods, model-major order
    bool partial = false;
    double wall_seconds = 0.0;

    double frequency(const CellResult& cell, int alpha_index) const;
    static double half_width(double freq, int b);  // 2 sqrt(f(1-f)/B)
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// CSV power tables, JSON report, SVG rejection-vs-alpha and p-value summary
// plots; fixed float formatting, no timestamps, byte-identical re-emission.
void emit_outputs(const ExperimentReport& report, const std::string& dir);

}  // namespace ranktest
