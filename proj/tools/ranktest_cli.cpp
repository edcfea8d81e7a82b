#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "ranktest/baselines.hpp"
#include "ranktest/harness.hpp"
#include "ranktest/rank_stats.hpp"
#include "ranktest/rng.hpp"
#include "ranktest/synth.hpp"
#include "ranktest/two_stage.hpp"

namespace rt = ranktest;

namespace {

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << text;
}

int run_generate(const std::string& model, int n, int m, std::uint64_t seed,
                 const std::string& out_prefix, bool header) {
    rt::ModelSpec spec = rt::ModelSpec::parse(model);
    auto [x, y] = rt::generate(spec, n, m, seed);
    rt::write_sample_csv(x, out_prefix + "_x.csv", header);
    rt::write_sample_metadata(out_prefix + "_x.csv", spec, "X", seed);
    rt::write_sample_csv(y, out_prefix + "_y.csv", header);
    rt::write_sample_metadata(out_prefix + "_y.csv", spec, "Y", seed);
    std::cout << "wrote " << out_prefix << "_x.csv (" << n << " rows), " << out_prefix
              << "_y.csv (" << m << " rows)\n";
    return 0;
}

int run_test(const std::string& x_path, const std::string& y_path, const std::string& method,
             const std::string& ranker, const std::string& phi, double alpha,
             std::uint64_t seed, double split_fraction, int b_perm, int directions,
             const std::string& table_dir, const std::string& out_path) {
    rt::Sample x = rt::read_sample_csv(x_path);
    rt::Sample y = rt::read_sample_csv(y_path);
    rt::NullTableCache tables(table_dir);
    rt::TestReport report;

    if (method == "rank") {
        rt::RankerSpec spec = rt::RankerSpec::parse(ranker);
        spec.config.seed = rt::derive_seed(seed, 0x7472616eULL);
        report = rt::ranking_test(x, y, spec, rt::ScoreGenerator::parse(phi), alpha,
                                  {split_fraction, seed}, tables);
    } else if (method == "roc") {
        rt::RankerSpec spec = rt::RankerSpec::parse(ranker);
        spec.config.seed = rt::derive_seed(seed, 0x7472616eULL);
        const int n = static_cast<int>(x.rows()), m = static_cast<int>(y.rows());
        const int nt = static_cast<int>(std::floor(split_fraction * n));
        const int mt = static_cast<int>(std::floor(split_fraction * m));
        rt::RocRegionTable region = rt::roc_null_threshold(
            n - nt, m - mt, 200000, rt::derive_seed(seed, 0x726f6372ULL));
        report = rt::roc_space_test(x, y, spec, alpha, {split_fraction, seed}, region);
    } else if (method == "tukey") {
        rt::DepthConfig cfg;
        cfg.directions = directions;
        cfg.seed = rt::derive_seed(seed, 0x64697273ULL);
        report = rt::tukey_depth_test(x, y, rt::ScoreGenerator::parse(phi), alpha, cfg, seed,
                                      tables);
    } else if (method == "mmd" || method == "energy" || method == "fr") {
        rt::PermutationScheme scheme{b_perm, rt::derive_seed(seed, 0x7065726dULL)};
        double stat = 0.0, p = 1.0;
        if (method == "mmd") {
            double bw = rt::median_heuristic_bandwidth(x, y);
            stat = rt::mmd_unbiased(x, y, bw);
            p = rt::mmd_permutation_pvalue(x, y, bw, scheme);
        } else if (method == "energy") {
            stat = rt::energy_statistic(x, y);
            p = rt::energy_permutation_pvalue(x, y, scheme);
        } else {
            stat = rt::fr_statistic(x, y);
            p = rt::fr_permutation_pvalue(x, y, scheme);
        }
        report.statistic_centered = stat;
        report.p_value = p;
        report.reject = p <= alpha;
        report.alpha = alpha;
        report.n_test = static_cast<int>(x.rows());
        report.m_test = static_cast<int>(y.rows());
        report.ranker = method;
        report.seed = seed;
    } else {
        throw rt::ConfigError("unknown method: " + method);
    }
    write_text(out_path, report.to_json() + "\n");
    return 0;
}

int run_tabulate(int n, int m, const std::string& phi, const std::string& method,
                 std::uint64_t seed, std::int64_t draws, const std::string& out_path) {
    rt::ScoreGenerator gen = rt::ScoreGenerator::parse(phi);
    rt::NullTable table;
    if (method == "exact")
        table = rt::null_distribution(n, m, gen, rt::NullMethod::Exact);
    else if (method == "mc" || method == "montecarlo")
        table = rt::null_distribution(n, m, gen, rt::NullMethod::MonteCarlo, 2'000'000, draws,
                                      seed);
    else if (method == "auto")
        table = rt::null_distribution_auto(n, m, gen, seed, 2'000'000, draws);
    else
        throw rt::ConfigError("tabulate method must be exact, mc, or auto");
    std::ostringstream ss;
    rt::save_null_table(table, ss);
    write_text(out_path, ss.str());
    return 0;
}

int run_experiment_cmd(const std::string& config_path, const std::string& out_override,
                       std::int64_t seed_override) {
    rt::ExperimentConfig cfg = rt::load_experiment_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    rt::ExperimentReport report = rt::run_experiment(cfg);
    rt::emit_outputs(report, cfg.out_dir);
    std::cout << "experiment complete: " << report.cells.size() << " cells, "
              << cfg.replications << " replications, outputs in " << cfg.out_dir
              << (report.partial ? " (PARTIAL: some replications failed)" : "") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ranking-based two-sample tests"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "draw a synthetic two-sample dataset to CSV");
    std::string g_model = "l1minus(d=4,eps=0)";
    int g_n = 100, g_m = 100;
    std::uint64_t g_seed = 0;
    std::string g_out = "sample";
    bool g_header = false;
    gen->add_option("--model", g_model, "model spec, e.g. l1minus(d=6,eps=0.1)");
    gen->add_option("-n", g_n, "rows of X");
    gen->add_option("-m", g_m, "rows of Y");
    gen->add_option("--seed", g_seed, "master seed");
    gen->add_option("--out", g_out, "output prefix (<out>_x.csv, <out>_y.csv)");
    gen->add_flag("--header", g_header, "write a CSV header row");

    // test
    auto* tst = app.add_subcommand("test", "run a two-sample test on two CSV files");
    std::string t_x, t_y, t_method = "rank", t_ranker = "linear", t_phi = "mww";
    double t_alpha = 0.05, t_split = 0.8;
    std::uint64_t t_seed = 0;
    int t_bperm = 1000, t_dirs = 1000;
    std::string t_tables, t_out;
    tst->add_option("x_csv", t_x, "positive-sample CSV")->required();
    tst->add_option("y_csv", t_y, "negative-sample CSV")->required();
    tst->add_option("--method", t_method, "rank, roc, mmd, energy, fr, or tukey");
    tst->add_option("--ranker", t_ranker, "linear, mlp, boosted, or smoothed(<phi>)");
    tst->add_option("--phi", t_phi, "mww, rtb(u0), or power(q)");
    tst->add_option("--alpha", t_alpha, "test level");
    tst->add_option("--seed", t_seed, "master seed");
    tst->add_option("--split-fraction", t_split, "training fraction of each sample");
    tst->add_option("--b-perm", t_bperm, "permutations for baseline calibration");
    tst->add_option("--directions", t_dirs, "random directions for tukey depth");
    tst->add_option("--table-dir", t_tables, "null-table cache directory");
    tst->add_option("--out", t_out, "write the report JSON here instead of stdout");

    // tabulate
    auto* tab = app.add_subcommand("tabulate", "compute a null table");
    int b_n = 2, b_m = 2;
    std::string b_phi = "mww", b_method = "auto", b_out;
    std::uint64_t b_seed = 0;
    std::int64_t b_draws = 200000;
    tab->add_option("n", b_n, "positive sample size")->required();
    tab->add_option("m", b_m, "negative sample size")->required();
    tab->add_option("phi", b_phi, "score-generating function")->required();
    tab->add_option("method", b_method, "exact, mc, or auto");
    tab->add_option("--seed", b_seed, "Monte-Carlo seed");
    tab->add_option("--draws", b_draws, "Monte-Carlo draws");
    tab->add_option("--out", b_out, "write the table here instead of stdout");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a config-driven experiment");
    std::string e_config, e_out;
    std::int64_t e_seed = -1;
    exp->add_option("config", e_config, "experiment config file")->required();
    exp->add_option("--out", e_out, "override the output directory");
    exp->add_option("--seed", e_seed, "override the master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return run_generate(g_model, g_n, g_m, g_seed, g_out, g_header);
        if (tst->parsed())
            return run_test(t_x, t_y, t_method, t_ranker, t_phi, t_alpha, t_seed, t_split,
                            t_bperm, t_dirs, t_tables, t_out);
        if (tab->parsed()) return run_tabulate(b_n, b_m, b_phi, b_method, b_seed, b_draws, b_out);
        if (exp->parsed()) return run_experiment_cmd(e_config, e_out, e_seed);
    } catch (const rt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rt::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
