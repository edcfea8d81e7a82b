// Compares the OpenMP kernels against their serial reference implementations:
// identical results required, speedup reported.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ranktest/baselines.hpp"
#include "ranktest/rank_stats.hpp"
#include "ranktest/roc.hpp"
#include "ranktest/rng.hpp"
#include "ranktest/synth.hpp"

namespace rt = ranktest;

namespace {

template <typename F>
double time_of(F f, int repeats = 3) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best,
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count());
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool match) {
    std::printf("%-28s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  results %s\n", name,
                serial, parallel, serial / parallel, match ? "match" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 4000;
    std::printf("benchmarking with n = m = %d\n", n);

    auto [x, y] = rt::generate(rt::ModelSpec::l1minus(4, 0.1), n, n, 7);

    std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
    rt::Rng rng(11);
    for (auto& v : xs) v = rng.normal() + 0.2;
    for (auto& v : ys) v = rng.normal();

    {
        double a = 0, b = 0;
        double ts = time_of([&] { a = rt::auc_pairwise_serial(ys, xs); });
        double tp = time_of([&] { b = rt::auc_pairwise(ys, xs); });
        report("auc_pairwise", ts, tp, a == b);
    }
    {
        rt::NullTable a, b;
        const rt::ScoreGenerator phi = rt::ScoreGenerator::mww();
        double ts = time_of(
            [&] { a = rt::null_distribution_mc_serial(200, 200, phi, 50000, 3); }, 1);
        double tp = time_of(
            [&] {
                b = rt::null_distribution(200, 200, phi, rt::NullMethod::MonteCarlo, 2'000'000,
                                          50000, 3);
            },
            1);
        report("null_distribution_mc", ts, tp, rt::table_tv_distance(a, b) == 0.0);
    }
    {
        double a = 0, b = 0;
        double bw = rt::median_heuristic_bandwidth(x, y);
        double ts = time_of([&] { a = rt::mmd_unbiased_serial(x, y, bw); });
        double tp = time_of([&] { b = rt::mmd_unbiased(x, y, bw); });
        report("mmd_unbiased", ts, tp, a == b);
    }
    {
        double a = 0, b = 0;
        double ts = time_of([&] { a = rt::energy_statistic_serial(x, y); });
        double tp = time_of([&] { b = rt::energy_statistic(x, y); });
        report("energy_statistic", ts, tp, a == b);
    }
    {
        int a = 0, b = 0;
        double ts = time_of([&] { a = rt::fr_statistic_serial(x, y); }, 1);
        double tp = time_of([&] { b = rt::fr_statistic(x, y); }, 1);
        report("fr_statistic", ts, tp, a == b);
    }
    return 0;
}
