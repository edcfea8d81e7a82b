#include "ranktest/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ranktest/rng.hpp"
#include "ranktest/roc.hpp"

namespace ranktest {

namespace {

std::vector<int> shuffled_indices(int count, std::uint64_t seed) {
    std::vector<int> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = count - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

Sample take_rows(const Sample& data, const std::vector<int>& idx, int from, int to) {
    Sample out(to - from, data.cols());
    for (int i = from; i < to; ++i) out.row(i - from) = data.row(idx[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

SplitResult split_samples(const Sample& x, const Sample& y, const SplitConfig& cfg) {
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw std::invalid_argument("split_samples: train_fraction must be in (0,1)");
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(y.rows());
    const int n_train = static_cast<int>(std::floor(cfg.train_fraction * n));
    const int m_train = static_cast<int>(std::floor(cfg.train_fraction * m));
    if (n_train < 1 || m_train < 1 || n_train >= n || m_train >= m)
        throw std::invalid_argument("split_samples: a split part would be empty");
    auto xi = shuffled_indices(n, derive_seed(cfg.seed, 0x73706c78ULL));
    auto yi = shuffled_indices(m, derive_seed(cfg.seed, 0x73706c79ULL));
    SplitResult r;
    r.x_train = take_rows(x, xi, 0, n_train);
    r.x_test = take_rows(x, xi, n_train, n);
    r.y_train = take_rows(y, yi, 0, m_train);
    r.y_test = take_rows(y, yi, m_train, m);
    return r;
}

std::string RankerSpec::name() const {
    switch (kind) {
        case Kind::Linear: return "linear";
        case Kind::Mlp: return "mlp";
        case Kind::Boosted: return "boosted";
        case Kind::SmoothedWphi: return "smoothed-wphi(" + smoothed_phi.name() + ")";
        case Kind::Fixed: return "fixed";
    }
    return "";
}

RankerSpec RankerSpec::parse(const std::string& text, const TrainConfig& base) {
    RankerSpec spec;
    spec.config = base;
    if (text == "linear") {
        spec.kind = Kind::Linear;
    } else if (text == "mlp") {
        spec.kind = Kind::Mlp;
    } else if (text == "boosted" || text == "stumps") {
        spec.kind = Kind::Boosted;
    } else if (text.rfind("smoothed", 0) == 0) {
        spec.kind = Kind::SmoothedWphi;
        auto open = text.find('(');
        if (open != std::string::npos)
            spec.smoothed_phi =
                ScoreGenerator::parse(text.substr(open + 1, text.rfind(')') - open - 1));
    } else {
        throw std::invalid_argument("unknown ranker: " + text);
    }
    return spec;
}

ScoringModel train_ranker(const RankerSpec& spec, const Sample& x_train,
                          const Sample& y_train) {
    switch (spec.kind) {
        case RankerSpec::Kind::Linear:
            return train_linear_pairwise(x_train, y_train, spec.config);
        case RankerSpec::Kind::Mlp:
            return train_mlp_pairwise(x_train, y_train, spec.config);
        case RankerSpec::Kind::Boosted:
            return train_boosted_pairwise(x_train, y_train, spec.config);
        case RankerSpec::Kind::SmoothedWphi:
            return train_smoothed_wphi(x_train, y_train, spec.smoothed_phi, spec.config);
        case RankerSpec::Kind::Fixed:
            return spec.fixed_model;
    }
    throw std::logic_error("train_ranker: unreachable");
}

std::string TestReport::to_json() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "{\"statistic_centered\": %.17g, \"quantile\": %.17g, \"p_value\": %.17g, "
                  "\"reject\": %s, \"alpha\": %.17g, \"n_train\": %d, \"m_train\": %d, "
                  "\"n_test\": %d, \"m_test\": %d, \"phi\": \"%s\", \"ranker\": \"%s\", "
                  "\"seed\": %llu}",
                  statistic_centered, quantile, p_value, reject ? "true" : "false", alpha,
                  n_train, m_train, n_test, m_test, phi.c_str(), ranker.c_str(),
                  static_cast<unsigned long long>(seed));
    return buf;
}

std::shared_ptr<const NullTable> NullTableCache::get(int n, int m, const ScoreGenerator& phi,
                                                     std::uint64_t seed) {
    std::ostringstream key;
    key << n << '/' << m << '/' << phi.name() << '/' << seed;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = memo_.find(key.str());
        if (it != memo_.end()) return it->second;
    }
    std::shared_ptr<const NullTable> table;
    if (!dir_.empty()) {
        // disk cache: exact files carry no seed, MC files do
        std::filesystem::create_directories(dir_);
        NullTable probe;
        const bool exact_fits = [&] {
            double r = 1.0;
            int k = std::min(n, m);
            for (int i = 1; i <= k; ++i) {
                r *= static_cast<double>(n + m - k + i) / i;
                if (r > 2e6) return false;
            }
            return true;
        }();
        const auto method = exact_fits ? NullMethod::Exact : NullMethod::MonteCarlo;
        const std::string path =
            dir_ + "/" + null_table_cache_name(n, m, phi, method, 200000, seed);
        if (std::filesystem::exists(path)) {
            table = std::make_shared<NullTable>(load_null_table_file(path));
        } else {
            table = std::make_shared<NullTable>(null_distribution_auto(n, m, phi, seed));
            save_null_table_file(*table, path);
        }
    } else {
        table = std::make_shared<NullTable>(null_distribution_auto(n, m, phi, seed));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(key.str(), table);
    return table;
}

TestReport ranking_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                        const ScoreGenerator& phi, double alpha, const SplitConfig& split,
                        NullTableCache& tables) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ranking_test: alpha must be in (0,1)");
    SplitResult parts = split_samples(x, y, split);
    ScoringModel model = train_ranker(ranker, parts.x_train, parts.y_train);
    std::vector<double> x_scores = model.score_rows(parts.x_test);
    std::vector<double> y_scores = model.score_rows(parts.y_test);
    LinearRankStat stat = linear_rank_statistic(x_scores, y_scores, phi);

    // table seed fixed at 0 so one tabulation is shared across replications
    auto table = tables.get(static_cast<int>(x_scores.size()),
                            static_cast<int>(y_scores.size()), phi, 0);
    TestReport report;
    report.statistic_centered = stat.centered;
    report.quantile = null_quantile(*table, alpha);
    report.p_value = p_value(*table, stat.centered);
    report.reject = stat.centered > report.quantile;
    report.alpha = alpha;
    report.n_train = static_cast<int>(parts.x_train.rows());
    report.m_train = static_cast<int>(parts.y_train.rows());
    report.n_test = static_cast<int>(x_scores.size());
    report.m_test = static_cast<int>(y_scores.size());
    report.phi = phi.name();
    report.ranker = ranker.name();
    report.seed = split.seed;
    return report;
}

namespace {

// empirical ROC sup-distance to the diagonal for a rank subset (1-based)
double subset_sup_distance(const std::vector<int>& x_ranks, int n, int m) {
    // positives at the given ranks; sweep thresholds downward
    std::vector<bool> is_pos(static_cast<std::size_t>(n + m + 1), false);
    for (int r : x_ranks) is_pos[static_cast<std::size_t>(r)] = true;
    double fpr = 0.0, tpr = 0.0, sup = 0.0;
    for (int r = n + m; r >= 1; --r) {
        if (is_pos[static_cast<std::size_t>(r)])
            tpr += 1.0 / n;
        else
            fpr += 1.0 / m;
        sup = std::max(sup, std::abs(tpr - fpr));
    }
    return sup;
}

}  // namespace

RocRegionTable roc_null_threshold(int n_test, int m_test, std::int64_t draws,
                                  std::uint64_t seed) {
    if (n_test < 1 || m_test < 1)
        throw std::invalid_argument("roc_null_threshold: sizes must be >= 1");
    const int N = n_test + m_test;
    std::vector<double> values;

    // exact enumeration when feasible
    double combos = 1.0;
    for (int i = 1; i <= std::min(n_test, m_test); ++i) {
        combos *= static_cast<double>(N - std::min(n_test, m_test) + i) / i;
        if (combos > 2e6) break;
    }
    if (combos <= 2e6) {
        std::vector<int> comb(static_cast<std::size_t>(n_test));
        std::iota(comb.begin(), comb.end(), 1);
        while (true) {
            values.push_back(subset_sup_distance(comb, n_test, m_test));
            int i = n_test - 1;
            while (i >= 0 && comb[static_cast<std::size_t>(i)] == N - (n_test - 1 - i)) --i;
            if (i < 0) break;
            ++comb[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < n_test; ++j)
                comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
        }
    } else {
        if (draws < 1000) throw std::invalid_argument("roc_null_threshold: draws must be >= 1000");
        values.resize(static_cast<std::size_t>(draws));
#pragma omp parallel for schedule(static)
        for (std::int64_t d = 0; d < draws; ++d) {
            Rng rng(derive_seed(seed, 0x726f63ULL, static_cast<std::uint64_t>(d)));
            std::vector<int> picked = sample_without_replacement(N, n_test, rng);
            for (int& r : picked) ++r;  // to 1-based ranks
            values[static_cast<std::size_t>(d)] = subset_sup_distance(picked, n_test, m_test);
        }
    }

    std::sort(values.begin(), values.end());
    RocRegionTable table;
    table.n = n_test;
    table.m = m_test;
    table.draws = combos <= 2e6 ? 0 : draws;
    table.seed = seed;
    const double w = 1.0 / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] - values[i] <= 1e-12) ++j;
        table.support.emplace_back(values[i], w * static_cast<double>(j - i));
        i = j;
    }
    return table;
}

double RocRegionTable::threshold(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("RocRegionTable::threshold: alpha in (0,1)");
    const double target = 1.0 - alpha - 1e-9;
    double cum = 0.0;
    for (const auto& [v, p] : support) {
        cum += p;
        if (cum >= target) return v;
    }
    return support.back().first;
}

double RocRegionTable::upper_p_value(double observed) const {
    double tail = 0.0;
    for (const auto& [v, p] : support)
        if (v >= observed - 1e-12) tail += p;
    return std::min(1.0, tail);
}

TestReport roc_space_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                          double alpha, const SplitConfig& split,
                          const RocRegionTable& region) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("roc_space_test: alpha must be in (0,1)");
    SplitResult parts = split_samples(x, y, split);
    if (static_cast<int>(parts.x_test.rows()) != region.n ||
        static_cast<int>(parts.y_test.rows()) != region.m)
        throw std::invalid_argument("roc_space_test: region sized for different (n'', m'')");
    ScoringModel model = train_ranker(ranker, parts.x_train, parts.y_train);
    std::vector<double> x_scores = model.score_rows(parts.x_test);
    std::vector<double> y_scores = model.score_rows(parts.y_test);
    RocCurve curve = empirical_roc(y_scores, x_scores);
    const double dist = roc_distance(curve, RocMetric::Sup);

    TestReport report;
    report.statistic_centered = dist;
    report.quantile = region.threshold(alpha);
    report.p_value = region.upper_p_value(dist);
    report.reject = dist > report.quantile;
    report.alpha = alpha;
    report.n_train = static_cast<int>(parts.x_train.rows());
    report.m_train = static_cast<int>(parts.y_train.rows());
    report.n_test = region.n;
    report.m_test = region.m;
    report.phi = "roc-sup";
    report.ranker = ranker.name();
    report.seed = split.seed;
    return report;
}

bool combined_test(const std::vector<TestReport>& reports, double alpha) {
    if (reports.empty()) throw std::invalid_argument("combined_test: no sub-tests");
    double sum = 0.0;
    for (const auto& r : reports) {
        if (!(r.alpha > 0.0)) throw std::invalid_argument("combined_test: sub-level must be > 0");
        sum += r.alpha;
    }
    if (std::abs(sum - alpha) > 1e-9)
        throw std::invalid_argument("combined_test: sub-levels must sum to alpha");
    return std::any_of(reports.begin(), reports.end(),
                       [](const TestReport& r) { return r.reject; });
}

bool combined_ranking_test(const Sample& x, const Sample& y, const RankerSpec& ranker,
                           const std::vector<ScoreGenerator>& phis,
                           const std::vector<double>& levels, double alpha,
                           const SplitConfig& split, NullTableCache& tables) {
    if (phis.size() != levels.size() || phis.empty())
        throw std::invalid_argument("combined_ranking_test: phis and levels must match");
    std::vector<TestReport> reports;
    reports.reserve(phis.size());
    for (std::size_t k = 0; k < phis.size(); ++k)
        reports.push_back(ranking_test(x, y, ranker, phis[k], levels[k], split, tables));
    return combined_test(reports, alpha);
}

}  // namespace ranktest
