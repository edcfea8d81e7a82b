#include "ranktest/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "ranktest/rng.hpp"
#include "ranktest/roc.hpp"

namespace ranktest {
namespace {

std::vector<std::string> split_tokens(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string mangle(const std::string& s) {
    std::string out;
    for (char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

}  // namespace

std::string MethodSpec::name() const {
    switch (kind) {
        case Kind::Ranking: return "rank:" + ranker.name() + ":" + phi.name();
        case Kind::RocSpace: return "roc:" + ranker.name();
        case Kind::Mmd: return "mmd:" + bandwidth;
        case Kind::Energy: return "energy";
        case Kind::Fr: return "fr";
        case Kind::Tukey: return "tukey:" + phi.name();
    }
    return "?";
}

MethodSpec MethodSpec::parse(const std::string& text, const TrainConfig& base) {
    auto tokens = split_tokens(trim(text), ':');
    if (tokens.empty() || tokens[0].empty()) throw ConfigError("empty method spec");
    MethodSpec m;
    const std::string& head = tokens[0];
    if (head == "rank") {
        if (tokens.size() < 2) throw ConfigError("rank method needs a ranker: " + text);
        m.kind = Kind::Ranking;
        m.ranker = RankerSpec::parse(tokens[1], base);
        m.phi = tokens.size() > 2 ? ScoreGenerator::parse(tokens[2]) : ScoreGenerator::mww();
        if (tokens.size() > 3) throw ConfigError("too many fields in method: " + text);
    } else if (head == "roc") {
        if (tokens.size() != 2) throw ConfigError("roc method needs a ranker: " + text);
        m.kind = Kind::RocSpace;
        m.ranker = RankerSpec::parse(tokens[1], base);
    } else if (head == "mmd") {
        m.kind = Kind::Mmd;
        if (tokens.size() > 2) throw ConfigError("too many fields in method: " + text);
        if (tokens.size() == 2) {
            m.bandwidth = tokens[1];
            if (m.bandwidth != "median" && m.bandwidth != "grid") {
                try {
                    if (!(std::stod(m.bandwidth) > 0)) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    throw ConfigError("mmd bandwidth must be median, grid, or > 0: " + text);
                }
            }
        }
    } else if (head == "energy") {
        if (tokens.size() != 1) throw ConfigError("energy takes no fields: " + text);
        m.kind = Kind::Energy;
    } else if (head == "fr") {
        if (tokens.size() != 1) throw ConfigError("fr takes no fields: " + text);
        m.kind = Kind::Fr;
    } else if (head == "tukey") {
        m.kind = Kind::Tukey;
        if (tokens.size() > 2) throw ConfigError("too many fields in method: " + text);
        if (tokens.size() == 2) m.phi = ScoreGenerator::parse(tokens[1]);
    } else {
        throw ConfigError("unknown method: " + text);
    }
    return m;
}

void ExperimentConfig::validate() const {
    if (models.empty()) throw ConfigError("config: no models");
    if (methods.empty()) throw ConfigError("config: no methods");
    if (n_total < 4) throw ConfigError("config: n_total must be >= 4");
    if (!(p > 0 && p < 1)) throw ConfigError("config: p must be in (0,1)");
    if (!(split_fraction > 0 && split_fraction < 1))
        throw ConfigError("config: split_fraction must be in (0,1)");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    for (double a : alphas)
        if (!(a > 0 && a < 1)) throw ConfigError("config: alphas must lie in (0,1)");
    if (b_perm < 1) throw ConfigError("config: b_perm must be >= 1");
    if (depth_directions < 1) throw ConfigError("config: depth_directions must be >= 1");
}

namespace {

// value grammar: number | "string" | [v, v, ...]
struct ConfigValue {
    std::vector<std::string> items;  // scalars hold exactly one item
    bool is_array = false;
};

ConfigValue parse_value(const std::string& raw, int line_no) {
    ConfigValue v;
    std::string s = trim(raw);
    if (s.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty value");
    if (s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("config line " + std::to_string(line_no) + ": unterminated array");
        v.is_array = true;
        for (std::string item : split_tokens(s.substr(1, s.size() - 2), ',')) {
            item = trim(item);
            if (item.empty()) continue;
            if (item.front() == '"') {
                if (item.size() < 2 || item.back() != '"')
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": unterminated string");
                item = item.substr(1, item.size() - 2);
            }
            v.items.push_back(item);
        }
        return v;
    }
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("config line " + std::to_string(line_no) + ": unterminated string");
        s = s.substr(1, s.size() - 2);
    }
    v.items.push_back(s);
    return v;
}

double to_number(const ConfigValue& v, const std::string& key) {
    if (v.is_array || v.items.size() != 1)
        throw ConfigError("config: key " + key + " expects a scalar");
    try {
        return std::stod(v.items[0]);
    } catch (const std::exception&) {
        throw ConfigError("config: key " + key + " expects a number, got " + v.items[0]);
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.alphas.clear();
    cfg.echo = text;
    TrainConfig base;
    std::vector<std::string> model_strs, method_strs;
    bool saw_alphas = false;

    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        // strip comments outside quotes
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        ConfigValue value = parse_value(line.substr(eq + 1), line_no);

        if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_number(value, key));
        else if (key == "n_total" || key == "N") cfg.n_total = static_cast<int>(to_number(value, key));
        else if (key == "p") cfg.p = to_number(value, key);
        else if (key == "split_fraction") cfg.split_fraction = to_number(value, key);
        else if (key == "replications" || key == "B")
            cfg.replications = static_cast<int>(to_number(value, key));
        else if (key == "b_perm") cfg.b_perm = static_cast<int>(to_number(value, key));
        else if (key == "depth_directions")
            cfg.depth_directions = static_cast<int>(to_number(value, key));
        else if (key == "out") cfg.out_dir = value.items.at(0);
        else if (key == "table_dir") cfg.table_dir = value.items.at(0);
        else if (key == "alphas") {
            saw_alphas = true;
            for (const auto& item : value.items) cfg.alphas.push_back(std::stod(item));
        } else if (key == "models") {
            for (const auto& item : value.items) model_strs.push_back(item);
        } else if (key == "methods") {
            for (const auto& item : value.items) method_strs.push_back(item);
        } else if (key == "epochs") base.epochs = static_cast<int>(to_number(value, key));
        else if (key == "learning_rate") base.learning_rate = to_number(value, key);
        else if (key == "l2_penalty") base.l2_penalty = to_number(value, key);
        else if (key == "pair_budget")
            base.pair_budget = static_cast<std::int64_t>(to_number(value, key));
        else if (key == "mlp_width") base.mlp_width = static_cast<int>(to_number(value, key));
        else if (key == "bandwidth") base.bandwidth = to_number(value, key);
        else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
    if (!saw_alphas) cfg.alphas = {0.05};

    try {
        for (const auto& s : model_strs) cfg.models.push_back(ModelSpec::parse(s));
        for (const auto& s : method_strs) cfg.methods.push_back(MethodSpec::parse(s, base));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

namespace {

struct RunOut {
    double p = 1.0;
    std::vector<char> reject;  // per alpha
    std::string error;
};

struct HarnessContext {
    const ExperimentConfig& cfg;
    NullTableCache& tables;
    const RocRegionTable* region;  // non-null iff a RocSpace method is present
    int n, m;
};

RunOut run_ranking(const HarnessContext& ctx, const MethodSpec& method, const Sample& x,
                   const Sample& y, std::uint64_t seed) {
    SplitConfig split{ctx.cfg.split_fraction, derive_seed(seed, 0x73706c74ULL)};
    RankerSpec ranker = method.ranker;
    ranker.config.seed = derive_seed(seed, 0x7472616eULL);
    SplitResult parts = split_samples(x, y, split);
    ScoringModel model = train_ranker(ranker, parts.x_train, parts.y_train);
    std::vector<double> x_scores = model.score_rows(parts.x_test);
    std::vector<double> y_scores = model.score_rows(parts.y_test);
    LinearRankStat stat = linear_rank_statistic(x_scores, y_scores, method.phi);
    auto table = ctx.tables.get(static_cast<int>(x_scores.size()),
                                static_cast<int>(y_scores.size()), method.phi, 0);
    RunOut out;
    out.p = p_value(*table, stat.centered);
    for (double a : ctx.cfg.alphas)
        out.reject.push_back(stat.centered > null_quantile(*table, a) ? 1 : 0);
    return out;
}

RunOut run_roc_space(const HarnessContext& ctx, const MethodSpec& method, const Sample& x,
                     const Sample& y, std::uint64_t seed) {
    SplitConfig split{ctx.cfg.split_fraction, derive_seed(seed, 0x73706c74ULL)};
    RankerSpec ranker = method.ranker;
    ranker.config.seed = derive_seed(seed, 0x7472616eULL);
    SplitResult parts = split_samples(x, y, split);
    ScoringModel model = train_ranker(ranker, parts.x_train, parts.y_train);
    std::vector<double> x_scores = model.score_rows(parts.x_test);
    std::vector<double> y_scores = model.score_rows(parts.y_test);
    RocCurve curve = empirical_roc(y_scores, x_scores);
    const double dist = roc_distance(curve, RocMetric::Sup);
    RunOut out;
    out.p = ctx.region->upper_p_value(dist);
    for (double a : ctx.cfg.alphas)
        out.reject.push_back(dist > ctx.region->threshold(a) ? 1 : 0);
    return out;
}

double select_grid_bandwidth(const Sample& x, const Sample& y, int b_perm,
                             std::uint64_t seed) {
    // pick on a pilot half so the selection does not bias the eval half
    SplitConfig split{0.5, derive_seed(seed, 0x62777370ULL)};
    SplitResult parts = split_samples(x, y, split);
    const int b = std::min(b_perm, 100);
    double best_bw = mmd_bandwidth_grid().front();
    double best_score = -std::numeric_limits<double>::infinity();
    int k = 0;
    for (double bw : mmd_bandwidth_grid()) {
        PermutationScheme scheme{b, derive_seed(seed, 0x62776772ULL, static_cast<std::uint64_t>(k++))};
        // standardized statistic: (observed - perm mean) / perm sd
        double observed = mmd_unbiased(parts.x_train, parts.y_train, bw);
        std::vector<double> perms(static_cast<std::size_t>(b));
        Eigen::MatrixXd pooled(parts.x_train.rows() + parts.y_train.rows(),
                               parts.x_train.cols());
        pooled.topRows(parts.x_train.rows()) = parts.x_train;
        pooled.bottomRows(parts.y_train.rows()) = parts.y_train;
        const int n = static_cast<int>(parts.x_train.rows());
        const int N = static_cast<int>(pooled.rows());
        for (int i = 0; i < b; ++i) {
            std::vector<int> idx(static_cast<std::size_t>(N));
            std::iota(idx.begin(), idx.end(), 0);
            Rng rng(derive_seed(scheme.seed, 0x7065726dULL, static_cast<std::uint64_t>(i)));
            for (int j = N - 1; j > 0; --j) {
                int l = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(j) + 1));
                std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(l)]);
            }
            Sample px(n, pooled.cols()), py(N - n, pooled.cols());
            for (int r = 0; r < n; ++r) px.row(r) = pooled.row(idx[static_cast<std::size_t>(r)]);
            for (int r = n; r < N; ++r)
                py.row(r - n) = pooled.row(idx[static_cast<std::size_t>(r)]);
            perms[static_cast<std::size_t>(i)] = mmd_unbiased(px, py, bw);
        }
        double mean = 0.0;
        for (double v : perms) mean += v;
        mean /= b;
        double var = 0.0;
        for (double v : perms) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / std::max(1, b - 1));
        double score = sd > 0 ? (observed - mean) / sd : -std::numeric_limits<double>::infinity();
        if (score > best_score) {
            best_score = score;
            best_bw = bw;
        }
    }
    return best_bw;
}

RunOut run_mmd(const HarnessContext& ctx, const MethodSpec& method, const Sample& x,
               const Sample& y, std::uint64_t seed) {
    double bw;
    const Sample* ex = &x;
    const Sample* ey = &y;
    Sample hx, hy;
    if (method.bandwidth == "median") {
        bw = median_heuristic_bandwidth(x, y);
    } else if (method.bandwidth == "grid") {
        bw = select_grid_bandwidth(x, y, ctx.cfg.b_perm, seed);
        // evaluate on the half not used for selection
        SplitConfig split{0.5, derive_seed(seed, 0x62777370ULL)};
        SplitResult parts = split_samples(x, y, split);
        hx = parts.x_test;
        hy = parts.y_test;
        ex = &hx;
        ey = &hy;
    } else {
        bw = std::stod(method.bandwidth);
    }
    PermutationScheme scheme{ctx.cfg.b_perm, derive_seed(seed, 0x6d6d6470ULL)};
    RunOut out;
    out.p = mmd_permutation_pvalue(*ex, *ey, bw, scheme);
    for (double a : ctx.cfg.alphas) out.reject.push_back(out.p <= a ? 1 : 0);
    return out;
}

RunOut run_energy(const HarnessContext& ctx, const Sample& x, const Sample& y,
                  std::uint64_t seed) {
    PermutationScheme scheme{ctx.cfg.b_perm, derive_seed(seed, 0x656e6570ULL)};
    RunOut out;
    out.p = energy_permutation_pvalue(x, y, scheme);
    for (double a : ctx.cfg.alphas) out.reject.push_back(out.p <= a ? 1 : 0);
    return out;
}

RunOut run_fr(const HarnessContext& ctx, const Sample& x, const Sample& y,
              std::uint64_t seed) {
    PermutationScheme scheme{ctx.cfg.b_perm, derive_seed(seed, 0x66727065ULL)};
    RunOut out;
    out.p = fr_permutation_pvalue(x, y, scheme);
    for (double a : ctx.cfg.alphas) out.reject.push_back(out.p <= a ? 1 : 0);
    return out;
}

RunOut run_tukey(const HarnessContext& ctx, const MethodSpec& method, const Sample& x,
                 const Sample& y, std::uint64_t seed) {
    DepthConfig depth;
    depth.directions = ctx.cfg.depth_directions;
    depth.seed = derive_seed(seed, 0x64697273ULL);
    // two-sided p-value; reject at alpha iff p <= alpha (equivalent to the
    // alpha/2-per-tail region)
    TestReport report = tukey_depth_test(x, y, method.phi, 0.5, depth,
                                         derive_seed(seed, 0x73706c74ULL), ctx.tables);
    RunOut out;
    out.p = report.p_value;
    for (double a : ctx.cfg.alphas) out.reject.push_back(out.p <= a ? 1 : 0);
    return out;
}

RunOut run_method(const HarnessContext& ctx, const MethodSpec& method, const Sample& x,
                  const Sample& y, std::uint64_t seed) {
    switch (method.kind) {
        case MethodSpec::Kind::Ranking: return run_ranking(ctx, method, x, y, seed);
        case MethodSpec::Kind::RocSpace: return run_roc_space(ctx, method, x, y, seed);
        case MethodSpec::Kind::Mmd: return run_mmd(ctx, method, x, y, seed);
        case MethodSpec::Kind::Energy: return run_energy(ctx, x, y, seed);
        case MethodSpec::Kind::Fr: return run_fr(ctx, x, y, seed);
        case MethodSpec::Kind::Tukey: return run_tukey(ctx, method, x, y, seed);
    }
    throw std::logic_error("run_method: unreachable");
}

}  // namespace

double ExperimentReport::frequency(const CellResult& cell, int alpha_index) const {
    int ok = config.replications - cell.failed;
    if (ok <= 0) return 0.0;
    return static_cast<double>(cell.rejections.at(static_cast<std::size_t>(alpha_index))) / ok;
}

double ExperimentReport::half_width(double freq, int b) {
    if (b <= 0) return 0.0;
    return 2.0 * std::sqrt(freq * (1.0 - freq) / b);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    NullTableCache tables(cfg.table_dir);
    const int n = static_cast<int>(std::floor(cfg.p * cfg.n_total));
    const int m = cfg.n_total - n;
    if (n < 2 || m < 2) throw ConfigError("config: each sample needs at least 2 points");

    // pre-warm shared tabulations so the replication loop only reads them
    const int n_train = static_cast<int>(std::floor(cfg.split_fraction * n));
    const int m_train = static_cast<int>(std::floor(cfg.split_fraction * m));
    RocRegionTable region;
    bool have_region = false;
    for (const auto& method : cfg.methods) {
        if (method.kind == MethodSpec::Kind::Ranking) {
            tables.get(n - n_train, m - m_train, method.phi, 0);
        } else if (method.kind == MethodSpec::Kind::Tukey) {
            const int nb = std::max(n, m);
            int n_ref = std::clamp(static_cast<int>(std::floor(0.5 * nb)), 1, nb - 1);
            int nd = n >= m ? n - n_ref : n;
            int md = n >= m ? m : m - n_ref;
            tables.get(nd, md, method.phi, 0);
        } else if (method.kind == MethodSpec::Kind::RocSpace && !have_region) {
            region = roc_null_threshold(n - n_train, m - m_train, 200000,
                                        derive_seed(cfg.seed, 0x726f6372ULL));
            have_region = true;
        }
    }

    HarnessContext ctx{cfg, tables, have_region ? &region : nullptr, n, m};
    const int n_models = static_cast<int>(cfg.models.size());
    const int n_methods = static_cast<int>(cfg.methods.size());
    const int B = cfg.replications;

    // slots[mi][r][mj]
    std::vector<std::vector<std::vector<RunOut>>> slots(
        static_cast<std::size_t>(n_models),
        std::vector<std::vector<RunOut>>(static_cast<std::size_t>(B)));

#pragma omp parallel for schedule(dynamic) collapse(2)
    for (int mi = 0; mi < n_models; ++mi) {
        for (int r = 0; r < B; ++r) {
            std::uint64_t rep_seed = derive_seed(cfg.seed, 0x72657020ULL,
                                                 static_cast<std::uint64_t>(mi),
                                                 static_cast<std::uint64_t>(r));
            auto& row = slots[static_cast<std::size_t>(mi)][static_cast<std::size_t>(r)];
            row.resize(static_cast<std::size_t>(n_methods));
            Sample x, y;
            std::string gen_error;
            try {
                auto xy = generate(cfg.models[static_cast<std::size_t>(mi)], n, m, rep_seed);
                x = std::move(xy.first);
                y = std::move(xy.second);
            } catch (const std::exception& e) {
                gen_error = e.what();
            }
            for (int mj = 0; mj < n_methods; ++mj) {
                auto& out = row[static_cast<std::size_t>(mj)];
                if (!gen_error.empty()) {
                    out.error = gen_error;
                    continue;
                }
                std::uint64_t method_seed =
                    derive_seed(rep_seed, 0x6d657464ULL, static_cast<std::uint64_t>(mj));
                try {
                    out = run_method(ctx, cfg.methods[static_cast<std::size_t>(mj)], x, y,
                                     method_seed);
                } catch (const std::exception& e) {
                    out = RunOut{};
                    out.error = e.what();
                }
            }
        }
    }

    ExperimentReport report;
    report.config = cfg;
    for (int mi = 0; mi < n_models; ++mi) {
        for (int mj = 0; mj < n_methods; ++mj) {
            CellResult cell;
            cell.model = cfg.models[static_cast<std::size_t>(mi)].name();
            cell.method = cfg.methods[static_cast<std::size_t>(mj)].name();
            cell.rejections.assign(cfg.alphas.size(), 0);
            for (int r = 0; r < B; ++r) {
                const RunOut& out =
                    slots[static_cast<std::size_t>(mi)][static_cast<std::size_t>(r)]
                         [static_cast<std::size_t>(mj)];
                cell.seeds.push_back(derive_seed(cfg.seed, 0x72657020ULL,
                                                 static_cast<std::uint64_t>(mi),
                                                 static_cast<std::uint64_t>(r)));
                cell.errors.push_back(out.error);
                if (!out.error.empty()) {
                    ++cell.failed;
                    report.partial = true;
                    continue;
                }
                cell.p_values.push_back(out.p);
                for (std::size_t a = 0; a < cfg.alphas.size(); ++a)
                    cell.rejections[a] += out.reject[a];
            }
            report.cells.push_back(std::move(cell));
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

std::vector<double> five_number(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto q = [&](double f) {
        double pos = f * (static_cast<double>(v.size()) - 1.0);
        std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        std::size_t hi = std::min(lo + 1, v.size() - 1);
        double w = pos - static_cast<double>(lo);
        return (1.0 - w) * v[lo] + w * v[hi];
    };
    return {v.front(), q(0.25), q(0.5), q(0.75), v.back()};
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

void write_rejection_svg(const ExperimentReport& report, const std::string& model,
                         const std::string& path) {
    const auto& alphas = report.config.alphas;
    std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
    for (const auto& cell : report.cells) {
        if (cell.model != model) continue;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t a = 0; a < alphas.size(); ++a)
            pts.emplace_back(alphas[a], report.frequency(cell, static_cast<int>(a)));
        std::sort(pts.begin(), pts.end());
        series.emplace_back(cell.method, std::move(pts));
    }

    const double w = 640, h = 480, ml = 60, mr = 180, mt = 20, mb = 50;
    auto sx = [&](double a) { return ml + a * (w - ml - mr); };
    auto sy = [&](double f) { return h - mb - f * (h - mt - mb); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    // axes and diagonal reference
    out << "<line x1=\"" << fmt("%.2f", sx(0)) << "\" y1=\"" << fmt("%.2f", sy(0)) << "\" x2=\""
        << fmt("%.2f", sx(1)) << "\" y2=\"" << fmt("%.2f", sy(0))
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt("%.2f", sx(0)) << "\" y1=\"" << fmt("%.2f", sy(0)) << "\" x2=\""
        << fmt("%.2f", sx(0)) << "\" y2=\"" << fmt("%.2f", sy(1))
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt("%.2f", sx(0)) << "\" y1=\"" << fmt("%.2f", sy(0)) << "\" x2=\""
        << fmt("%.2f", sx(1)) << "\" y2=\"" << fmt("%.2f", sy(1))
        << "\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>\n";
    out << "<text x=\"" << fmt("%.2f", (sx(0) + sx(1)) / 2)
        << "\" y=\"470\" font-size=\"14\" text-anchor=\"middle\">alpha</text>\n";
    out << "<text x=\"15\" y=\"" << fmt("%.2f", (sy(0) + sy(1)) / 2)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        << fmt("%.2f", (sy(0) + sy(1)) / 2) << ")\">rejection frequency</text>\n";

    int si = 0;
    for (const auto& [method, pts] : series) {
        const char* color = kPalette[si % 10];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [a, f] : pts)
            out << fmt("%.2f", sx(a)) << "," << fmt("%.2f", sy(f)) << " ";
        out << "\"/>\n";
        for (const auto& [a, f] : pts)
            out << "<circle cx=\"" << fmt("%.2f", sx(a)) << "\" cy=\"" << fmt("%.2f", sy(f))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        double ly = mt + 16.0 * si + 10.0;
        out << "<line x1=\"" << fmt("%.2f", w - mr + 10) << "\" y1=\"" << fmt("%.2f", ly)
            << "\" x2=\"" << fmt("%.2f", w - mr + 30) << "\" y2=\"" << fmt("%.2f", ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt("%.2f", w - mr + 35) << "\" y=\"" << fmt("%.2f", ly + 4)
            << "\" font-size=\"11\">" << method << "</text>\n";
        ++si;
    }
    out << "</svg>\n";
}

void write_pvalue_svg(const ExperimentReport& report, const std::string& model,
                      const std::string& path) {
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& cell : report.cells) {
        if (cell.model != model || cell.p_values.empty()) continue;
        series.emplace_back(cell.method, five_number(cell.p_values));
    }

    const double w = 640, h = 480, ml = 170, mr = 20, mt = 20, mb = 50;
    auto sx = [&](double p) { return ml + p * (w - ml - mr); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n";
    out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    out << "<line x1=\"" << fmt("%.2f", sx(0)) << "\" y1=\"" << fmt("%.2f", h - mb)
        << "\" x2=\"" << fmt("%.2f", sx(1)) << "\" y2=\"" << fmt("%.2f", h - mb)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt("%.2f", (sx(0) + sx(1)) / 2)
        << "\" y=\"470\" font-size=\"14\" text-anchor=\"middle\">p-value</text>\n";

    const double band = series.empty() ? 0.0 : (h - mt - mb) / static_cast<double>(series.size());
    int si = 0;
    for (const auto& [method, f] : series) {
        double yc = mt + band * (si + 0.5);
        const char* color = kPalette[si % 10];
        // whiskers min..max, box q1..q3, median tick
        out << "<line x1=\"" << fmt("%.2f", sx(f[0])) << "\" y1=\"" << fmt("%.2f", yc)
            << "\" x2=\"" << fmt("%.2f", sx(f[4])) << "\" y2=\"" << fmt("%.2f", yc)
            << "\" stroke=\"" << color << "\"/>\n";
        out << "<rect x=\"" << fmt("%.2f", sx(f[1])) << "\" y=\"" << fmt("%.2f", yc - 8)
            << "\" width=\"" << fmt("%.2f", std::max(0.5, sx(f[3]) - sx(f[1])))
            << "\" height=\"16\" fill=\"" << color << "\" fill-opacity=\"0.4\" stroke=\""
            << color << "\"/>\n";
        out << "<line x1=\"" << fmt("%.2f", sx(f[2])) << "\" y1=\"" << fmt("%.2f", yc - 8)
            << "\" x2=\"" << fmt("%.2f", sx(f[2])) << "\" y2=\"" << fmt("%.2f", yc + 8)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"5\" y=\"" << fmt("%.2f", yc + 4) << "\" font-size=\"11\">" << method
            << "</text>\n";
        ++si;
    }
    out << "</svg>\n";
}

}  // namespace

void emit_outputs(const ExperimentReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory: " + dir);

    const auto& cfg = report.config;
    std::vector<std::string> model_names;
    for (const auto& m : cfg.models) model_names.push_back(m.name());
    std::vector<std::string> method_names;
    for (const auto& m : cfg.methods) method_names.push_back(m.name());

    auto write_header = [&](std::ofstream& out) {
        out << "method";
        for (const auto& mn : model_names) out << ",\"" << mn << "\"";
        out << "\n";
    };

    if (cfg.alphas.empty()) {
        std::ofstream out(dir + "/power.csv");
        if (!out) throw std::runtime_error("cannot open for writing: " + dir + "/power.csv");
        write_header(out);
    }

    // one power table per alpha: rows = methods, columns = models
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        std::string path = dir + "/power_a" + fmt("%g", cfg.alphas[a]) + ".csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        write_header(out);
        for (std::size_t mj = 0; mj < method_names.size(); ++mj) {
            out << "\"" << method_names[mj] << "\"";
            for (std::size_t mi = 0; mi < model_names.size(); ++mi) {
                const CellResult& cell = report.cells[mi * method_names.size() + mj];
                int ok = cfg.replications - cell.failed;
                if (ok <= 0) {
                    out << ",NA";
                } else {
                    double f = report.frequency(cell, static_cast<int>(a));
                    out << "," << fmt("%.4f", f) << "±"
                        << fmt("%.4f", ExperimentReport::half_width(f, ok));
                }
            }
            out << "\n";
        }
    }

    // full JSON report
    nlohmann::ordered_json j;
    j["config"] = {
        {"n_total", cfg.n_total},
        {"p", cfg.p},
        {"split_fraction", cfg.split_fraction},
        {"replications", cfg.replications},
        {"alphas", cfg.alphas},
        {"b_perm", cfg.b_perm},
        {"depth_directions", cfg.depth_directions},
        {"seed", cfg.seed},
        {"models", model_names},
        {"methods", method_names},
        {"echo", cfg.echo},
    };
    // wall-clock stays out of the file so identical runs emit identical bytes
    j["partial"] = report.partial;
    j["cells"] = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json jc;
        jc["model"] = cell.model;
        jc["method"] = cell.method;
        int ok = cfg.replications - cell.failed;
        jc["frequencies"] = nlohmann::ordered_json::array();
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
            double f = report.frequency(cell, static_cast<int>(a));
            jc["frequencies"].push_back({
                {"alpha", cfg.alphas[a]},
                {"frequency", f},
                {"half_width_95", ExperimentReport::half_width(f, ok)},
                {"binomial_sd", std::sqrt(f * (1.0 - f))},
            });
        }
        jc["p_values"] = cell.p_values;
        jc["seeds"] = cell.seeds;
        jc["failed"] = cell.failed;
        nlohmann::ordered_json errs = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < cell.errors.size(); ++r)
            if (!cell.errors[r].empty())
                errs.push_back({{"replication", r}, {"error", cell.errors[r]}});
        jc["errors"] = errs;
        j["cells"].push_back(std::move(jc));
    }
    std::ofstream jf(dir + "/report.json");
    if (!jf) throw std::runtime_error("cannot open for writing: " + dir + "/report.json");
    jf << j.dump(2) << "\n";

    // plots (skipped entirely when the alpha grid is empty)
    if (!cfg.alphas.empty()) {
        for (const auto& mn : model_names) {
            write_rejection_svg(report, mn, dir + "/rejection_" + mangle(mn) + ".svg");
            write_pvalue_svg(report, mn, dir + "/pvalues_" + mangle(mn) + ".svg");
        }
    }
}

}  // namespace ranktest
