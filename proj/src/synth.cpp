#include "ranktest/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "ranktest/rng.hpp"

namespace ranktest {
namespace {

Eigen::MatrixXd from_bands(int d, const std::vector<std::vector<double>>& bands) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int b = 0; b < static_cast<int>(bands.size()); ++b) {
        for (int i = 0; i + b < d; ++i) {
            s(i, i + b) = bands[b][i];
            s(i + b, i) = bands[b][i];
        }
    }
    return s;
}

Eigen::MatrixXd l1minus_cov(int d) {
    if (d == 4)
        return from_bands(4, {{2, 6, 1, 5}, {-1, 0, 0}, {-1, 0}, {-1}});
    if (d == 6)
        return from_bands(
            6, {{2, 6, 1, 5, 4, 3}, {-1, 0, 0, 0, 0}, {-1, 0, 0, 0}, {-1, 0, 0}, {-1, 0}, {-1}});
    throw ModelError("L1minus: d must be 4 or 6");
}

Eigen::MatrixXd l1plus_cov(int d) {
    if (d == 4)
        return from_bands(4, {{6, 4, 5, 3}, {-2, 4, 2}, {-3, 0}, {-2}});
    if (d == 6)
        return from_bands(
            6, {{6, 5, 5, 3, 2, 3}, {-2, 4, 2, 1, 0}, {-3, 0, 0, 1}, {-2, 1, 1}, {-3, 2}, {-2}});
    throw ModelError("L1plus: d must be 4 or 6");
}

Eigen::LLT<Eigen::MatrixXd> validated_llt(const Eigen::MatrixXd& sigma,
                                          const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw ModelError(what + ": covariance is not positive definite");
    return llt;
}

Sample gaussian_sample(const Eigen::VectorXd& mu, const Eigen::MatrixXd& chol_lower, int n,
                       Rng& rng) {
    const int d = static_cast<int>(mu.size());
    Sample out(n, d);
    Eigen::VectorXd z(d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        out.row(i) = (mu + chol_lower * z).transpose();
    }
    return out;
}

Sample cauchy_sample(const Eigen::VectorXd& location, int n, Rng& rng) {
    const int d = static_cast<int>(location.size());
    Sample out(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double v;
            do {
                v = location[j] + rng.cauchy();
            } while (!std::isfinite(v));
            out(i, j) = v;
        }
    return out;
}

// (mu_X, mu_Y, Sigma_X, Sigma_Y) of the Gaussian model underlying a spec;
// T2/T3 reuse these for the log-scale draws.
struct GaussianParams {
    Eigen::VectorXd mu_x, mu_y;
    Eigen::MatrixXd sigma_x, sigma_y;
};

GaussianParams gaussian_params(const ModelSpec& spec) {
    GaussianParams p;
    switch (spec.variant) {
        case ModelVariant::L1minus:
        case ModelVariant::L1plus: {
            p.sigma_x = build_covariance(spec.variant, spec.d);
            p.sigma_y = p.sigma_x;
            p.mu_x = Eigen::VectorXd::Constant(spec.d, spec.epsilon / std::sqrt(spec.d));
            p.mu_y = Eigen::VectorXd::Zero(spec.d);
            return p;
        }
        case ModelVariant::S1:
        case ModelVariant::S2: {
            p.sigma_x = build_covariance(spec.variant, spec.d, spec.beta + spec.epsilon);
            p.sigma_y = build_covariance(spec.variant, spec.d, spec.beta);
            p.mu_x = Eigen::VectorXd::Zero(spec.d);
            p.mu_y = p.mu_x;
            return p;
        }
        case ModelVariant::T2:
            // the published L1+ bands are not positive definite (surfaced by
            // build_covariance), so the lognormal location model uses L1-
            return gaussian_params(ModelSpec::l1minus(spec.d, spec.epsilon));
        case ModelVariant::T3:
            return gaussian_params(ModelSpec::s1(spec.d, spec.epsilon, spec.beta));
        default:
            throw ModelError("gaussian_params: not a Gaussian-backed model");
    }
}

std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

ModelSpec ModelSpec::l1minus(int d, double eps) { return {ModelVariant::L1minus, d, eps, 0.0}; }
ModelSpec ModelSpec::l1plus(int d, double eps) { return {ModelVariant::L1plus, d, eps, 0.0}; }
ModelSpec ModelSpec::s1(int d, double eps, double beta) { return {ModelVariant::S1, d, eps, beta}; }
ModelSpec ModelSpec::s2(int d, double eps, double beta) { return {ModelVariant::S2, d, eps, beta}; }
ModelSpec ModelSpec::t1(double eps) { return {ModelVariant::T1, 3, eps, 0.0}; }
ModelSpec ModelSpec::t2(double eps) { return {ModelVariant::T2, 4, eps, 0.0}; }
ModelSpec ModelSpec::t3(double eps) { return {ModelVariant::T3, 20, eps, 0.2}; }

std::string ModelSpec::name() const {
    switch (variant) {
        case ModelVariant::L1minus:
            return "l1minus(d=" + std::to_string(d) + ",eps=" + format_num(epsilon) + ")";
        case ModelVariant::L1plus:
            return "l1plus(d=" + std::to_string(d) + ",eps=" + format_num(epsilon) + ")";
        case ModelVariant::S1:
            return "s1(d=" + std::to_string(d) + ",eps=" + format_num(epsilon) +
                   ",beta=" + format_num(beta) + ")";
        case ModelVariant::S2:
            return "s2(d=" + std::to_string(d) + ",eps=" + format_num(epsilon) +
                   ",beta=" + format_num(beta) + ")";
        case ModelVariant::T1:
            return "t1(eps=" + format_num(epsilon) + ")";
        case ModelVariant::T2:
            return "t2(eps=" + format_num(epsilon) + ")";
        case ModelVariant::T3:
            return "t3(eps=" + format_num(epsilon) + ")";
    }
    return "?";
}

ModelSpec ModelSpec::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(c));
    auto paren = s.find('(');
    std::string head = paren == std::string::npos ? s : s.substr(0, paren);

    ModelSpec spec;
    if (head == "l1minus" || head == "l1-") spec = l1minus(4, 0.0);
    else if (head == "l1plus" || head == "l1+") spec = l1plus(4, 0.0);
    else if (head == "s1") spec = s1(20, 0.0);
    else if (head == "s2") spec = s2(20, 0.0);
    else if (head == "t1") spec = t1(0.0);
    else if (head == "t2") spec = t2(0.0);
    else if (head == "t3") spec = t3(0.0);
    else throw ModelError("unknown model: " + text);

    if (paren == std::string::npos) return spec;
    if (s.back() != ')') throw ModelError("malformed model spec: " + text);
    std::string args = s.substr(paren + 1, s.size() - paren - 2);
    std::stringstream ss(args);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
        if (kv.empty()) continue;
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ModelError("malformed model argument: " + kv);
        std::string key = kv.substr(0, eq);
        double value = std::stod(kv.substr(eq + 1));
        if (key == "d") {
            if (spec.variant == ModelVariant::T1 || spec.variant == ModelVariant::T2 ||
                spec.variant == ModelVariant::T3)
                throw ModelError("model " + head + " has a fixed dimension");
            spec.d = static_cast<int>(value);
        } else if (key == "eps" || key == "epsilon") {
            spec.epsilon = value;
        } else if (key == "beta") {
            if (spec.variant != ModelVariant::S1 && spec.variant != ModelVariant::S2 &&
                spec.variant != ModelVariant::T3)
                throw ModelError("model " + head + " takes no beta");
            spec.beta = value;
        } else {
            throw ModelError("unknown model argument: " + key);
        }
    }
    if (spec.epsilon < 0) throw ModelError("epsilon must be >= 0");
    if (spec.d < 1) throw ModelError("dimension must be >= 1");
    return spec;
}

Eigen::MatrixXd build_covariance(ModelVariant variant, int d, double correlation) {
    Eigen::MatrixXd sigma;
    switch (variant) {
        case ModelVariant::L1minus:
            sigma = l1minus_cov(d);
            break;
        case ModelVariant::L1plus:
            sigma = l1plus_cov(d);
            break;
        case ModelVariant::S1: {
            sigma.resize(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    sigma(i, j) = std::pow(correlation, std::abs(i - j));
            break;
        }
        case ModelVariant::S2: {
            sigma = Eigen::MatrixXd::Constant(d, d, correlation);
            sigma.diagonal().setOnes();
            break;
        }
        default:
            throw ModelError("build_covariance: model has no single covariance");
    }
    validated_llt(sigma, "build_covariance");
    return sigma;
}

std::pair<Sample, Sample> generate(const ModelSpec& spec, int n, int m, std::uint64_t seed) {
    if (n < 1 || m < 1) throw ModelError("generate: n, m must be >= 1");
    Rng rng_x(derive_seed(seed, 0x67656e58ULL));  // role X stream
    Rng rng_y(derive_seed(seed, 0x67656e59ULL));  // role Y stream

    if (spec.variant == ModelVariant::T1) {
        Eigen::VectorXd loc_x(3), loc_y(3);
        loc_x << spec.epsilon, spec.epsilon, 0.0;
        loc_y.setZero();
        return {cauchy_sample(loc_x, n, rng_x), cauchy_sample(loc_y, m, rng_y)};
    }

    GaussianParams p = gaussian_params(spec);
    Eigen::MatrixXd lx = validated_llt(p.sigma_x, "generate").matrixL();
    Eigen::MatrixXd ly = validated_llt(p.sigma_y, "generate").matrixL();
    Sample x = gaussian_sample(p.mu_x, lx, n, rng_x);
    Sample y = gaussian_sample(p.mu_y, ly, m, rng_y);
    if (spec.variant == ModelVariant::T2 || spec.variant == ModelVariant::T3) {
        x = x.array().exp();
        y = y.array().exp();
    }
    return {std::move(x), std::move(y)};
}

ScoringModel oracle_scorer(const ModelSpec& spec) {
    switch (spec.variant) {
        case ModelVariant::L1minus:
        case ModelVariant::L1plus: {
            GaussianParams p = gaussian_params(spec);
            Eigen::VectorXd w =
                validated_llt(p.sigma_x, "oracle_scorer").solve(p.mu_x - p.mu_y);
            return ScoringModel::linear(w);
        }
        case ModelVariant::S1:
        case ModelVariant::S2: {
            GaussianParams p = gaussian_params(spec);
            // log-likelihood ratio of N(0, Sigma_X) vs N(0, Sigma_Y):
            // z' (Sigma_Y^{-1} - Sigma_X^{-1}) z / 2, increasing in X-likeness
            Eigen::MatrixXd theta =
                validated_llt(p.sigma_y, "oracle_scorer").solve(Eigen::MatrixXd::Identity(spec.d, spec.d)) -
                validated_llt(p.sigma_x, "oracle_scorer").solve(Eigen::MatrixXd::Identity(spec.d, spec.d));
            Eigen::VectorXd w = Eigen::VectorXd::Zero(augmented_dim(spec.d));
            int k = spec.d;
            for (int i = 0; i < spec.d; ++i)
                for (int j = i; j < spec.d; ++j)
                    w[k++] = i == j ? theta(i, i) : 2.0 * theta(i, j);
            return ScoringModel::fixed(w, 0.0, true);
        }
        default:
            throw NoClosedFormOracle("oracle_scorer: no closed form for " + spec.name());
    }
}

ScoringModel oracle_scorer_checked(const ModelSpec& spec, std::uint64_t seed) {
    ScoringModel model = oracle_scorer(spec);
    auto [x, y] = generate(spec, 2000, 2000, derive_seed(seed, 0x6f726163ULL));
    std::vector<double> sx = model.score_rows(x);
    std::vector<double> sy = model.score_rows(y);
    // pairwise AUC with half credit for ties, without pulling in the roc module
    std::vector<double> sorted_y = sy;
    std::sort(sorted_y.begin(), sorted_y.end());
    double conc = 0.0;
    for (double v : sx) {
        auto lo = std::lower_bound(sorted_y.begin(), sorted_y.end(), v);
        auto hi = std::upper_bound(sorted_y.begin(), sorted_y.end(), v);
        conc += static_cast<double>(lo - sorted_y.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    double auc = conc / (static_cast<double>(sx.size()) * static_cast<double>(sy.size()));
    if (auc < 0.5) model.weights = -model.weights;
    return model;
}

void write_sample_csv(const Sample& sample, const std::string& path, bool header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const int d = static_cast<int>(sample.cols());
    if (header) {
        for (int j = 0; j < d; ++j) out << (j ? ",x" : "x") << j;
        out << "\n";
    }
    char buf[40];
    for (int i = 0; i < sample.rows(); ++i) {
        for (int j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", sample(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Sample read_sample_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() &&
                       std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;  // header line
            throw std::runtime_error("non-numeric row in " + path);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("no data rows in " + path);
    Sample out(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out(i, j) = rows[i][j];
    return out;
}

void write_sample_metadata(const std::string& csv_path, const ModelSpec& spec,
                           const std::string& role, std::uint64_t seed) {
    std::ofstream out(csv_path + ".meta");
    if (!out) throw std::runtime_error("cannot open for writing: " + csv_path + ".meta");
    out << "prng splitmix64-counter\n";
    out << "model " << spec.name() << "\n";
    out << "role " << role << "\n";
    out << "seed " << seed << "\n";
}

}  // namespace ranktest
