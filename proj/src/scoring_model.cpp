#include "ranktest/scoring_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ranktest {

Standardizer Standardizer::fit(const Sample& pooled) {
    Standardizer s;
    const auto n = static_cast<double>(pooled.rows());
    s.mean = pooled.colwise().mean();
    Eigen::VectorXd var =
        ((pooled.rowwise() - s.mean.transpose()).array().square().colwise().sum() / n)
            .matrix();
    s.inv_std = var.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
    return s;
}

Eigen::VectorXd augment_quadratic_features(const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd out(augmented_dim(d));
    out.head(d) = x;
    int k = d;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) out[k++] = x[i] * x[j];
    return out;
}

int augmented_dim(int d) { return d + d * (d + 1) / 2; }

double ScoringModel::score(const Eigen::VectorXd& x) const {
    if (static_cast<int>(x.size()) != input_dim)
        throw std::invalid_argument("ScoringModel::score: dimension mismatch");
    Eigen::VectorXd z = standardizer.apply(x);
    if (augment_quadratic) z = augment_quadratic_features(z);
    switch (kind) {
        case Kind::Linear:
        case Kind::Fixed:
            return weights.dot(z) + bias;
        case Kind::Mlp:
            return w2.dot((w1 * z + b1).array().tanh().matrix()) + b2;
        case Kind::BoostedStumps: {
            double s = 0.0;
            for (const Stump& st : stumps)
                s += st.weight * (z[st.feature] <= st.threshold ? st.left : st.right);
            return s;
        }
    }
    return 0.0;
}

std::vector<double> ScoringModel::score_rows(const Sample& data) const {
    std::vector<double> out(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        out[static_cast<std::size_t>(i)] = score(data.row(i).transpose());
    return out;
}

ScoringModel ScoringModel::linear(const Eigen::VectorXd& w, double b) {
    ScoringModel model;
    model.kind = Kind::Linear;
    model.input_dim = static_cast<int>(w.size());
    model.weights = w;
    model.bias = b;
    return model;
}

ScoringModel ScoringModel::fixed(const Eigen::VectorXd& w, double b, bool augmented) {
    ScoringModel model;
    model.kind = Kind::Fixed;
    model.augment_quadratic = augmented;
    model.weights = w;
    model.bias = b;
    if (augmented) {
        // recover raw input dim d from d + d(d+1)/2
        int d = 0;
        while (augmented_dim(d) < static_cast<int>(w.size())) ++d;
        if (augmented_dim(d) != static_cast<int>(w.size()))
            throw std::invalid_argument("ScoringModel::fixed: weight size is not an augmented dim");
        model.input_dim = d;
    } else {
        model.input_dim = static_cast<int>(w.size());
    }
    return model;
}

namespace {

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
    out << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out << ' ';
        put(out, v[i]);
    }
    out << '\n';
}

Eigen::VectorXd get_vector(std::istream& in) {
    Eigen::Index k = 0;
    in >> k;
    Eigen::VectorXd v(k);
    for (Eigen::Index i = 0; i < k; ++i) in >> v[i];
    return v;
}

}  // namespace

void ScoringModel::save(std::ostream& out) const {
    out << "ranktest-model v1\n";
    const char* tag = kind == Kind::Linear         ? "linear"
                      : kind == Kind::Mlp          ? "mlp"
                      : kind == Kind::BoostedStumps ? "stumps"
                                                    : "fixed";
    out << tag << ' ' << input_dim << ' ' << (augment_quadratic ? 1 : 0) << ' '
        << (degenerate ? 1 : 0) << '\n';
    out << (standardizer.active() ? 1 : 0) << '\n';
    if (standardizer.active()) {
        put_vector(out, standardizer.mean);
        put_vector(out, standardizer.inv_std);
    }
    switch (kind) {
        case Kind::Linear:
        case Kind::Fixed:
            put_vector(out, weights);
            put(out, bias);
            out << '\n';
            break;
        case Kind::Mlp:
            out << w1.rows() << ' ' << w1.cols() << '\n';
            for (Eigen::Index r = 0; r < w1.rows(); ++r)
                for (Eigen::Index c = 0; c < w1.cols(); ++c) {
                    put(out, w1(r, c));
                    out << (c + 1 == w1.cols() ? '\n' : ' ');
                }
            put_vector(out, b1);
            put_vector(out, w2);
            put(out, b2);
            out << '\n';
            break;
        case Kind::BoostedStumps:
            out << stumps.size() << '\n';
            for (const Stump& s : stumps) {
                out << s.feature << ' ';
                put(out, s.threshold);
                out << ' ';
                put(out, s.left);
                out << ' ';
                put(out, s.right);
                out << ' ';
                put(out, s.weight);
                out << '\n';
            }
            break;
    }
}

ScoringModel ScoringModel::load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "ranktest-model" || version != "v1")
        throw std::runtime_error("ScoringModel::load: unrecognized format");
    ScoringModel model;
    std::string tag;
    int aug = 0, degen = 0, has_std = 0;
    in >> tag >> model.input_dim >> aug >> degen;
    model.augment_quadratic = aug != 0;
    model.degenerate = degen != 0;
    in >> has_std;
    if (has_std) {
        model.standardizer.mean = get_vector(in);
        model.standardizer.inv_std = get_vector(in);
    }
    if (tag == "linear" || tag == "fixed") {
        model.kind = tag == "linear" ? Kind::Linear : Kind::Fixed;
        model.weights = get_vector(in);
        in >> model.bias;
    } else if (tag == "mlp") {
        model.kind = Kind::Mlp;
        Eigen::Index r = 0, c = 0;
        in >> r >> c;
        model.w1.resize(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) in >> model.w1(i, j);
        model.b1 = get_vector(in);
        model.w2 = get_vector(in);
        in >> model.b2;
    } else if (tag == "stumps") {
        model.kind = Kind::BoostedStumps;
        std::size_t k = 0;
        in >> k;
        model.stumps.resize(k);
        for (Stump& s : model.stumps)
            in >> s.feature >> s.threshold >> s.left >> s.right >> s.weight;
    } else {
        throw std::runtime_error("ScoringModel::load: unknown kind " + tag);
    }
    if (!in) throw std::runtime_error("ScoringModel::load: truncated file");
    return model;
}

void ScoringModel::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    save(out);
}

ScoringModel ScoringModel::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return load(in);
}

}  // namespace ranktest
