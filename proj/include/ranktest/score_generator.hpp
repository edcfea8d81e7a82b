#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ranktest {

// Score-generating function phi on [0, 1], nondecreasing.
// MWW: phi(u) = u.  RTB(u0): phi(u) = u * 1{u >= u0}.  Power(q): phi(u) = u^q.
class ScoreGenerator {
public:
    enum class Kind { MWW, RTB, Power };

    static ScoreGenerator mww() { return ScoreGenerator(Kind::MWW, 0.0); }
    static ScoreGenerator rtb(double u0) {
        if (!(u0 > 0.0 && u0 < 1.0)) throw std::invalid_argument("RTB: u0 must be in (0,1)");
        return ScoreGenerator(Kind::RTB, u0);
    }
    static ScoreGenerator power(double q) {
        if (!(q > 1.0)) throw std::invalid_argument("Power: q must be > 1");
        return ScoreGenerator(Kind::Power, q);
    }

    Kind kind() const { return kind_; }
    double param() const { return param_; }

    double operator()(double u) const {
        switch (kind_) {
            case Kind::MWW: return u;
            case Kind::RTB: return u >= param_ ? u : 0.0;
            case Kind::Power: return std::pow(u, param_);
        }
        return 0.0;
    }

    // d/du phi(u); valid for smooth kinds only
    double deriv(double u) const {
        switch (kind_) {
            case Kind::MWW: return 1.0;
            case Kind::Power: return param_ * std::pow(u, param_ - 1.0);
            case Kind::RTB: throw std::domain_error("RTB has no derivative at its jump");
        }
        return 0.0;
    }

    bool smooth() const { return kind_ != Kind::RTB; }

    // int_0^1 phi(u) du, closed form
    double integral() const {
        switch (kind_) {
            case Kind::MWW: return 0.5;
            case Kind::RTB: return (1.0 - param_ * param_) / 2.0;
            case Kind::Power: return 1.0 / (param_ + 1.0);
        }
        return 0.0;
    }

    double sup_norm() const { return 1.0; }  // all kinds peak at phi(1) = 1

    double deriv_sup_norm() const {
        switch (kind_) {
            case Kind::MWW: return 1.0;
            case Kind::Power: return param_;  // q u^{q-1} on [0,1], q > 1
            case Kind::RTB: throw std::domain_error("RTB is not smooth");
        }
        return 0.0;
    }

    // location of the jump for RTB, used to split quadrature domains
    bool has_kink() const { return kind_ == Kind::RTB; }
    double kink() const { return param_; }

    std::string name() const {
        switch (kind_) {
            case Kind::MWW: return "mww";
            case Kind::RTB: return "rtb(" + format_param() + ")";
            case Kind::Power: return "power(" + format_param() + ")";
        }
        return "";
    }

    bool operator==(const ScoreGenerator& o) const {
        return kind_ == o.kind_ && param_ == o.param_;
    }

    // parse "mww", "rtb(0.8)", "power(2)"; also bare "rtb" -> 0.8 default
    static ScoreGenerator parse(const std::string& text);

private:
    ScoreGenerator(Kind k, double p) : kind_(k), param_(p) {}
    std::string format_param() const;

    Kind kind_;
    double param_;
};

}  // namespace ranktest
