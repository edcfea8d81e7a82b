#include "ranktest/score_generator.hpp"

#include <cstdio>
#include <cstdlib>

namespace ranktest {

std::string ScoreGenerator::format_param() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", param_);
    return buf;
}

ScoreGenerator ScoreGenerator::parse(const std::string& text) {
    auto param_of = [](const std::string& s, double fallback) {
        auto open = s.find('(');
        if (open == std::string::npos) return fallback;
        return std::strtod(s.c_str() + open + 1, nullptr);
    };
    if (text == "mww" || text == "wilcoxon") return mww();
    if (text.rfind("rtb", 0) == 0) return rtb(param_of(text, 0.8));
    if (text.rfind("power", 0) == 0) return power(param_of(text, 2.0));
    throw std::invalid_argument("unknown score-generating function: " + text);
}

}  // namespace ranktest
