#include "psc/presets.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace psc {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

Preset parse_preset(const std::string& text) {
    Preset p;
    std::stringstream ss(text);
    std::string tok;
    if (!std::getline(ss, tok, ':') || tok.empty()) bad("empty preset");
    p.name = tok;
    while (std::getline(ss, tok, ':')) {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) bad("bad preset parameter '" + tok + "'");
        p.params.push_back(v);
    }
    return p;
}

std::string preset_to_string(const Preset& p) {
    std::string s = p.name;
    char buf[64];
    for (double v : p.params) {
        std::snprintf(buf, sizeof buf, ":%.17g", v);
        s += buf;
    }
    return s;
}

ScalarField make_preset_field(const TorusGrid& grid, const Preset& p) {
    if (p.name == "cosgap") {
        if (p.params.size() != 1) bad("cosgap takes one parameter");
        double c = p.params[0];
        if (!(c > 0.0 && c < 1.0)) bad("cosgap parameter must lie in (0,1)");
        return ScalarField::from_function(grid, [c](std::span<const double> x) {
            return std::cos(two_pi * x[0]) - c;
        });
    }
    if (p.name == "bumpneg") {
        if (p.params.size() != 2) bad("bumpneg takes two parameters");
        double a = p.params[0], w = p.params[1];
        if (!(a > 0.0)) bad("bumpneg height offset must be positive");
        if (!(w > 0.0 && w <= 0.2)) bad("bumpneg width must lie in (0, 0.2]");
        std::vector<double> origin(static_cast<std::size_t>(grid.dim()), 0.0);
        return ScalarField::from_function(grid, [=](std::span<const double> x) {
            double d = torus_distance(x, std::span<const double>(origin));
            return (1.0 + a) * std::exp(-(d * d) / (w * w)) - a;
        });
    }
    if (p.name == "twopeak") {
        if (p.params.size() != 1) bad("twopeak takes one parameter");
        if (grid.dim() < 2) bad("twopeak needs dimension >= 2");
        double c = p.params[0];
        if (!(c > 0.0 && c < 2.0)) bad("twopeak parameter must lie in (0,2)");
        return ScalarField::from_function(grid, [c](std::span<const double> x) {
            return std::cos(two_pi * x[0]) + std::cos(two_pi * x[1]) - c;
        });
    }
    bad("unknown preset '" + p.name + "'");
}

}  // namespace psc
