#pragma once

#include <string>
#include <vector>

#include "psc/torus.hpp"

namespace psc {

/** A named generator for the prescribed profile f. Built-ins:
 *    cosgap:c     f = cos(2 pi x1) - c,                 c in (0,1)
 *    bumpneg:a:w  f = (1+a) exp(-d(x,0)^2/w^2) - a,     a > 0, w in (0, 0.2]
 *    twopeak:c    f = cos(2 pi x1) + cos(2 pi x2) - c,  c in (0,2), dim >= 2
 *  Every built-in inside its documented parameter range has a negative
 *  integral and a positive maximum at any resolution >= 8.
 */
struct Preset {
    std::string name;
    std::vector<double> params;
};

/** Parse "name" or "name:p1[:p2...]" (parameters are ':'-separated so the
 *  spelling stays CSV-safe). */
Preset parse_preset(const std::string& text);

std::string preset_to_string(const Preset& p);

ScalarField make_preset_field(const TorusGrid& grid, const Preset& p);

}  // namespace psc
