#pragma once

#include <filesystem>

#include "psc/torus.hpp"

namespace psc {

/** Field snapshot file, bit-exact layout:
 *    magic "PSCF", uint32 version (=1), uint32 n, n uint32 extents,
 *    then res^n IEEE-754 binary64 values, row-major, all little-endian. */
void write_snapshot(const std::filesystem::path& path, const ScalarField& u);

ScalarField read_snapshot(const std::filesystem::path& path,
                          std::size_t point_cap = TorusGrid::default_point_cap);

}  // namespace psc
