#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace psc {

/** Shortest decimal form that round-trips a binary64 exactly. */
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(is),
                                     std::istreambuf_iterator<char>()};
    return fnv1a64(bytes);
}

}  // namespace psc
