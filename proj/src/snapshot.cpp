#include "psc/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace psc {

namespace {

static_assert(sizeof(double) == 8);

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        T out;
        auto* s = reinterpret_cast<const unsigned char*>(&v);
        auto* d = reinterpret_cast<unsigned char*>(&out);
        for (std::size_t i = 0; i < sizeof(T); ++i) d[i] = s[sizeof(T) - 1 - i];
        return out;
    }
}

void put_u32(std::ostream& os, std::uint32_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return to_little(v);
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& u) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write("PSCF", 4);
    put_u32(os, 1u);
    put_u32(os, static_cast<std::uint32_t>(u.grid().dim()));
    for (int a = 0; a < u.grid().dim(); ++a)
        put_u32(os, static_cast<std::uint32_t>(u.grid().res()));
    for (double x : u.values()) {
        std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(x));
        os.write(reinterpret_cast<const char*>(&bits), 8);
    }
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

ScalarField read_snapshot(const std::filesystem::path& path, std::size_t point_cap) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PSCF", 4) != 0)
        throw std::runtime_error(path.string() + ": not a field snapshot");
    std::uint32_t version = get_u32(is);
    if (version != 1u)
        throw std::runtime_error(path.string() + ": unsupported snapshot version");
    std::uint32_t n = get_u32(is);
    if (n == 0 || n > 16) throw std::runtime_error(path.string() + ": bad dimension");
    std::uint32_t res = 0;
    for (std::uint32_t a = 0; a < n; ++a) {
        std::uint32_t e = get_u32(is);
        if (a == 0) res = e;
        else if (e != res)
            throw std::runtime_error(path.string() + ": anisotropic extents");
    }
    if (!is) throw std::runtime_error(path.string() + ": truncated header");
    TorusGrid grid(static_cast<int>(n), static_cast<int>(res), point_cap);
    std::vector<double> vals(grid.point_count());
    for (double& x : vals) {
        std::uint64_t bits = 0;
        is.read(reinterpret_cast<char*>(&bits), 8);
        x = std::bit_cast<double>(to_little(bits));
    }
    if (!is) throw std::runtime_error(path.string() + ": truncated payload");
    return ScalarField(grid, std::move(vals));
}

}  // namespace psc
