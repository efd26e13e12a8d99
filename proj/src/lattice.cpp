#include "dg/lattice.hpp"

#include <algorithm>
#include <string>

#include "dg/errors.hpp"

namespace dg {

namespace {

void check_site(const LatticeGeometry& geom, std::size_t site) {
    if (site >= geom.n_sites())
        throw DimensionError("site index " + std::to_string(site) +
                             " out of range for lattice with " +
                             std::to_string(geom.n_sites()) + " sites");
}

}  // namespace

std::vector<std::size_t> neighbors(const LatticeGeometry& geom, std::size_t site) {
    check_site(geom, site);
    const long L = static_cast<long>(geom.extent);
    std::vector<std::size_t> out;
    if (L < 2) return out;  // single site: no neighbors

    const bool periodic = geom.boundary == Boundary::Periodic;
    auto push_1d = [&](long i) {
        if (periodic)
            out.push_back(static_cast<std::size_t>(((i % L) + L) % L));
        else if (i >= 0 && i < L)
            out.push_back(static_cast<std::size_t>(i));
    };

    if (geom.kind == LatticeKind::Chain1D) {
        const long i = static_cast<long>(site);
        push_1d(i - 1);
        push_1d(i + 1);
    } else {
        const long i = static_cast<long>(site) / L;
        const long j = static_cast<long>(site) % L;
        auto push_2d = [&](long r, long c) {
            if (periodic) {
                r = ((r % L) + L) % L;
                c = ((c % L) + L) % L;
                out.push_back(static_cast<std::size_t>(r * L + c));
            } else if (r >= 0 && r < L && c >= 0 && c < L) {
                out.push_back(static_cast<std::size_t>(r * L + c));
            }
        };
        push_2d(i - 1, j);
        push_2d(i + 1, j);
        push_2d(i, j - 1);
        push_2d(i, j + 1);
    }
    std::sort(out.begin(), out.end());
    // periodic L=2 wraps both directions onto the same neighbor
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove(out.begin(), out.end(), site), out.end());
    return out;
}

std::size_t center_site(const LatticeGeometry& geom) {
    if (geom.extent % 2 == 0)
        throw ConfigError(
            "center_site requires an odd lattice extent, got L = " +
            std::to_string(geom.extent));
    const std::size_t h = (geom.extent - 1) / 2;
    return geom.kind == LatticeKind::Chain1D ? h : h * geom.extent + h;
}

std::pair<long, long> displacement_from_center(const LatticeGeometry& geom,
                                               std::size_t site) {
    check_site(geom, site);
    const long c = static_cast<long>(center_site(geom));
    const long L = static_cast<long>(geom.extent);
    if (geom.kind == LatticeKind::Chain1D)
        return {static_cast<long>(site) - c, 0};
    const long di = static_cast<long>(site) / L - c / L;
    const long dj = static_cast<long>(site) % L - c % L;
    return {di, dj};
}

NeighborTable::NeighborTable(const LatticeGeometry& geom) {
    const std::size_t n = geom.n_sites();
    offsets.reserve(n + 1);
    offsets.push_back(0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t nb : neighbors(geom, s))
            flat.push_back(static_cast<std::uint32_t>(nb));
        offsets.push_back(static_cast<std::uint32_t>(flat.size()));
    }
}

}  // namespace dg
