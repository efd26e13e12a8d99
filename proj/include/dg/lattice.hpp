#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace dg {

enum class LatticeKind { Chain1D, Square2D };
enum class Boundary { Open, Periodic };

/// Lattice geometry: a 1D chain of L sites or an L×L square lattice with
/// row-major site indexing (i,j) -> i*L + j. extent = 1 is the degenerate
/// single-site system (no neighbors) used for zero-hopping reference runs.
struct LatticeGeometry {
    LatticeKind kind = LatticeKind::Chain1D;
    std::size_t extent = 1;
    Boundary boundary = Boundary::Open;

    std::size_t n_sites() const {
        return kind == LatticeKind::Chain1D ? extent : extent * extent;
    }
};

/// Nearest neighbors of `site` under the declared boundary condition,
/// in ascending index order. Throws DimensionError for out-of-range sites.
std::vector<std::size_t> neighbors(const LatticeGeometry& geom, std::size_t site);

/// Index of the central site; requires odd extent (throws ConfigError
/// otherwise, as center-referenced correlations need a distinguished site).
std::size_t center_site(const LatticeGeometry& geom);

/// Displacement (di, dj) of `site` from the center site; dj = 0 in 1D.
std::pair<long, long> displacement_from_center(const LatticeGeometry& geom,
                                               std::size_t site);

/// Flattened neighbor lists (CSR layout) for the integrator's inner loop.
struct NeighborTable {
    std::vector<std::uint32_t> offsets;  // n_sites + 1
    std::vector<std::uint32_t> flat;     // concatenated neighbor indices

    explicit NeighborTable(const LatticeGeometry& geom);

    const std::uint32_t* begin_of(std::size_t s) const { return flat.data() + offsets[s]; }
    const std::uint32_t* end_of(std::size_t s) const { return flat.data() + offsets[s + 1]; }
};

}  // namespace dg
