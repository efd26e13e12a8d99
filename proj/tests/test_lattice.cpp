#include <doctest.h>

#include <algorithm>

#include "dg/errors.hpp"
#include "dg/lattice.hpp"

using dg::Boundary;
using dg::LatticeGeometry;
using dg::LatticeKind;

TEST_SUITE("lattice") {

TEST_CASE("chain neighbors, open and periodic") {
    const LatticeGeometry open{LatticeKind::Chain1D, 5, Boundary::Open};
    CHECK(dg::neighbors(open, 0) == std::vector<std::size_t>{1});
    CHECK(dg::neighbors(open, 2) == std::vector<std::size_t>{1, 3});
    CHECK(dg::neighbors(open, 4) == std::vector<std::size_t>{3});

    const LatticeGeometry per{LatticeKind::Chain1D, 5, Boundary::Periodic};
    CHECK(dg::neighbors(per, 0) == std::vector<std::size_t>{1, 4});
    CHECK(dg::neighbors(per, 4) == std::vector<std::size_t>{0, 3});

    CHECK_THROWS_AS((void)dg::neighbors(open, 5), dg::DimensionError);
}

TEST_CASE("degenerate cases: single site and two-site ring") {
    const LatticeGeometry single{LatticeKind::Chain1D, 1, Boundary::Open};
    CHECK(single.n_sites() == 1);
    CHECK(dg::neighbors(single, 0).empty());

    // periodic two-site chain: both directions reach the same site once
    const LatticeGeometry two{LatticeKind::Chain1D, 2, Boundary::Periodic};
    CHECK(dg::neighbors(two, 0) == std::vector<std::size_t>{1});
    CHECK(dg::neighbors(two, 1) == std::vector<std::size_t>{0});
}

TEST_CASE("square lattice neighbors") {
    const LatticeGeometry g{LatticeKind::Square2D, 3, Boundary::Open};
    CHECK(g.n_sites() == 9);
    CHECK(dg::neighbors(g, 4) == std::vector<std::size_t>{1, 3, 5, 7});  // center
    CHECK(dg::neighbors(g, 0) == std::vector<std::size_t>{1, 3});        // corner
    CHECK(dg::neighbors(g, 1) == std::vector<std::size_t>{0, 2, 4});     // edge

    const LatticeGeometry p{LatticeKind::Square2D, 3, Boundary::Periodic};
    const auto n0 = dg::neighbors(p, 0);
    CHECK(n0.size() == 4);
    CHECK(std::is_sorted(n0.begin(), n0.end()));
}

TEST_CASE("center site requires an odd extent") {
    const LatticeGeometry odd{LatticeKind::Square2D, 5, Boundary::Open};
    CHECK(dg::center_site(odd) == 12);  // (2,2) in a 5x5 grid
    const LatticeGeometry chain{LatticeKind::Chain1D, 7, Boundary::Open};
    CHECK(dg::center_site(chain) == 3);

    const LatticeGeometry even{LatticeKind::Chain1D, 4, Boundary::Open};
    CHECK_THROWS_AS((void)dg::center_site(even), dg::ConfigError);
}

TEST_CASE("displacement from center") {
    const LatticeGeometry g{LatticeKind::Square2D, 5, Boundary::Open};
    CHECK(dg::displacement_from_center(g, 12) == std::pair<long, long>{0, 0});
    CHECK(dg::displacement_from_center(g, 14) == std::pair<long, long>{0, 2});
    CHECK(dg::displacement_from_center(g, 2) == std::pair<long, long>{-2, 0});
}

TEST_CASE("flattened neighbor table matches the per-site lists") {
    for (const LatticeGeometry g :
         {LatticeGeometry{LatticeKind::Square2D, 4, Boundary::Periodic},
          LatticeGeometry{LatticeKind::Chain1D, 6, Boundary::Open}}) {
        const dg::NeighborTable table(g);
        CHECK(table.offsets.size() == g.n_sites() + 1);
        for (std::size_t s = 0; s < g.n_sites(); ++s) {
            const auto want = dg::neighbors(g, s);
            std::vector<std::size_t> got(table.begin_of(s), table.end_of(s));
            CHECK(got == want);
        }
    }
}

}  // TEST_SUITE
