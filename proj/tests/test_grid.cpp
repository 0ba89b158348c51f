#include <doctest.h>

#include "nows/grid.hpp"

using namespace nows;

TEST_CASE("grid field invariants") {
    GridField f = GridField::make_2d(3, 4, 0.5, 0.25);
    CHECK(f.size() == 12);
    f.at(1, 2) = 7.0;
    CHECK(f.data[1 * 4 + 2] == 7.0);
    CHECK(f.coord(0, 2) == doctest::Approx(1.0));
    CHECK(f.coord(1, 2) == doctest::Approx(0.5));

    GridField bad = f;
    bad.data.pop_back();
    CHECK_THROWS(bad.check());

    GridField neg = f;
    neg.spacing[0] = 0.0;
    CHECK_THROWS(neg.check());
}

TEST_CASE("1d grid") {
    GridField f = GridField::make_1d(8, 0.125, 0.0);
    CHECK(f.dims == 1);
    CHECK(f.size() == 8);
    CHECK(f.coord(0, 3) == doctest::Approx(0.375));
}
