#include "doctest.h"

#include "gdyn/measures.hpp"

#include <cmath>
#include <sstream>

using namespace gdyn;

TEST_CASE("phase measures validate and wrap") {
    PhaseMeasure m({{7.0, 0.25}, {1.0, 0.5}});
    CHECK(m.total_mass() == doctest::Approx(0.75).epsilon(1e-15));
    // wrap(7, 2*pi) frozen in the torus tests
    CHECK(m.particles()[0].position == doctest::Approx(0.7168146928204138).epsilon(1e-15));

    CHECK_THROWS_AS(PhaseMeasure({{0.0, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PhaseMeasure({{std::nan(""), 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(PhaseMeasure({{0.0, 1.0}}, 0.0), std::invalid_argument);

    PhaseMeasure d = PhaseMeasure::dirac(3.0, 2.0);
    CHECK(d.size() == 1);
    CHECK(d.total_mass() == 2.0);
}

TEST_CASE("measure families enforce shape and mass cap") {
    TorusGrid grid(4, kNodePeriod);
    std::vector<PhaseMeasure> fibers(4, PhaseMeasure::dirac(0.0, 1.0));

    MeasureFamily fam(grid, fibers, 1.0);
    CHECK(fam.cells() == 4);
    CHECK(fam.fiber(2).total_mass() == 1.0);
    CHECK_THROWS_AS(fam.fiber(4), std::out_of_range);

    // fiber count mismatch
    CHECK_THROWS_AS(MeasureFamily(grid, {PhaseMeasure::dirac(0.0)}, 1.0),
                    std::invalid_argument);
    // mass above cap
    fibers[1] = PhaseMeasure::dirac(0.0, 1.5);
    CHECK_THROWS_AS(MeasureFamily(grid, fibers, 1.0), std::invalid_argument);
    // but round-off slack is tolerated
    fibers[1] = PhaseMeasure::dirac(0.0, 1.0 + 1e-10);
    CHECK_NOTHROW(MeasureFamily(grid, fibers, 1.0));
}

TEST_CASE("serialization round trip is bit exact") {
    TorusGrid grid(4, kNodePeriod);
    std::vector<PhaseMeasure> fibers;
    fibers.push_back(PhaseMeasure({{3.14159265358979312, 1.0 / 3.0}, {0.1, 0.25}}));
    fibers.push_back(PhaseMeasure(std::vector<Particle>{}));
    fibers.push_back(PhaseMeasure::dirac(5.0, 0.125));
    fibers.push_back(PhaseMeasure({{2.0, 0.5}}));
    MeasureFamily fam(grid, fibers, 0.75);

    std::stringstream buf;
    save_measure_family(buf, fam, 0.7355);

    double t = -1.0;
    MeasureFamily back = load_measure_family(buf, &t);
    CHECK(t == 0.7355);
    CHECK(back.cells() == 4);
    CHECK(back.cap() == 0.75);
    REQUIRE(back.fiber(0).size() == 2);
    CHECK(back.fiber(0).particles()[0].position == fam.fiber(0).particles()[0].position);
    CHECK(back.fiber(0).particles()[0].weight == fam.fiber(0).particles()[0].weight);
    CHECK(back.fiber(1).empty());
    CHECK(back.fiber(2).particles()[0].weight == 0.125);
    CHECK(back.fiber(3).particles()[0].position == 2.0);
}

TEST_CASE("loader rejects malformed input") {
    std::stringstream bad1("0 0.0 1.0\n");
    CHECK_THROWS_AS(load_measure_family(bad1), std::runtime_error);

    std::stringstream bad2("# grid_resolution 2\n5 0.0 1.0\n");
    CHECK_THROWS_AS(load_measure_family(bad2), std::runtime_error);

    std::stringstream bad3("# grid_resolution 2\n0 not_a_number 1.0\n");
    CHECK_THROWS_AS(load_measure_family(bad3), std::runtime_error);
}
