#include <catch_amalgamated.hpp>

#include "xbar/units.hpp"

using namespace xbar;
using Catch::Matchers::WithinRel;

TEST_CASE("quantities with SI prefixes and units") {
    CHECK_THAT(parse_quantity("10mV", "V"), WithinRel(10e-3, 1e-15));
    CHECK_THAT(parse_quantity("0.22uA", "A"), WithinRel(0.22e-6, 1e-15));
    CHECK_THAT(parse_quantity("0.195µA", "A"), WithinRel(0.195e-6, 1e-15));
    CHECK_THAT(parse_quantity("1MΩ", "ohm"), WithinRel(1e6, 1e-15));
    CHECK_THAT(parse_quantity("1 Gohm", "ohm"), WithinRel(1e9, 1e-15));
    CHECK_THAT(parse_quantity("10", "ohm"), WithinRel(10.0, 1e-15));
    CHECK_THAT(parse_quantity("1ns", "s"), WithinRel(1e-9, 1e-15));
    CHECK_THAT(parse_quantity("7.6fJ", "J"), WithinRel(7.6e-15, 1e-15));
    CHECK_THAT(parse_quantity("1e-8", "A"), WithinRel(1e-8, 1e-15));
    CHECK_THAT(parse_quantity("10k", ""), WithinRel(1e4, 1e-15));
}

TEST_CASE("malformed quantities are rejected") {
    CHECK_THROWS_AS(parse_quantity("", "V"), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("abc", "V"), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("10mA", "V"), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity("10 xV", "V"), std::invalid_argument);
}

TEST_CASE("number formatting round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 2.1293e-8, 6.25e-10, -1e300, 0.0}) {
        CHECK(parse_quantity(format_number(v), "") == v);
    }
}
