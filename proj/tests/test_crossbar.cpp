#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "xbar/error.hpp"
#include "xbar/solver.hpp"

using namespace xbar;
using test::random_cells;
using test::small_spec;

TEST_CASE("row read bias") {
    const CrossbarSpec spec = small_spec(2, 2);
    const BiasConfig b = row_read_bias(spec, 0);
    REQUIRE(b.wordlines.size() == 2);
    CHECK(std::get<Drive>(b.wordlines[0]).v == 1.2);
    CHECK(std::get<Clamp>(b.wordlines[1]).v == 0.7);
    CHECK(std::get<Clamp>(b.bitlines[0]).v == 0.7);
    CHECK(std::get<Clamp>(b.bitlines[1]).v == 0.7);
    CHECK_THROWS_AS(row_read_bias(spec, 2), std::out_of_range);

    BiasOffsets off;
    off.bitline_dv = {0.0, 2e-3};
    const BiasConfig m = row_read_bias(spec, 1, off);
    CHECK(std::get<Clamp>(m.bitlines[1]).v == Catch::Approx(0.702).epsilon(1e-15));
    CHECK(std::get<Clamp>(m.bitlines[0]).v == 0.7);
    off.bitline_dv = {1.0};
    CHECK_THROWS(row_read_bias(spec, 0, off));
}

TEST_CASE("conventional cell bias") {
    const CrossbarSpec spec = small_spec(2, 2);
    const BiasConfig b = conventional_cell_bias(spec, 0, 0);
    CHECK(std::get<Drive>(b.wordlines[0]).v == 1.2);
    CHECK(std::holds_alternative<Floating>(b.wordlines[1]));
    CHECK(std::get<Clamp>(b.bitlines[0]).v == 0.0);
    CHECK(std::holds_alternative<Floating>(b.bitlines[1]));
    const BiasConfig g = conventional_cell_bias(spec, 1, 1, UnselectedLines::Grounded);
    CHECK(std::get<Clamp>(g.wordlines[0]).v == 0.0);
    CHECK(std::get<Clamp>(g.bitlines[0]).v == 0.0);
    CHECK_THROWS_AS(conventional_cell_bias(spec, 2, 0), std::out_of_range);
}

TEST_CASE("smallest network") {
    const CrossbarSpec spec = small_spec(1, 1, 0.0);
    const Network net = build_network(spec, random_cells(1, 1, DeviceModel::Linear, 1), row_read_bias(spec, 0));
    CHECK(net.node_count() == 2);
    CHECK(net.rail_node_count() == 2);
    CHECK(net.count(BranchKind::Device) == 1);
    CHECK(net.terminals().size() == 2);
    CHECK(net.count(BranchKind::Terminal) == 0);
}

TEST_CASE("branch counts for every size up to 64 x 64") {
    for (std::size_t m = 1; m <= 64; m += (m < 8 ? 1 : 7)) {
        for (std::size_t n = 1; n <= 64; n += (n < 8 ? 1 : 9)) {
            const CrossbarSpec spec = small_spec(m, n);
            const Network net = build_network(spec, nominal_cells(DataPattern(m, n), LinearDeviceParams{}),
                                              row_read_bias(spec, 0));
            CHECK(net.count(BranchKind::Device) == m * n);
            CHECK(net.count(BranchKind::WireW) == m * (n - 1));
            CHECK(net.count(BranchKind::WireB) == (m - 1) * n);
            CHECK(net.node_count() == 2 * m * n);
            CHECK(net.terminals().size() == m + n);
        }
    }
}

TEST_CASE("driver resistance adds boundary nodes and branches") {
    CrossbarSpec spec = small_spec(3, 4);
    spec.r_driver = 50.0;
    const Network net = build_network(spec, nominal_cells(DataPattern(3, 4), LinearDeviceParams{}),
                                      conventional_cell_bias(spec, 1, 2));
    CHECK(net.count(BranchKind::Terminal) == 2);
    CHECK(net.node_count() == 2 * 12 + 2);
    for (const Terminal& t : net.terminals()) {
        CHECK(t.series_r == 50.0);
        CHECK(t.fixed_node != t.rail_node);
    }
}

TEST_CASE("terminal attachment points") {
    const CrossbarSpec spec = small_spec(3, 4);
    const Network net = build_network(spec, nominal_cells(DataPattern(3, 4), LinearDeviceParams{}),
                                      row_read_bias(spec, 1));
    for (const Terminal& t : net.terminals()) {
        if (t.line == LineKind::Wordline)
            CHECK(t.rail_node == net.wordline_node(t.index, 0));
        else
            CHECK(t.rail_node == net.bitline_node(2, t.index));
    }
    CHECK(net.rest_voltage() == 0.7);
}

TEST_CASE("construction is deterministic") {
    const CrossbarSpec spec = small_spec(5, 6);
    const CellArray cells = random_cells(5, 6, DeviceModel::Nonlinear, 4);
    const Network a = build_network(spec, cells, row_read_bias(spec, 2));
    const Network b = build_network(spec, cells, row_read_bias(spec, 2));
    REQUIRE(a.branches().size() == b.branches().size());
    for (std::size_t k = 0; k < a.branches().size(); ++k) {
        CHECK(a.branches()[k].from == b.branches()[k].from);
        CHECK(a.branches()[k].to == b.branches()[k].to);
        CHECK(a.branches()[k].g == b.branches()[k].g);
    }
}

TEST_CASE("unanchored networks are rejected") {
    const CrossbarSpec spec = small_spec(2, 2);
    BiasConfig all_floating;
    all_floating.wordlines.assign(2, Floating{});
    all_floating.bitlines.assign(2, Floating{});
    CHECK_THROWS_AS(build_network(spec, nominal_cells(DataPattern(2, 2), LinearDeviceParams{}), all_floating),
                    SingularNetworkError);
}

TEST_CASE("bank partition") {
    CrossbarSpec spec;
    spec.bank_width = 128;
    const auto banks = bank_partition(spec);
    REQUIRE(banks.size() == 4);
    CHECK(banks[3].first_col == 384);
    CHECK(banks[3].end_col == 512);
    spec.bank_width = 512;
    CHECK(bank_partition(spec).size() == 1);
    spec.bank_width = 100;
    CHECK_THROWS(bank_partition(spec));
}

TEST_CASE("collapsed rails match the vanishing wire limit") {
    const CellArray cells = random_cells(6, 5, DeviceModel::Linear, 8);
    const CrossbarSpec ideal = small_spec(6, 5, 0.0);
    const Network a = build_network(ideal, cells, row_read_bias(ideal, 3));
    CHECK(a.collapsed_rails());
    const auto ia = bitline_currents(a, solve(a));
    double i_max = 0.0;
    for (double i : ia) i_max = std::max(i_max, i);
    // The deviation from the ideal currents shrinks in proportion to r_wire. Below about
    // 0.1 ohm the clamp current carries ulp(v) * g_wire of rounding noise, so the
    // tiny-wire check is scaled by the largest column current.
    auto gap = [&](double r) {
        const CrossbarSpec spec = small_spec(6, 5, r);
        const Network b = build_network(spec, cells, row_read_bias(spec, 3));
        CHECK_FALSE(b.collapsed_rails());
        const auto ib = bitline_currents(b, solve(b));
        double worst = 0.0;
        for (std::size_t j = 0; j < 5; ++j) worst = std::max(worst, std::abs(ib[j] - ia[j]));
        return worst / i_max;
    };
    CHECK(gap(1e-3) < 1e-5);
    CHECK_THAT(gap(1.0) / gap(0.1), Catch::Matchers::WithinRel(10.0, 0.02));
}

TEST_CASE("terminal voltages for a compatible bias") {
    const CrossbarSpec spec = small_spec(3, 3);
    const Network net = build_network(spec, nominal_cells(DataPattern(3, 3), LinearDeviceParams{}),
                                      row_read_bias(spec, 0));
    const auto tv = net.terminal_voltages(row_read_bias(spec, 2));
    CHECK(tv[2] == 1.2);
    CHECK(tv[0] == 0.7);
    CHECK_THROWS(net.terminal_voltages(floating_bitline_bias(spec, 0)));
}
