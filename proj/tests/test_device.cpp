#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "xbar/device.hpp"

using namespace xbar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double sinh_by_exp(double x) { return (std::exp(x) - std::exp(-x)) / 2.0; }
double cosh_by_exp(double x) { return (std::exp(x) + std::exp(-x)) / 2.0; }

}  // namespace

TEST_CASE("linear device currents") {
    const LinearDeviceParams p;
    CHECK_THAT(device_current(nominal_cell(Bit::Lrs, p), 0.5), WithinRel(0.5e-6, 1e-15));
    CHECK_THAT(device_current(nominal_cell(Bit::Hrs, p), 0.5), WithinRel(0.5e-9, 1e-15));
    for (double v : {-1.0, 0.0, 0.3, 2.0}) CHECK(device_conductance(nominal_cell(Bit::Hrs, p), v) == 1e-9);
}

TEST_CASE("nonlinear device currents against the exponential identity") {
    const NonlinearDeviceParams p;
    const CellState on = nominal_cell(Bit::Lrs, p);
    CHECK(device_current(on, 0.0) == 0.0);
    CHECK_THAT(device_current(on, 0.5), WithinRel(1e-8 * sinh_by_exp(1.5), 1e-14));
    CHECK_THAT(device_current(on, 0.5), WithinRel(2.1293e-8, 1e-4));
    CHECK_THAT(device_conductance(on, 0.0), WithinRel(3e-8, 1e-15));
    CHECK_THAT(device_conductance(on, 0.5), WithinRel(3e-8 * cosh_by_exp(1.5), 1e-14));
    CHECK_THAT(device_conductance(on, 0.5), WithinRel(7.0574e-8, 1e-4));
}

TEST_CASE("odd symmetry, monotonicity and derivative consistency") {
    const CellState cells[] = {nominal_cell(Bit::Lrs, LinearDeviceParams{}),
                               nominal_cell(Bit::Hrs, LinearDeviceParams{}),
                               nominal_cell(Bit::Lrs, NonlinearDeviceParams{}),
                               nominal_cell(Bit::Hrs, NonlinearDeviceParams{})};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const auto& c : cells) {
        for (int k = 0; k < 1000; ++k) {
            const double v = u(rng);
            const double i = device_current(c, v);
            CHECK(std::abs(device_current(c, -v) + i) <= 1e-15 * std::abs(i));
            const double h = 1e-7;
            const double fd = (device_current(c, v + h) - device_current(c, v - h)) / (2 * h);
            CHECK_THAT(fd, WithinRel(device_conductance(c, v), 1e-6));
            CHECK(device_conductance(c, v) > 0.0);
        }
        double prev = -INFINITY;
        for (int k = 0; k <= 1000; ++k) {
            const double i = device_current(c, -1.5 + 3.0 * k / 1000.0);
            CHECK(i > prev);
            prev = i;
        }
    }
}

TEST_CASE("LRS/HRS current ratio at the read voltage") {
    for (DeviceParams p : {DeviceParams{LinearDeviceParams{}}, DeviceParams{NonlinearDeviceParams{}}}) {
        CHECK(device_current(nominal_cell(Bit::Lrs, p), 0.5) / device_current(nominal_cell(Bit::Hrs, p), 0.5) >= 100);
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(LinearDeviceParams{0.0, 1e9}.validate());
    CHECK_THROWS(LinearDeviceParams{1e6, 1e5}.validate());
    CHECK_NOTHROW(LinearDeviceParams{1e6, 1e6}.validate());
    CHECK_THROWS(NonlinearDeviceParams{1e-8, 1e-11, 0.0}.validate());
    CHECK_THROWS(NonlinearDeviceParams{1e-11, 1e-8, 3.0}.validate());
    CHECK_THROWS(VariationSpec{-0.1, 1}.validate());
    CHECK_THROWS(VariationSpec{0.4, 1}.validate());
}

TEST_CASE("variation sampling") {
    SECTION("zero sigma gives nominal parameters") {
        const VariationSpec none{0.0, 3};
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(sample_cell(Bit::Lrs, NonlinearDeviceParams{}, none, i, 2 * i) ==
                  nominal_cell(Bit::Lrs, NonlinearDeviceParams{}));
        }
    }
    SECTION("per-cell determinism and seed dependence") {
        const VariationSpec v{0.1, 42};
        CHECK(variation_factor(v, 3, 7) == variation_factor(v, 3, 7));
        CHECK(variation_factor(v, 3, 7) != variation_factor(v, 7, 3));
        CHECK(variation_factor(v, 3, 7) != variation_factor(VariationSpec{0.1, 43}, 3, 7));
    }
    SECTION("truncated Gaussian statistics over 1e6 cells") {
        const VariationSpec v{0.1, 9};
        double sum = 0.0, sum2 = 0.0, lo = INFINITY, hi = -INFINITY;
        const std::size_t n = 1000;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double f = variation_factor(v, i, j);
                sum += f;
                sum2 += f * f;
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
        const double count = static_cast<double>(n * n);
        const double mean = sum / count;
        const double sd = std::sqrt(sum2 / count - mean * mean);
        CHECK_THAT(mean, WithinAbs(1.0, 1e-3));
        CHECK(sd >= 0.097);
        CHECK(sd <= 0.103);
        CHECK(lo >= 0.7);
        CHECK(hi <= 1.3);
    }
    SECTION("variation scales resistance or k, not a") {
        const VariationSpec v{0.1, 1};
        const CellState c = sample_cell(Bit::Lrs, NonlinearDeviceParams{}, v, 4, 5);
        CHECK(c.a == 3.0);
        CHECK_THAT(c.scale, WithinRel(1e-8 * variation_factor(v, 4, 5), 1e-15));
        const CellState l = sample_cell(Bit::Hrs, LinearDeviceParams{}, v, 4, 5);
        CHECK_THAT(l.scale, WithinRel(1e9 * variation_factor(v, 4, 5), 1e-15));
    }
}

TEST_CASE("cell arrays") {
    DataPattern p(2, 3);
    p(1, 2) = Bit::Lrs;
    const CellArray a = nominal_cells(p, LinearDeviceParams{});
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 3);
    CHECK(a(1, 2).scale == 1e6);
    CHECK(a(0, 0).scale == 1e9);
    CHECK(a.pattern() == p);
    CHECK(a.model() == DeviceModel::Linear);
    std::vector<CellState> mixed{nominal_cell(Bit::Lrs, LinearDeviceParams{}),
                                 nominal_cell(Bit::Lrs, NonlinearDeviceParams{})};
    CHECK_THROWS(CellArray(1, 2, mixed).model());
    CHECK_THROWS(CellArray(2, 2, mixed));
}
