#pragma once

#include <random>

#include "xbar/crossbar.hpp"
#include "xbar/device.hpp"
#include "xbar/experiments.hpp"

namespace xbar::test {

inline CellArray random_cells(std::size_t rows, std::size_t cols, DeviceModel m, std::uint64_t seed,
                              double sigma = 0.1) {
    auto rng = seeded_trial_stream(seed, 99);
    return sample_cells(DataPattern::random(rows, cols, 0.5, rng), default_params(m), VariationSpec{sigma, seed});
}

inline CrossbarSpec small_spec(std::size_t rows, std::size_t cols, double r_wire = 10.0) {
    CrossbarSpec s;
    s.rows = rows;
    s.cols = cols;
    s.r_wire = r_wire;
    return s;
}

}  // namespace xbar::test
