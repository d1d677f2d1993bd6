#include "xbar/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>

#include "xbar/analytics.hpp"
#include "xbar/experiments.hpp"
#include "xbar/readout.hpp"
#include "xbar/solver.hpp"

namespace xbar {

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace

bool run_selftest(std::ostream& os, unsigned seeds) {
    bool all = true;
    auto check = [&](const std::string& name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string note;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            note = std::string(" (") + e.what() + ")";
        }
        os << (ok ? "PASS " : "FAIL ") << name << note << '\n';
        all = all && ok;
    };

    check("sparse and dense solves agree on random small arrays", [&] {
        for (unsigned s = 0; s < seeds; ++s) {
            for (DeviceModel m : {DeviceModel::Linear, DeviceModel::Nonlinear}) {
                auto rng = seeded_trial_stream(s, 0);
                CrossbarSpec spec;
                spec.rows = 1 + rng() % 6;
                spec.cols = 1 + rng() % 6;
                const auto cells = sample_cells(DataPattern::random(spec.rows, spec.cols, 0.5, rng),
                                                default_params(m), VariationSpec{0.1, s});
                const Network net = build_network(spec, cells, row_read_bias(spec, rng() % spec.rows));
                const Solution a = solve(net), b = dense_reference_solve(net);
                if (max_abs_diff(a.node_voltages, b.node_voltages) > 1e-10) return false;
                if (a.kcl_residual > 1e-12) return false;
            }
        }
        return true;
    });

    check("row readout without wire resistance sees only the target cell", [&] {
        for (unsigned s = 0; s < seeds; ++s) {
            auto rng = seeded_trial_stream(s, 1);
            CrossbarSpec spec;
            spec.rows = spec.cols = 16;
            spec.r_wire = 0.0;
            const auto cells = sample_cells(DataPattern::random(16, 16, 0.5, rng), LinearDeviceParams{},
                                            VariationSpec{0.1, s});
            const std::size_t row = rng() % 16;
            const auto r = read_row(spec, cells, row, midpoint_threshold(spec, LinearDeviceParams{}));
            for (std::size_t j = 0; j < 16; ++j)
                if (std::abs(r.sensed[j] - device_current(cells(row, j), spec.read_voltage())) > 1e-12) return false;
        }
        return true;
    });

    check("figure-of-merit table reproduces the published column", [] {
        const auto rows = table1_report(1);
        return std::all_of(rows.begin(), rows.end(), [](const Table1Row& r) { return r.match; });
    });

    check("bias mismatch widths", [] {
        MismatchParams lin;
        MismatchParams nl;
        nl.device = NonlinearDeviceParams{};
        return max_column_width(lin) == 195 && max_column_width(nl) == 6500;
    });

    check("exact power matches source injection", [&] {
        CrossbarSpec spec;
        spec.rows = spec.cols = 12;
        auto rng = seeded_trial_stream(7, 0);
        const auto cells = nominal_cells(DataPattern::random(12, 12, 0.5, rng), LinearDeviceParams{});
        const Network net = build_network(spec, cells, row_read_bias(spec, 5));
        const auto p = power_exact(net, solve(net));
        const double slack = 1e-14 * std::abs(p.source_sum_w);
        return std::abs(p.branch_sum_w - p.source_sum_w) <= p.residual_w + slack &&
               p.source_sum_w < power_row_approx(spec, cells, 5);
    });

    return all;
}

}  // namespace xbar
