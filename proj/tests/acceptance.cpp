// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. --full-scale runs the 512 x 512 variants.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xbar/analytics.hpp"
#include "xbar/experiments.hpp"
#include "xbar/readout.hpp"
#include "xbar/solver.hpp"

using namespace xbar;

namespace {

// Pinned tolerances and budgets.
constexpr double kSneakTolA = 1e-12;
constexpr double kSneakBudgetS = 5.0;
constexpr double kCdfBerDesk = 0.05;
constexpr double kCdfBerFull = 0.1;
constexpr std::size_t kCdfSamples = 2048;
constexpr double kCdfBudgetDeskS = 120.0;
constexpr double kCdfBudgetFullS = 1800.0;
constexpr double kFomRelTol = 0.01;
constexpr double kFomBudgetS = 1.0;
constexpr double kMismatchRelTol = 0.05;
constexpr double kMismatchBudgetS = 300.0;
constexpr std::size_t kPowerSeeds = 50;
constexpr double kPowerBudgetS = 600.0;
constexpr double kOracleTolV = 1e-10;
constexpr int kNewtonMaxIters = 15;
constexpr double kOracleBudgetS = 60.0;
constexpr double kKclTolA = 1e-12;
constexpr double kHullTolV = 1e-12;
constexpr double kTranslationTolA = 1e-12;
constexpr double kOddRelTol = 1e-15;
constexpr double kDerivRelTol = 1e-6;
constexpr double kInvariantBudgetS = 60.0;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

CellArray random_array(std::size_t rows, std::size_t cols, DeviceModel m, std::uint64_t seed) {
    auto rng = seeded_trial_stream(seed, 0xacce);
    return sample_cells(DataPattern::random(rows, cols, 0.5, rng), default_params(m), VariationSpec{0.10, seed});
}

CrossbarSpec square_spec(std::size_t n, double r_wire) {
    CrossbarSpec s;
    s.rows = s.cols = n;
    s.r_wire = r_wire;
    return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// 1. Row readout on ideal rails reads each cell in isolation.
Outcome sneak_path_elimination() {
    const auto t0 = std::chrono::steady_clock::now();
    const CrossbarSpec spec = square_spec(32, 0.0);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DeviceModel m = seed % 2 ? DeviceModel::Nonlinear : DeviceModel::Linear;
        const CellArray cells = random_array(32, 32, m, seed);
        const RowReader reader(spec, cells);
        for (std::size_t i = 0; i < 32; ++i) {
            const auto c = reader.column_currents(i);
            for (std::size_t j = 0; j < 32; ++j)
                worst = std::max(worst, std::abs(c[j] - device_current(cells(i, j), spec.read_voltage())));
        }
    }
    const double t = seconds_since(t0);
    return {worst <= kSneakTolA && t < kSneakBudgetS,
            "100 patterns 32x32, max |I - I_cell| = " + fmt("%.3g", worst) + " A (tol " + fmt("%g", kSneakTolA) +
                " A), " + fmt("%.2f", t) + " s (budget " + fmt("%g", kSneakBudgetS) + " s)"};
}

// 2. Conventional reads overlap.
Outcome conventional_overlap(bool full) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentPlan p;
    p.spec = square_spec(full ? 512 : 128, 10.0);
    p.samples = kCdfSamples;
    p.trials = 4;
    p.seed = 2;
    const ExperimentOutput out = run_cdf_conventional(p);
    const double t = seconds_since(t0);
    const double ber = out.stats["best_ber"].is_number() ? out.stats["best_ber"].get<double>() : 0.0;
    const std::size_t n = out.stats["lrs_samples"].get<std::size_t>() + out.stats["hrs_samples"].get<std::size_t>();
    const double need = full ? kCdfBerFull : kCdfBerDesk;
    const double budget = full ? kCdfBudgetFullS : kCdfBudgetDeskS;
    return {ber > need && n >= kCdfSamples && t < budget,
            std::to_string(p.spec.rows) + "x" + std::to_string(p.spec.cols) + ", " + std::to_string(n) +
                " cells, best BER = " + fmt("%.4f", ber) + " (need > " + fmt("%g", need) + "), " + fmt("%.1f", t) +
                " s (budget " + fmt("%g", budget) + " s)"};
}

// 3. Row readout separates the states; nonlinear devices separate them further.
Outcome row_read_separation(bool full) {
    ExperimentPlan p;
    p.spec = square_spec(full ? 512 : 128, 10.0);
    p.seed = 3;
    p.device = LinearDeviceParams{};
    const ExperimentOutput lin = run_row_read_map(p);
    p.device = NonlinearDeviceParams{};
    const ExperimentOutput nl = run_row_read_map(p);
    const auto el = lin.stats["errors"].get<std::size_t>(), en = nl.stats["errors"].get<std::size_t>();
    const double rl = lin.stats["separation_ratio"].get<double>(), rn = nl.stats["separation_ratio"].get<double>();
    return {el == 0 && en == 0 && rn > rl,
            std::to_string(p.spec.rows) + "x" + std::to_string(p.spec.cols) + ", errors linear " +
                std::to_string(el) + " / nonlinear " + std::to_string(en) + ", separation ratio nonlinear " +
                fmt("%.1f", rn) + (rn > rl ? " > " : " <= ") + "linear " + fmt("%.1f", rl) +
                ", linear histograms disjoint " + (rl > 1.0 ? "yes" : "no") + " (max HRS " +
                fmt("%.3g", lin.stats["max_hrs_A"].get<double>()) + " A vs threshold " +
                fmt("%.3g", lin.stats["threshold_A"].get<double>()) + " A)"};
}

// 4. Figure-of-merit table.
Outcome fom_table() {
    const auto t0 = std::chrono::steady_clock::now();
    const double published[] = {0.04, 0.265, 0.4194, 5.754, 633.0};
    const auto rows = table1_report(1, 512);
    bool ok = rows.size() == 5;
    std::string detail;
    for (std::size_t k = 0; k < rows.size() && k < 5; ++k) {
        const double err = std::abs(rows[k].computed_fom - published[k]) / published[k];
        ok = ok && err <= kFomRelTol;
        detail += (k ? ", " : "") + fmt("%.4g", rows[k].computed_fom);
    }
    const double t = seconds_since(t0);
    ok = ok && t < kFomBudgetS;
    return {ok, "FOM {" + detail + "} vs {0.04, 0.265, 0.4194, 5.754, 633} within " + fmt("%g", kFomRelTol * 100) +
                    "%, " + fmt("%.3f", t) + " s"};
}

// 5. Bias-mismatch width limits.
Outcome mismatch_limits() {
    const auto t0 = std::chrono::steady_clock::now();
    const CrossbarSpec spec = square_spec(1, 0.0);
    MismatchParams lin;
    MismatchParams nl;
    nl.device = NonlinearDeviceParams{};
    const std::size_t wl = max_column_width(lin), wn = max_column_width(nl);
    const MismatchCheckResult sl = mismatch_simulation_check(spec, lin);
    const MismatchCheckResult sn = mismatch_simulation_check(spec, nl);
    const double t = seconds_since(t0);
    const bool sim_ok = sl.empirical && sn.empirical && sl.relative_error() <= kMismatchRelTol &&
                        sn.relative_error() <= kMismatchRelTol;
    auto emp = [](const MismatchCheckResult& r) { return r.empirical ? std::to_string(*r.empirical) : "none"; };
    return {wl == 195 && wn == 6500 && sim_ok && t < kMismatchBudgetS,
            "analytic " + std::to_string(wl) + " / " + std::to_string(wn) + " (need 195 / 6500), simulated " +
                emp(sl) + " / " + emp(sn) + " (within " + fmt("%g", kMismatchRelTol * 100) + "%), " +
                fmt("%.1f", t) + " s"};
}

// 6. Exact power stays below the wire-free estimate and falls as v_b rises.
Outcome power_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentPlan p;
    p.spec = square_spec(64, 10.0);
    p.models = {DeviceModel::Linear};
    p.sizes = {64, 128, 256};
    p.trials = kPowerSeeds;
    p.rows_per_trial = 2;
    p.seed = 6;
    const ExperimentOutput lin = run_power_sweep(p);
    p.models = {DeviceModel::Nonlinear};
    p.trials = 3;
    const ExperimentOutput nl = run_power_sweep(p);
    const double t = seconds_since(t0);
    const bool below = lin.stats["linear_exact_below_approx"].get<bool>();
    const bool mono = lin.stats["power_decreases_with_v_b"].get<bool>() && nl.stats["power_decreases_with_v_b"].get<bool>();
    return {below && mono && t < kPowerBudgetS,
            std::to_string(kPowerSeeds) + " seeds x {64,128,256} linear: exact < approx " + (below ? "yes" : "NO") +
                "; decreasing in v_b (linear and nonlinear) " + (mono ? "yes" : "NO") + ", " + fmt("%.1f", t) +
                " s (budget " + fmt("%g", kPowerBudgetS) + " s)"};
}

// 7. Sparse solver against the dense reference.
Outcome oracle_equivalence(bool full) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int max_iters = 0;
    std::size_t cases = 0;
    for (DeviceModel m : {DeviceModel::Linear, DeviceModel::Nonlinear}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto rng = seeded_trial_stream(seed, 7);
            const std::size_t rows = 1 + rng() % 8, cols = 1 + rng() % 8;
            const CrossbarSpec spec = square_spec(1, seed % 4 == 0 ? 0.0 : 10.0);
            CrossbarSpec s = spec;
            s.rows = rows;
            s.cols = cols;
            const CellArray cells = random_array(rows, cols, m, seed);
            // Row reads, plus grounded conventional reads (every line anchored).
            const BiasConfig biases[] = {row_read_bias(s, rng() % rows),
                                         conventional_cell_bias(s, rng() % rows, rng() % cols, UnselectedLines::Grounded)};
            for (const BiasConfig& b : biases) {
                const Network net = build_network(s, cells, b);
                const Solution a = solve(net), d = dense_reference_solve(net);
                worst = std::max(worst, max_abs_diff(a.node_voltages, d.node_voltages));
                max_iters = std::max(max_iters, a.iterations);
                ++cases;
            }
        }
    }
    // Newton at the published parameters on a full-size row read.
    const std::size_t n = full ? 512 : 128;
    const CrossbarSpec big = square_spec(n, 10.0);
    const CellArray cells = random_array(n, n, DeviceModel::Nonlinear, 99);
    const Network net = build_network(big, cells, row_read_bias(big, n / 2));
    const int big_iters = solve(net).iterations;
    max_iters = std::max(max_iters, big_iters);
    const double t = seconds_since(t0);
    return {worst <= kOracleTolV && max_iters <= kNewtonMaxIters && t < kOracleBudgetS,
            std::to_string(cases) + " networks <= 8x8, max |dv| = " + fmt("%.3g", worst) + " V (tol " +
                fmt("%g", kOracleTolV) + " V); Newton iterations max " + std::to_string(max_iters) + " incl. " +
                std::to_string(n) + "x" + std::to_string(n) + " (limit " + std::to_string(kNewtonMaxIters) + "), " +
                fmt("%.1f", t) + " s"};
}

// 8. Physics invariants.
Outcome invariants() {
    const auto t0 = std::chrono::steady_clock::now();
    double kcl = 0.0, hull = 0.0, shift = 0.0, odd = 0.0, deriv = 0.0;
    for (DeviceModel m : {DeviceModel::Linear, DeviceModel::Nonlinear}) {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const std::size_t rows = 2 + seed % 15, cols = 2 + (seed * 7) % 13;
            CrossbarSpec s = square_spec(1, seed % 3 == 0 ? 100.0 : 10.0);
            s.rows = rows;
            s.cols = cols;
            const CellArray cells = random_array(rows, cols, m, seed);
            const Network net = build_network(s, cells, row_read_bias(s, seed % rows));
            const Solution a = solve(net);
            kcl = std::max(kcl, a.kcl_residual);
            for (double v : a.node_voltages)
                hull = std::max(hull, std::max(s.v_b - v, v - s.v_dd));
            CrossbarSpec up = s;
            up.v_dd += 0.3;
            up.v_b += 0.3;
            const Network net2 = build_network(up, cells, row_read_bias(up, seed % rows));
            shift = std::max(shift, max_abs_diff(a.branch_currents, solve(net2).branch_currents));
        }
        for (Bit b : {Bit::Lrs, Bit::Hrs}) {
            const CellState c = nominal_cell(b, default_params(m));
            for (int k = -150; k <= 150; ++k) {
                const double v = 0.01 * k;
                const double i = device_current(c, v);
                if (i != 0.0) odd = std::max(odd, std::abs(device_current(c, -v) + i) / std::abs(i));
                const double h = 1e-7;
                const double fd = (device_current(c, v + h) - device_current(c, v - h)) / (2 * h);
                const double g = device_conductance(c, v);
                deriv = std::max(deriv, std::abs(fd - g) / g);
            }
        }
    }
    const double t = seconds_since(t0);
    const bool ok = kcl <= kKclTolA && hull <= kHullTolV && shift <= kTranslationTolA && odd <= kOddRelTol &&
                    deriv <= kDerivRelTol && t < kInvariantBudgetS;
    return {ok, "KCL " + fmt("%.2g", kcl) + " A, hull excursion " + fmt("%.2g", hull) + " V, translation " +
                    fmt("%.2g", shift) + " A, odd symmetry " + fmt("%.2g", odd) + ", derivative " + fmt("%.2g", deriv) +
                    " (tols 1e-12 A, 1e-12 V, 1e-12 A, 1e-15, 1e-6), " + fmt("%.2f", t) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crossbar readout acceptance gate"};
    bool full = false;
    app.add_flag("--full-scale", full, "run the 512 x 512 variants of criteria 2, 3 and 7");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"sneak-path elimination", sneak_path_elimination},
        {"conventional read overlap", [&] { return conventional_overlap(full); }},
        {"row-read separation", [&] { return row_read_separation(full); }},
        {"figure-of-merit table", fom_table},
        {"mismatch width limits", mismatch_limits},
        {"power consistency", power_consistency},
        {"solver oracle equivalence", [&] { return oracle_equivalence(full); }},
        {"physics invariants", invariants},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed%s\n", criteria.size() - failed, criteria.size(),
                full ? " (full scale)" : "");
    return failed ? 1 : 0;
}
