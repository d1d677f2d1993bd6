#include <catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "xbar/experiments.hpp"

using namespace xbar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string csv_text(const CsvTable& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

ExperimentPlan small_plan(std::size_t n) {
    ExperimentPlan p;
    p.spec.rows = p.spec.cols = n;
    p.trials = 3;
    p.samples = 120;
    p.sizes = {4, 8};
    p.v_b_values = {0.5, 0.7, 0.9};
    p.delta_v_values = {2e-3, 4e-3};
    p.conventional_cells = 24;
    return p;
}

std::size_t column(const CsvTable& t, const std::string& name) {
    for (std::size_t k = 0; k < t.header.size(); ++k)
        if (t.header[k] == name) return k;
    FAIL("missing column " << name);
    return 0;
}

}  // namespace

TEST_CASE("campaign output does not depend on the thread count") {
    for (ExperimentKind k : {ExperimentKind::CdfConventional, ExperimentKind::RowReadMap, ExperimentKind::PowerSweep,
                             ExperimentKind::SchemeCompare}) {
        ExperimentPlan p = small_plan(8);
        p.threads = 1;
        const ExperimentOutput serial = run_experiment(k, p);
        p.threads = 4;
        const ExperimentOutput parallel = run_experiment(k, p);
        CHECK(csv_text(serial.table) == csv_text(parallel.table));
        CHECK(serial.stats.dump() == parallel.stats.dump());
        // A second serial run is identical too.
        p.threads = 1;
        CHECK(csv_text(run_experiment(k, p).table) == csv_text(serial.table));
    }
}

TEST_CASE("trial streams") {
    auto a = seeded_trial_stream(9, 3), b = seeded_trial_stream(9, 3);
    for (int k = 0; k < 100; ++k) CHECK(a() == b());

    // Chi-square test on the joint distribution of the top 4 bits of paired draws
    // from neighbouring streams: 256 cells, 255 degrees of freedom.
    for (std::uint64_t idx = 0; idx < 5; ++idx) {
        auto s = seeded_trial_stream(1, idx), t = seeded_trial_stream(1, idx + 1);
        std::vector<double> counts(256, 0.0);
        const int draws = 256 * 200;
        for (int k = 0; k < draws; ++k) counts[(s() >> 60) * 16 + (t() >> 60)] += 1.0;
        double chi2 = 0.0;
        const double expect = draws / 256.0;
        for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
        // 255 dof: mean 255, sd ~22.6; 0.999 quantile ~ 330.
        CHECK(chi2 < 330.0);
    }
}

TEST_CASE("parallel_for propagates the first exception") {
    std::vector<int> hit(50, 0);
    CHECK_THROWS_AS(parallel_for(50, 4,
                                 [&](std::size_t k) {
                                     if (k == 17) throw std::runtime_error("boom");
                                     hit[k] = 1;
                                 }),
                    std::runtime_error);
    parallel_for(50, 3, [&](std::size_t k) { hit[k] = 2; });
    CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 2; }));
}

TEST_CASE("histograms and CDFs") {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> d(-15.0, 2.0);
    std::vector<double> v(5000);
    for (double& x : v) x = d(rng);
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    const Histogram h = make_histogram(v, lo, hi, 40, "x");
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == v.size());
    for (std::size_t k = 1; k < h.edges.size(); ++k) CHECK(h.edges[k] > h.edges[k - 1]);

    const auto cdf = empirical_cdf(v);
    CHECK(cdf.back().p == 1.0);
    CHECK(cdf.front().p > 0.0);
    for (std::size_t k = 1; k < cdf.size(); ++k) {
        CHECK(cdf[k].p >= cdf[k - 1].p);
        CHECK(cdf[k].x >= cdf[k - 1].x);
    }
    const Histogram flat = make_histogram({2.0, 2.0}, 2.0, 2.0, 4, "flat");
    CHECK(std::accumulate(flat.counts.begin(), flat.counts.end(), std::size_t{0}) == 2);
}

TEST_CASE("conventional CDF of a 2x2 array matches series-parallel analysis") {
    ExperimentPlan p = small_plan(2);
    p.spec.r_wire = 0.0;
    p.variation.relative_sigma = 0.0;
    p.trials = 4;
    p.samples = 40;
    const ExperimentOutput out = run_cdf_conventional(p);
    const auto ci = column(out.table, "current_A"), ti = column(out.table, "trial"), ri = column(out.table, "row"),
               ji = column(out.table, "col"), pi = column(out.table, "cdf"), si = column(out.table, "state");
    REQUIRE_FALSE(out.table.rows.empty());
    double last_l = 0.0, last_h = 0.0;
    for (const auto& row : out.table.rows) {
        const std::size_t t = std::stoul(row[ti]), i = std::stoul(row[ri]), j = std::stoul(row[ji]);
        const CellArray cells = trial_cells(p, p.spec, p.device, t);
        const double r = [&](std::size_t a, std::size_t b) { return cells(a, b).scale; }(i, j);
        const double sneak = cells(i, 1 - j).scale + cells(1 - i, 1 - j).scale + cells(1 - i, j).scale;
        CHECK_THAT(std::stod(row[ci]), WithinRel(1.2 / r + 1.2 / sneak, 1e-9));
        double& last = row[si] == "LRS" ? last_l : last_h;
        CHECK(std::stod(row[pi]) >= last);
        last = std::stod(row[pi]);
    }
    CHECK(last_l == 1.0);
    CHECK(last_h == 1.0);
}

TEST_CASE("degenerate devices give a coin-flip error rate") {
    ExperimentPlan p = small_plan(6);
    p.spec.r_wire = 0.0;
    p.variation.relative_sigma = 0.0;
    p.device = LinearDeviceParams{1e6, 1e6};
    const ExperimentOutput out = run_cdf_conventional(p);
    CHECK(out.stats["best_ber"].get<double>() == 0.5);
}

TEST_CASE("row-read map on ideal rails equals per-cell currents") {
    ExperimentPlan p = small_plan(6);
    p.spec.r_wire = 0.0;
    p.trials = 2;
    const ExperimentOutput out = run_row_read_map(p);
    CHECK(out.pass);
    CHECK(out.stats["errors"].get<std::size_t>() == 0);
    REQUIRE(out.table.rows.size() == 2 * 36);
    const auto ci = column(out.table, "current_A");
    for (const auto& row : out.table.rows) {
        const CellArray cells = trial_cells(p, p.spec, p.device, std::stoul(row[0]));
        const double ideal = device_current(cells(std::stoul(row[1]), std::stoul(row[2])), 0.5);
        CHECK_THAT(std::stod(row[ci]), WithinRel(ideal, 1e-11));
    }
    std::size_t total = 0;
    for (const auto& h : out.stats["histograms"])
        for (const auto& c : h["counts"]) total += c.get<std::size_t>();
    CHECK(total == 72);
}

TEST_CASE("nonlinear devices widen the row-read separation") {
    // Both ideal ratios are 1e3; wire IR drop erodes the linear margin only once
    // the array is large, so smaller arrays can go either way.
    ExperimentPlan p = small_plan(128);
    p.trials = 1;
    const double lin = run_row_read_map(p).stats["separation_ratio"].get<double>();
    p.device = NonlinearDeviceParams{};
    const ExperimentOutput nl = run_row_read_map(p);
    CHECK(nl.pass);
    CHECK(nl.stats["separation_ratio"].get<double>() > lin);
}

TEST_CASE("power sweep on a single cell matches the closed form") {
    ExperimentPlan p = small_plan(1);
    p.sizes = {1};
    p.variation.relative_sigma = 0.0;
    p.models = {DeviceModel::Linear};
    const ExperimentOutput out = run_power_sweep(p);
    const auto ai = column(out.table, "approx_row_W"), ei = column(out.table, "exact_row_W"),
               vi = column(out.table, "v_b_V");
    REQUIRE_FALSE(out.table.rows.empty());
    for (const auto& row : out.table.rows) {
        const double v = 1.2 - std::stod(row[vi]);
        const double exact = std::stod(row[ei]);
        const bool lrs = std::abs(exact - v * v / 1e6) <= 1e-9 * v * v / 1e6;
        const bool hrs = std::abs(exact - v * v / 1e9) <= 1e-9 * v * v / 1e9;
        CHECK((lrs || hrs));
        CHECK_THAT(std::stod(row[ai]), WithinRel(exact, 1e-9));
    }
    CHECK(out.stats["power_decreases_with_v_b"].get<bool>());
}

TEST_CASE("power sweep trends") {
    ExperimentPlan p = small_plan(8);
    p.sizes = {8, 16};
    const ExperimentOutput out = run_power_sweep(p);
    CHECK(out.pass);
    CHECK(out.stats["linear_exact_below_approx"].get<bool>());
    CHECK(out.stats["power_decreases_with_v_b"].get<bool>());
}

TEST_CASE("mismatch sweep pairs analytic and simulated widths") {
    ExperimentPlan p = small_plan(1);
    p.models = {DeviceModel::Linear};
    const ExperimentOutput out = run_mismatch_sweep(p);
    REQUIRE(out.table.rows.size() == 2);
    const auto ai = column(out.table, "analytic_n");
    CHECK(out.table.rows[0][ai] == "195");
    CHECK(out.table.rows[1][ai] == "97");
    CHECK(out.pass);
}

TEST_CASE("scheme comparison at small sizes") {
    ExperimentPlan p = small_plan(8);
    p.sizes = {8, 16};
    p.trials = 1;
    const ExperimentOutput out = run_scheme_compare(p);
    const auto& first = out.stats["first_failing_size"];
    CHECK(first["row_readout"].is_null());
}

TEST_CASE("plan validation") {
    ExperimentPlan p;
    CHECK_NOTHROW(p.validate());
    p.trials = 0;
    CHECK_THROWS(p.validate());
    p = {};
    p.v_b_values = {1.2};
    CHECK_THROWS(p.validate());
    p = {};
    p.r_s = 0.0;
    CHECK_THROWS(p.validate());
}
