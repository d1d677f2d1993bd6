#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xbar/analytics.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/device.hpp"
#include "xbar/readout.hpp"
#include "xbar/report.hpp"
#include "xbar/sense.hpp"
#include "xbar/solver.hpp"

namespace xbar {

enum class ExperimentKind { CdfConventional, RowReadMap, PowerSweep, MismatchSweep, SchemeCompare };

std::string_view to_string(ExperimentKind k) noexcept;

struct ExperimentPlan {
    CrossbarSpec spec{};
    DeviceParams device = LinearDeviceParams{};
    VariationSpec variation{};  // the seed field is replaced per trial
    SenseParams sense{};
    SolverOptions solver{};
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    double pattern_p = 0.5;
    std::size_t threads = 0;  // 0 = hardware concurrency

    // cdf
    std::size_t samples = 4096;
    UnselectedLines unselected = UnselectedLines::Floating;
    // map / cdf
    std::size_t histogram_bins = 64;
    // power sweep / scheme compare
    std::vector<std::size_t> sizes{64, 128, 256, 512};
    std::vector<double> v_b_values{0.3, 0.5, 0.7, 0.9, 1.1};
    std::vector<DeviceModel> models{DeviceModel::Linear, DeviceModel::Nonlinear};
    std::size_t rows_per_trial = 2;
    std::size_t max_unknowns = 600000;
    // mismatch sweep
    std::vector<double> delta_v_values{0.5e-3, 1e-3, 1.5e-3, 2e-3, 2.5e-3, 3e-3, 3.5e-3, 4e-3, 4.5e-3, 5e-3};
    MismatchCheckOptions mismatch{};
    // scheme compare
    double r_s = 100e3;
    double baseline_v_b = 0.0;
    std::size_t conventional_cells = 256;

    void validate() const;
};

/// Independent generator for trial `index` of a campaign.
std::mt19937_64 seeded_trial_stream(std::uint64_t master_seed, std::uint64_t index);

/// Runs fn(0..n-1) on up to `threads` workers. Each call must only write to
/// its own output slot; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::string tag;
};

/// Log-spaced bins over [lo, hi] (linear if lo <= 0).
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins, std::string tag);

struct CdfPoint {
    double x;
    double p;
};
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

/// Output of one campaign: observation table plus statistics for the summary.
struct ExperimentOutput {
    std::string name;
    CsvTable table;
    nlohmann::ordered_json stats;
    bool pass = true;
};

/// Default device parameters for a model.
DeviceParams default_params(DeviceModel m);

/// Realized cells for trial `t`: Bernoulli(p) pattern from the trial stream,
/// variation keyed by the trial.
CellArray trial_cells(const ExperimentPlan& plan, const CrossbarSpec& spec, const DeviceParams& device,
                      std::uint64_t trial);

ExperimentOutput run_cdf_conventional(const ExperimentPlan& plan);
ExperimentOutput run_row_read_map(const ExperimentPlan& plan);
ExperimentOutput run_power_sweep(const ExperimentPlan& plan);
ExperimentOutput run_mismatch_sweep(const ExperimentPlan& plan);
ExperimentOutput run_scheme_compare(const ExperimentPlan& plan);
ExperimentOutput run_experiment(ExperimentKind kind, const ExperimentPlan& plan);

}  // namespace xbar
