#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/device.hpp"
#include "xbar/solver.hpp"

namespace xbar {

// ---------------------------------------------------------------------------
// Reading power

/// Wire-free power of reading `row`: sum over columns of v * I(cell, v) with
/// v = v_dd - v_b.
double power_row_approx(const CrossbarSpec& spec, const CellArray& cells, std::size_t row);

struct PowerBounds {
    double min_w;
    double max_w;
};

/// M * N * R * (v_dd - v_b)^2 / HRS and / LRS (R = bank count). Nonlinear
/// devices use v * k * sinh(a v) in place of v^2 / R_state.
PowerBounds power_bounds(const CrossbarSpec& spec, const DeviceParams& params);

/// Same expressions with the bank count factor dropped (one read cycle of the
/// whole array).
PowerBounds power_bounds_per_cycle(const CrossbarSpec& spec, const DeviceParams& params);

struct ExactPower {
    double branch_sum_w;  // sum over branches of V * I
    double source_sum_w;  // sum over terminals of V_fixed * I_injected
    double residual_w;    // sum over free nodes of |v - v_ref| * |KCL residual|
    double relative_gap() const;
};

ExactPower power_exact(const Network& net, const Solution& sol);

// ---------------------------------------------------------------------------
// Figure of merit

/// 640 Gbit/cm^2 expressed as bits per um^2.
inline constexpr double kDensityBitsPerUm2 = 640e9 / 1e8;
inline constexpr double kDefaultCellAreaUm2 = 1.0 / kDensityBitsPerUm2;

struct FomInputs {
    double throughput;       // bits per cycle
    double array_usage;      // (0, 1]
    double reading_power_w;
    double cell_count;
    double cell_area_um2 = kDefaultCellAreaUm2;

    void validate() const;
};

/// Throughput * usage / ((power / cells) * area), in Tbit / (W um^2).
double fom(const FomInputs& in);

struct Table1Row {
    std::string technique;
    FomInputs inputs;
    double published_fom;
    double computed_fom;
    double relative_error;
    bool match;  // within 1 %
};

/// Recomputes the comparison table for an N x N array read with `banks`
/// banks in the proposed scheme.
std::vector<Table1Row> table1_report(std::size_t banks = 1, std::size_t n = 512);

// ---------------------------------------------------------------------------
// Bias mismatch

struct MismatchParams {
    double delta_v = 2e-3;
    double i_max = 0.22e-6;
    double i_min = 0.195e-6;
    DeviceParams device = LinearDeviceParams{};

    void validate() const;
};

struct UnwantedCurrent {
    double exact;
    double approx;
};

/// Unwanted column current from N - 1 unselected cells (half LRS) seeing delta_v.
UnwantedCurrent mismatch_unwanted_current(std::size_t n, const MismatchParams& p);

/// Largest column width whose approximate unwanted current stays within both
/// window edges.
std::size_t max_column_width(const MismatchParams& p);

struct MismatchCheckOptions {
    std::size_t step = 0;       // sweep granularity; 0 picks 2 (linear) or 100 (nonlinear)
    std::size_t sweep_cap = 0;  // 0 picks 4x the analytic width (at least 64)
    double r_wire = 0.0;
    SolverOptions solver{};
};

struct MismatchCheckResult {
    std::size_t analytic;
    std::optional<std::size_t> empirical;  // empty if no limit found up to the cap
    std::size_t sweep_cap;
    std::size_t step;
    double relative_error() const;
};

/// Network-level check of the width limit. Simulates one column of N cells:
/// the selected row is driven at v_dd, the N - 1 unselected wordlines sit at
/// v_b + delta_v with floor(N/2) of them LRS, and the bitline is clamped at
/// v_b. The unwanted current is the column current minus the same read with
/// delta_v = 0; N passes while it stays at or below min(i_max, i_min).
MismatchCheckResult mismatch_simulation_check(const CrossbarSpec& spec, const MismatchParams& p,
                                              const MismatchCheckOptions& opts = {});

/// Unwanted current measured by the network check for one width.
double simulated_unwanted_current(const CrossbarSpec& spec, const MismatchParams& p, std::size_t n,
                                  double r_wire = 0.0, const SolverOptions& opts = {});

}  // namespace xbar
