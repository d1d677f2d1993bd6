#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/solver.hpp"

namespace xbar {

enum class SchemeKind { RowReadout, Conventional, FloatingBitlines, ResistiveLoad };
enum class SignalUnit { Ampere, Volt };

std::string_view to_string(SchemeKind s) noexcept;

/// Result of reading one row. Signals are currents for current-sensed
/// schemes and voltages (relative to v_b) for the floating and resistive-load
/// baselines; a signal above `threshold` reads as LRS.
struct ReadResult {
    std::size_t row = 0;
    SignalUnit unit = SignalUnit::Ampere;
    std::vector<double> sensed;
    std::vector<Bit> true_bits;
    std::vector<Bit> classified_bits;
    double threshold = 0.0;
    std::size_t error_count = 0;
    std::vector<std::size_t> error_columns;
};

ReadResult classify_row(std::size_t row, SignalUnit unit, std::vector<double> sensed, std::vector<Bit> true_bits,
                        double threshold);

/// One-step row readout over a fixed cell array.
///
/// Every row read shares the same fixed-node set, so the nodal system is
/// factored once on construction and each read is a back-substitution (linear
/// devices) or a preconditioned Newton solve (nonlinear devices).
class RowReader {
public:
    RowReader(const CrossbarSpec& spec, const CellArray& cells, SolverOptions opts = {});
    ~RowReader();
    RowReader(RowReader&&) noexcept;

    const CrossbarSpec& spec() const noexcept { return spec_; }
    const Network& network() const noexcept { return *net_; }

    /// Per-column sensed currents for `row`, one solve per bank. Bitline
    /// offsets apply to the sense circuits of the bank being read; bitlines of
    /// the other banks sit at plain v_b.
    std::vector<double> column_currents(std::size_t row, const BiasOffsets& offsets = {}) const;

    /// Full solution for a row read with every bank's bitlines at v_b + offset.
    Solution solve_row(std::size_t row, const BiasOffsets& offsets = {}) const;

    ReadResult read(std::size_t row, double threshold, const BiasOffsets& offsets = {}) const;

private:
    CrossbarSpec spec_;
    std::unique_ptr<Network> net_;
    std::unique_ptr<NetworkSolver> solver_;
};

ReadResult read_row(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double threshold,
                    const BiasOffsets& offsets = {}, const SolverOptions& opts = {});

/// Conventional single-cell read (selected wordline at v_dd, selected bitline
/// at 0 V). Returns the current absorbed by the selected bitline clamp.
double read_cell_conventional(const CrossbarSpec& spec, const CellArray& cells, std::size_t i, std::size_t j,
                              UnselectedLines others = UnselectedLines::Floating, const SolverOptions& opts = {});

/// Batch conventional reader for one cell array.
///
/// With floating unselected lines and linear devices the sensed current is
/// v_dd / (R_eff(p, q) + 2 r_driver), where R_eff is the effective resistance
/// between the two driven line ends; one Laplacian factorization serves every
/// query. Grounded unselected lines share one fixed-node set and reuse one
/// factorization as well. Nonlinear floating reads fall back to a full solve.
class ConventionalReader {
public:
    ConventionalReader(const CrossbarSpec& spec, const CellArray& cells,
                       UnselectedLines others = UnselectedLines::Floating, SolverOptions opts = {});
    ~ConventionalReader();
    ConventionalReader(ConventionalReader&&) noexcept;

    double read(std::size_t i, std::size_t j) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Bitlines left open; sensed value is the bottom-end bitline voltage minus v_b.
ReadResult read_row_floating(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double threshold,
                             const SolverOptions& opts = {});

/// Bitlines loaded by r_s to v_b; sensed value is the voltage across r_s.
ReadResult read_row_resistive(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double r_s,
                              double threshold, const SolverOptions& opts = {});

/// Geometric mean of the ideal LRS and HRS read currents at v_dd - v_b.
double midpoint_threshold(const CrossbarSpec& spec, const DeviceParams& params);

struct ThresholdBer {
    double threshold;
    double ber;  // mean of the per-state error rates
};

/// Exhaustive scan over midpoints of the sorted pooled samples (plus the two
/// open ends) for the threshold minimizing the balanced error rate.
ThresholdBer best_threshold_ber(std::span<const double> lrs, std::span<const double> hrs);

/// Balanced error rate of a fixed threshold.
double balanced_error_rate(std::span<const double> lrs, std::span<const double> hrs, double threshold);

}  // namespace xbar
