#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "xbar/pattern.hpp"

namespace xbar {

enum class DeviceModel { Linear, Nonlinear };

std::string_view to_string(DeviceModel m) noexcept;

/// Ohmic switching device.
struct LinearDeviceParams {
    double lrs_ohms = 1e6;
    double hrs_ohms = 1e9;

    void validate() const;
    friend bool operator==(const LinearDeviceParams&, const LinearDeviceParams&) = default;
};

/// Exponential device, I = k * sinh(a * V), with k switching between k_on and k_off.
struct NonlinearDeviceParams {
    double k_on = 1e-8;
    double k_off = 1e-11;
    double a = 3.0;

    void validate() const;
    friend bool operator==(const NonlinearDeviceParams&, const NonlinearDeviceParams&) = default;
};

using DeviceParams = std::variant<LinearDeviceParams, NonlinearDeviceParams>;

DeviceModel model_of(const DeviceParams& p) noexcept;
void validate(const DeviceParams& p);

/// Realized state of one cell after variation sampling.
///
/// `scale` is the resistance in ohms for linear cells and the current scale k
/// in amperes for nonlinear cells; `a` is only meaningful for nonlinear cells.
struct CellState {
    Bit bit = Bit::Hrs;
    DeviceModel model = DeviceModel::Linear;
    double scale = 1e9;
    double a = 0.0;

    friend bool operator==(const CellState&, const CellState&) = default;
};

CellState nominal_cell(Bit bit, const DeviceParams& p);

/// Current through the device at voltage v (wordline minus bitline). Odd in v.
inline double device_current(const CellState& c, double v);

/// dI/dV. Strictly positive.
inline double device_conductance(const CellState& c, double v);

struct VariationSpec {
    double relative_sigma = 0.10;
    std::uint64_t seed = 1;

    void validate() const;
    friend bool operator==(const VariationSpec&, const VariationSpec&) = default;
};

/// Multiplicative factor drawn from Normal(1, sigma) truncated to 1 +/- 3 sigma.
/// A pure function of (seed, row, col).
double variation_factor(const VariationSpec& var, std::size_t row, std::size_t col);

CellState sample_cell(Bit bit, const DeviceParams& base, const VariationSpec& var, std::size_t row,
                      std::size_t col);

/// Row-major M x N array of realized cells.
class CellArray {
public:
    CellArray() = default;
    CellArray(std::size_t rows, std::size_t cols, std::vector<CellState> cells);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const CellState& operator()(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
    CellState& operator()(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }
    const std::vector<CellState>& cells() const noexcept { return cells_; }

    DeviceModel model() const;
    DataPattern pattern() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<CellState> cells_;
};

CellArray sample_cells(const DataPattern& pattern, const DeviceParams& base, const VariationSpec& var);
CellArray nominal_cells(const DataPattern& pattern, const DeviceParams& base);

// ---------------------------------------------------------------------------

inline double device_current(const CellState& c, double v) {
    if (c.model == DeviceModel::Linear) return v / c.scale;
    return c.scale * std::sinh(c.a * v);
}

inline double device_conductance(const CellState& c, double v) {
    if (c.model == DeviceModel::Linear) return 1.0 / c.scale;
    return c.scale * c.a * std::cosh(c.a * v);
}

}  // namespace xbar
