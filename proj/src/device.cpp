#include "xbar/device.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "xbar/rng.hpp"

namespace xbar {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string_view to_string(DeviceModel m) noexcept {
    return m == DeviceModel::Linear ? "linear" : "nonlinear";
}

// hrs == lrs is accepted so degenerate (indistinguishable) populations can be studied.
void LinearDeviceParams::validate() const {
    require(finite_positive(lrs_ohms), "device.lrs: must be finite and > 0");
    require(finite_positive(hrs_ohms), "device.hrs: must be finite and > 0");
    require(hrs_ohms >= lrs_ohms, "device.hrs: must be >= device.lrs");
}

void NonlinearDeviceParams::validate() const {
    require(finite_positive(k_on), "device.k_on: must be finite and > 0");
    require(finite_positive(k_off), "device.k_off: must be finite and > 0");
    require(k_on >= k_off, "device.k_on: must be >= device.k_off");
    require(finite_positive(a), "device.a: must be finite and > 0");
}

DeviceModel model_of(const DeviceParams& p) noexcept {
    return std::holds_alternative<LinearDeviceParams>(p) ? DeviceModel::Linear : DeviceModel::Nonlinear;
}

void validate(const DeviceParams& p) {
    std::visit([](const auto& x) { x.validate(); }, p);
}

CellState nominal_cell(Bit bit, const DeviceParams& p) {
    CellState c;
    c.bit = bit;
    if (const auto* lin = std::get_if<LinearDeviceParams>(&p)) {
        c.model = DeviceModel::Linear;
        c.scale = bit == Bit::Lrs ? lin->lrs_ohms : lin->hrs_ohms;
    } else {
        const auto& nl = std::get<NonlinearDeviceParams>(p);
        c.model = DeviceModel::Nonlinear;
        c.scale = bit == Bit::Lrs ? nl.k_on : nl.k_off;
        c.a = nl.a;
    }
    return c;
}

void VariationSpec::validate() const {
    if (!(relative_sigma >= 0.0 && relative_sigma < 1.0 / 3.0))
        throw std::invalid_argument("variation.relative_sigma: must be in [0, 1/3)");
}

double variation_factor(const VariationSpec& var, std::size_t row, std::size_t col) {
    if (var.relative_sigma == 0.0) return 1.0;
    SplitMix64 gen(hash_key(var.seed, row, col));
    std::normal_distribution<double> normal(0.0, 1.0);
    double z = normal(gen);
    while (std::abs(z) > 3.0) z = normal(gen);
    return 1.0 + var.relative_sigma * z;
}

CellState sample_cell(Bit bit, const DeviceParams& base, const VariationSpec& var, std::size_t row,
                      std::size_t col) {
    CellState c = nominal_cell(bit, base);
    c.scale *= variation_factor(var, row, col);
    return c;
}

CellArray::CellArray(std::size_t rows, std::size_t cols, std::vector<CellState> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)) {
    if (cells_.size() != rows_ * cols_) throw std::invalid_argument("CellArray: size mismatch");
}

DeviceModel CellArray::model() const {
    if (cells_.empty()) return DeviceModel::Linear;
    const DeviceModel m = cells_.front().model;
    for (const auto& c : cells_)
        if (c.model != m) throw std::logic_error("CellArray: mixed device models");
    return m;
}

DataPattern CellArray::pattern() const {
    DataPattern p(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) p(i, j) = (*this)(i, j).bit;
    return p;
}

CellArray sample_cells(const DataPattern& pattern, const DeviceParams& base, const VariationSpec& var) {
    validate(base);
    var.validate();
    std::vector<CellState> cells;
    cells.reserve(pattern.rows() * pattern.cols());
    for (std::size_t i = 0; i < pattern.rows(); ++i)
        for (std::size_t j = 0; j < pattern.cols(); ++j)
            cells.push_back(sample_cell(pattern(i, j), base, var, i, j));
    return CellArray(pattern.rows(), pattern.cols(), std::move(cells));
}

CellArray nominal_cells(const DataPattern& pattern, const DeviceParams& base) {
    return sample_cells(pattern, base, VariationSpec{0.0, 0});
}

}  // namespace xbar
