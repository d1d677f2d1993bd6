#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "xbar/device.hpp"
#include "xbar/pattern.hpp"

namespace xbar {

/// Geometry and electrical environment of an M x N array.
///
/// `bank_width` of 0 means a single bank spanning all columns.
struct CrossbarSpec {
    std::size_t rows = 512;
    std::size_t cols = 512;
    double r_wire = 10.0;    // ohms per wire segment
    double r_driver = 0.0;   // series resistance of every drive/clamp switch
    double v_dd = 1.2;
    double v_b = 0.7;
    std::size_t bank_width = 0;

    void validate() const;
    std::size_t effective_bank_width() const noexcept { return bank_width == 0 ? cols : bank_width; }
    std::size_t bank_count() const noexcept { return cols / effective_bank_width(); }
    double read_voltage() const noexcept { return v_dd - v_b; }

    friend bool operator==(const CrossbarSpec&, const CrossbarSpec&) = default;
};

// Line boundary conditions.
struct Drive {
    double v;
};
struct Clamp {
    double v;
};
struct Floating {};
struct ResistiveLoad {
    double r_s;
    double to;
};

using WordlineSource = std::variant<Drive, Clamp, Floating>;
using BitlineTermination = std::variant<Clamp, ResistiveLoad, Floating>;

struct BiasConfig {
    std::vector<WordlineSource> wordlines;
    std::vector<BitlineTermination> bitlines;

    void validate(std::size_t rows, std::size_t cols) const;
};

/// Per-line additive voltage offsets; an empty vector means zero everywhere.
struct BiasOffsets {
    std::vector<double> wordline_dv;
    std::vector<double> bitline_dv;
};

/// Selected wordline driven at v_dd, every other line clamped at v_b (+ offset).
/// Indices are zero-based.
BiasConfig row_read_bias(const CrossbarSpec& spec, std::size_t selected_row, const BiasOffsets& offsets = {});

enum class UnselectedLines { Floating, Grounded };

/// Single-cell read: wordline i at v_dd, bitline j clamped at 0 V, all other
/// lines floating (or grounded).
BiasConfig conventional_cell_bias(const CrossbarSpec& spec, std::size_t i, std::size_t j,
                                  UnselectedLines others = UnselectedLines::Floating);

/// Row drive as in row_read_bias, but every bitline left open.
BiasConfig floating_bitline_bias(const CrossbarSpec& spec, std::size_t selected_row);

/// Row drive as in row_read_bias, every bitline loaded by r_s to v_b.
BiasConfig resistive_load_bias(const CrossbarSpec& spec, std::size_t selected_row, double r_s);

struct Bank {
    std::size_t first_col;
    std::size_t end_col;  // exclusive
};

std::vector<Bank> bank_partition(const CrossbarSpec& spec);

// ---------------------------------------------------------------------------
// Network

enum class BranchKind : std::uint8_t { Device, WireW, WireB, Terminal };
enum class LineKind : std::uint8_t { Wordline, Bitline };
enum class TerminalRole : std::uint8_t { Drive, Clamp, ResistiveLoad };

/// Two-terminal element between `from` and `to`. Positive current flows from
/// `from` to `to`. Devices run wordline node -> bitline node; `g` is the
/// conductance of resistive branches (and of linear devices).
struct Branch {
    BranchKind kind;
    std::uint32_t from;
    std::uint32_t to;
    double g;
    std::uint32_t row;  // device/wire coordinates, or line index for terminals
    std::uint32_t col;
};

/// Boundary attachment of one line. When the series resistance is zero the
/// rail node itself is held at `voltage` and no branch exists (`branch` = -1).
struct Terminal {
    LineKind line;
    std::uint32_t index;
    TerminalRole role;
    std::uint32_t rail_node;
    std::uint32_t fixed_node;
    double voltage;
    double series_r;
    std::int64_t branch;
};

/// Node-branch graph of a biased array.
///
/// Node layout with r_wire > 0: wordline node (i,j) = i*N + j, bitline node
/// (i,j) = M*N + i*N + j. With r_wire == 0 each line collapses to one node:
/// wordline i = i, bitline j = M + j. Boundary nodes of resistive terminals
/// follow, in terminal order (wordlines first).
class Network {
public:
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool collapsed_rails() const noexcept { return collapsed_; }
    std::size_t node_count() const noexcept { return fixed_.size(); }
    std::size_t rail_node_count() const noexcept { return rail_nodes_; }

    const std::vector<Branch>& branches() const noexcept { return branches_; }
    const std::vector<Terminal>& terminals() const noexcept { return terminals_; }
    const CellState& cell(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }
    const std::vector<CellState>& cells() const noexcept { return cells_; }
    DeviceModel model() const noexcept { return model_; }

    bool is_fixed(std::size_t node) const { return fixed_[node] != 0; }
    /// Voltage of a fixed node under the network's own bias.
    double fixed_voltage(std::size_t node) const { return fixed_voltage_[node]; }
    std::size_t fixed_count() const noexcept;

    std::uint32_t wordline_node(std::size_t i, std::size_t j) const noexcept {
        return static_cast<std::uint32_t>(collapsed_ ? i : i * cols_ + j);
    }
    std::uint32_t bitline_node(std::size_t i, std::size_t j) const noexcept {
        return static_cast<std::uint32_t>(collapsed_ ? rows_ + j : rows_ * cols_ + i * cols_ + j);
    }

    /// Voltage the unknown nodes start from in Newton iteration (the most
    /// common terminal voltage).
    double rest_voltage() const noexcept { return rest_voltage_; }

    std::size_t count(BranchKind k) const noexcept;

    /// Terminal voltages for another bias with the same floating/load layout.
    /// Throws std::invalid_argument if the layout differs.
    std::vector<double> terminal_voltages(const BiasConfig& bias) const;
    std::vector<double> terminal_voltages() const;

    /// Index of the terminal attached to bitline j, if any.
    std::optional<std::size_t> bitline_terminal(std::size_t j) const;

    /// A connected component without any fixed node, or nullopt if every
    /// component is anchored.
    std::optional<std::vector<std::uint32_t>> floating_component() const;

private:
    friend Network build_network(const CrossbarSpec&, const CellArray&, const BiasConfig&);

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    bool collapsed_ = false;
    std::size_t rail_nodes_ = 0;
    DeviceModel model_ = DeviceModel::Linear;
    std::vector<Branch> branches_;
    std::vector<Terminal> terminals_;
    std::vector<CellState> cells_;
    std::vector<std::uint8_t> fixed_;
    std::vector<double> fixed_voltage_;
    double rest_voltage_ = 0.0;
    std::vector<std::int64_t> bitline_terminal_;
};

/// Assemble the network. Drivers attach at the left end of wordlines and the
/// bottom end of bitlines. Throws SingularNetworkError when some part of the
/// network has no fixed-voltage anchor (e.g. every line floating).
Network build_network(const CrossbarSpec& spec, const CellArray& cells, const BiasConfig& bias);

}  // namespace xbar
