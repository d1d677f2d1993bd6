#include "xbar/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "xbar/error.hpp"

namespace xbar {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

double offset_at(const std::vector<double>& dv, std::size_t k) { return dv.empty() ? 0.0 : dv.at(k); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void CrossbarSpec::validate() const {
    require(rows >= 1, "crossbar.rows: must be >= 1");
    require(cols >= 1, "crossbar.cols: must be >= 1");
    require(std::isfinite(r_wire) && r_wire >= 0.0, "crossbar.r_wire: must be >= 0");
    require(std::isfinite(r_driver) && r_driver >= 0.0, "crossbar.r_driver: must be >= 0");
    require(std::isfinite(v_dd) && std::isfinite(v_b), "crossbar.v_dd/v_b: must be finite");
    require(v_b >= 0.0, "crossbar.v_b: must be >= 0");
    require(v_dd > v_b, "crossbar.v_b: must be < v_dd");
    const std::size_t n = effective_bank_width();
    require(n >= 1 && n <= cols && cols % n == 0, "crossbar.bank_width: must divide cols");
}

void BiasConfig::validate(std::size_t rows, std::size_t cols) const {
    require(wordlines.size() == rows, "bias: wordline count does not match rows");
    require(bitlines.size() == cols, "bias: bitline count does not match cols");
    for (const auto& b : bitlines)
        if (const auto* rl = std::get_if<ResistiveLoad>(&b))
            require(std::isfinite(rl->r_s) && rl->r_s > 0.0, "bias: resistive load r_s must be > 0");
}

BiasConfig row_read_bias(const CrossbarSpec& spec, std::size_t selected_row, const BiasOffsets& offsets) {
    spec.validate();
    if (selected_row >= spec.rows) throw std::out_of_range("row_read_bias: selected row out of range");
    require(offsets.wordline_dv.empty() || offsets.wordline_dv.size() == spec.rows,
            "row_read_bias: wordline offsets must have one entry per row");
    require(offsets.bitline_dv.empty() || offsets.bitline_dv.size() == spec.cols,
            "row_read_bias: bitline offsets must have one entry per column");
    BiasConfig b;
    b.wordlines.reserve(spec.rows);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        if (i == selected_row)
            b.wordlines.emplace_back(Drive{spec.v_dd});
        else
            b.wordlines.emplace_back(Clamp{spec.v_b + offset_at(offsets.wordline_dv, i)});
    }
    b.bitlines.reserve(spec.cols);
    for (std::size_t j = 0; j < spec.cols; ++j)
        b.bitlines.emplace_back(Clamp{spec.v_b + offset_at(offsets.bitline_dv, j)});
    return b;
}

BiasConfig conventional_cell_bias(const CrossbarSpec& spec, std::size_t i, std::size_t j, UnselectedLines others) {
    spec.validate();
    if (i >= spec.rows || j >= spec.cols) throw std::out_of_range("conventional_cell_bias: cell out of range");
    BiasConfig b;
    for (std::size_t r = 0; r < spec.rows; ++r) {
        if (r == i)
            b.wordlines.emplace_back(Drive{spec.v_dd});
        else if (others == UnselectedLines::Grounded)
            b.wordlines.emplace_back(Clamp{0.0});
        else
            b.wordlines.emplace_back(Floating{});
    }
    for (std::size_t c = 0; c < spec.cols; ++c) {
        if (c == j || others == UnselectedLines::Grounded)
            b.bitlines.emplace_back(Clamp{0.0});
        else
            b.bitlines.emplace_back(Floating{});
    }
    return b;
}

BiasConfig floating_bitline_bias(const CrossbarSpec& spec, std::size_t selected_row) {
    BiasConfig b = row_read_bias(spec, selected_row);
    std::fill(b.bitlines.begin(), b.bitlines.end(), BitlineTermination{Floating{}});
    return b;
}

BiasConfig resistive_load_bias(const CrossbarSpec& spec, std::size_t selected_row, double r_s) {
    require(std::isfinite(r_s) && r_s > 0.0, "resistive_load_bias: r_s must be > 0");
    BiasConfig b = row_read_bias(spec, selected_row);
    std::fill(b.bitlines.begin(), b.bitlines.end(), BitlineTermination{ResistiveLoad{r_s, spec.v_b}});
    return b;
}

std::vector<Bank> bank_partition(const CrossbarSpec& spec) {
    spec.validate();
    const std::size_t n = spec.effective_bank_width();
    std::vector<Bank> banks;
    for (std::size_t c = 0; c < spec.cols; c += n) banks.push_back({c, c + n});
    return banks;
}

// ---------------------------------------------------------------------------

std::size_t Network::fixed_count() const noexcept {
    return static_cast<std::size_t>(std::count(fixed_.begin(), fixed_.end(), std::uint8_t{1}));
}

std::size_t Network::count(BranchKind k) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(branches_.begin(), branches_.end(), [k](const Branch& b) { return b.kind == k; }));
}

std::optional<std::size_t> Network::bitline_terminal(std::size_t j) const {
    const std::int64_t t = bitline_terminal_.at(j);
    if (t < 0) return std::nullopt;
    return static_cast<std::size_t>(t);
}

std::vector<double> Network::terminal_voltages() const {
    std::vector<double> v;
    v.reserve(terminals_.size());
    for (const auto& t : terminals_) v.push_back(t.voltage);
    return v;
}

std::vector<double> Network::terminal_voltages(const BiasConfig& bias) const {
    bias.validate(rows_, cols_);
    std::vector<double> v;
    v.reserve(terminals_.size());
    auto mismatch = [] { throw std::invalid_argument("terminal_voltages: bias layout differs from network"); };
    std::size_t t = 0;
    auto next = [&](LineKind line, std::size_t index) -> const Terminal& {
        if (t >= terminals_.size() || terminals_[t].line != line || terminals_[t].index != index) mismatch();
        return terminals_[t++];
    };
    for (std::size_t i = 0; i < rows_; ++i) {
        std::visit(overloaded{[&](const Drive& d) { next(LineKind::Wordline, i); v.push_back(d.v); },
                              [&](const Clamp& c) { next(LineKind::Wordline, i); v.push_back(c.v); },
                              [&](const Floating&) {}},
                   bias.wordlines[i]);
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        std::visit(overloaded{[&](const Clamp& c) {
                                  const auto& term = next(LineKind::Bitline, j);
                                  if (term.role == TerminalRole::ResistiveLoad) mismatch();
                                  v.push_back(c.v);
                              },
                              [&](const ResistiveLoad& rl) {
                                  const auto& term = next(LineKind::Bitline, j);
                                  if (term.role != TerminalRole::ResistiveLoad || term.series_r != rl.r_s) mismatch();
                                  v.push_back(rl.to);
                              },
                              [&](const Floating&) {}},
                   bias.bitlines[j]);
    }
    if (t != terminals_.size()) mismatch();
    return v;
}

std::optional<std::vector<std::uint32_t>> Network::floating_component() const {
    const std::size_t n = node_count();
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& b : branches_) {
        const auto ra = find(b.from), rb = find(b.to);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::uint8_t> anchored(n, 0);
    for (std::size_t k = 0; k < n; ++k)
        if (fixed_[k]) anchored[find(static_cast<std::uint32_t>(k))] = 1;
    for (std::size_t k = 0; k < n; ++k) {
        const auto root = find(static_cast<std::uint32_t>(k));
        if (!anchored[root]) {
            std::vector<std::uint32_t> comp;
            for (std::size_t m = 0; m < n; ++m)
                if (find(static_cast<std::uint32_t>(m)) == root) comp.push_back(static_cast<std::uint32_t>(m));
            return comp;
        }
    }
    return std::nullopt;
}

Network build_network(const CrossbarSpec& spec, const CellArray& cells, const BiasConfig& bias) {
    spec.validate();
    require(cells.rows() == spec.rows && cells.cols() == spec.cols, "build_network: cell array does not match spec");
    bias.validate(spec.rows, spec.cols);

    const std::size_t M = spec.rows, N = spec.cols;
    Network net;
    net.rows_ = M;
    net.cols_ = N;
    net.collapsed_ = spec.r_wire == 0.0;
    net.rail_nodes_ = net.collapsed_ ? M + N : 2 * M * N;
    net.cells_ = cells.cells();
    net.model_ = cells.model();

    net.branches_.reserve(M * N + (net.collapsed_ ? 0 : M * (N - 1) + (M - 1) * N) + M + N);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < N; ++j) {
            const auto& c = net.cell(i, j);
            const double g = c.model == DeviceModel::Linear ? 1.0 / c.scale : 0.0;
            net.branches_.push_back({BranchKind::Device, net.wordline_node(i, j), net.bitline_node(i, j), g,
                                     static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        }
    if (!net.collapsed_) {
        const double gw = 1.0 / spec.r_wire;
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j + 1 < N; ++j)
                net.branches_.push_back({BranchKind::WireW, net.wordline_node(i, j), net.wordline_node(i, j + 1), gw,
                                         static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
        for (std::size_t i = 0; i + 1 < M; ++i)
            for (std::size_t j = 0; j < N; ++j)
                net.branches_.push_back({BranchKind::WireB, net.bitline_node(i, j), net.bitline_node(i + 1, j), gw,
                                         static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }

    std::size_t nodes = net.rail_nodes_;
    net.fixed_.assign(nodes, 0);
    net.fixed_voltage_.assign(nodes, std::nan(""));
    net.bitline_terminal_.assign(N, -1);

    auto attach = [&](LineKind line, std::size_t index, TerminalRole role, std::uint32_t rail, double v, double r) {
        Terminal t{line, static_cast<std::uint32_t>(index), role, rail, rail, v, r, -1};
        if (r == 0.0) {
            net.fixed_[rail] = 1;
            net.fixed_voltage_[rail] = v;
        } else {
            t.fixed_node = static_cast<std::uint32_t>(nodes++);
            net.fixed_.push_back(1);
            net.fixed_voltage_.push_back(v);
            t.branch = static_cast<std::int64_t>(net.branches_.size());
            net.branches_.push_back({BranchKind::Terminal, t.fixed_node, rail, 1.0 / r, static_cast<std::uint32_t>(index), 0});
        }
        if (line == LineKind::Bitline) net.bitline_terminal_[index] = static_cast<std::int64_t>(net.terminals_.size());
        net.terminals_.push_back(t);
    };

    for (std::size_t i = 0; i < M; ++i) {
        const auto rail = net.wordline_node(i, 0);
        std::visit(overloaded{[&](const Drive& d) { attach(LineKind::Wordline, i, TerminalRole::Drive, rail, d.v, spec.r_driver); },
                              [&](const Clamp& c) { attach(LineKind::Wordline, i, TerminalRole::Clamp, rail, c.v, spec.r_driver); },
                              [](const Floating&) {}},
                   bias.wordlines[i]);
    }
    for (std::size_t j = 0; j < N; ++j) {
        const auto rail = net.bitline_node(M - 1, j);
        std::visit(overloaded{[&](const Clamp& c) { attach(LineKind::Bitline, j, TerminalRole::Clamp, rail, c.v, spec.r_driver); },
                              [&](const ResistiveLoad& rl) {
                                  attach(LineKind::Bitline, j, TerminalRole::ResistiveLoad, rail, rl.to, rl.r_s);
                              },
                              [](const Floating&) {}},
                   bias.bitlines[j]);
    }

    // Most common terminal voltage; ties resolve to the smaller value.
    std::map<double, std::size_t> freq;
    for (const auto& t : net.terminals_) ++freq[t.voltage];
    std::size_t best = 0;
    for (const auto& [v, n] : freq)
        if (n > best) {
            best = n;
            net.rest_voltage_ = v;
        }

    if (auto comp = net.floating_component()) {
        const std::string what = "build_network: " + std::to_string(comp->size()) +
                                 "-node subnetwork has no fixed-voltage anchor (node " +
                                 std::to_string(comp->front()) + ")";
        throw SingularNetworkError(what, std::move(*comp));
    }
    return net;
}

}  // namespace xbar
