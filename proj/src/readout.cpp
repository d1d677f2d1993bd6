#include "xbar/readout.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xbar/error.hpp"

namespace xbar {

std::string_view to_string(SchemeKind s) noexcept {
    switch (s) {
        case SchemeKind::RowReadout: return "row_readout";
        case SchemeKind::Conventional: return "conventional";
        case SchemeKind::FloatingBitlines: return "floating_bitlines";
        case SchemeKind::ResistiveLoad: return "resistive_load";
    }
    return "?";
}

ReadResult classify_row(std::size_t row, SignalUnit unit, std::vector<double> sensed, std::vector<Bit> true_bits,
                        double threshold) {
    if (sensed.size() != true_bits.size()) throw std::invalid_argument("classify_row: length mismatch");
    ReadResult r;
    r.row = row;
    r.unit = unit;
    r.threshold = threshold;
    r.classified_bits.reserve(sensed.size());
    for (std::size_t j = 0; j < sensed.size(); ++j) {
        const Bit b = sensed[j] > threshold ? Bit::Lrs : Bit::Hrs;
        r.classified_bits.push_back(b);
        if (b != true_bits[j]) r.error_columns.push_back(j);
    }
    r.error_count = r.error_columns.size();
    r.sensed = std::move(sensed);
    r.true_bits = std::move(true_bits);
    return r;
}

namespace {

std::vector<Bit> row_bits(const CellArray& cells, std::size_t row) {
    std::vector<Bit> bits(cells.cols());
    for (std::size_t j = 0; j < cells.cols(); ++j) bits[j] = cells(row, j).bit;
    return bits;
}

}  // namespace

// ---------------------------------------------------------------------------

RowReader::RowReader(const CrossbarSpec& spec, const CellArray& cells, SolverOptions opts) : spec_(spec) {
    spec_.validate();
    net_ = std::make_unique<Network>(build_network(spec_, cells, row_read_bias(spec_, 0)));
    solver_ = std::make_unique<NetworkSolver>(*net_, opts);
}

RowReader::~RowReader() = default;
RowReader::RowReader(RowReader&&) noexcept = default;

Solution RowReader::solve_row(std::size_t row, const BiasOffsets& offsets) const {
    return solver_->solve(net_->terminal_voltages(row_read_bias(spec_, row, offsets)));
}

std::vector<double> RowReader::column_currents(std::size_t row, const BiasOffsets& offsets) const {
    std::vector<double> out(spec_.cols);
    std::vector<double> last_tv;
    std::vector<double> last_currents;
    for (const Bank& bank : bank_partition(spec_)) {
        BiasOffsets local;
        local.wordline_dv = offsets.wordline_dv;
        if (!offsets.bitline_dv.empty()) {
            local.bitline_dv.assign(spec_.cols, 0.0);
            for (std::size_t j = bank.first_col; j < bank.end_col; ++j) local.bitline_dv[j] = offsets.bitline_dv.at(j);
        }
        auto tv = net_->terminal_voltages(row_read_bias(spec_, row, local));
        if (tv != last_tv) {
            last_currents = bitline_currents(*net_, solver_->solve(tv));
            last_tv = std::move(tv);
        }
        std::copy(last_currents.begin() + static_cast<std::ptrdiff_t>(bank.first_col),
                  last_currents.begin() + static_cast<std::ptrdiff_t>(bank.end_col),
                  out.begin() + static_cast<std::ptrdiff_t>(bank.first_col));
    }
    return out;
}

ReadResult RowReader::read(std::size_t row, double threshold, const BiasOffsets& offsets) const {
    std::vector<Bit> bits(spec_.cols);
    for (std::size_t j = 0; j < spec_.cols; ++j) bits[j] = net_->cell(row, j).bit;
    return classify_row(row, SignalUnit::Ampere, column_currents(row, offsets), std::move(bits), threshold);
}

ReadResult read_row(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double threshold,
                    const BiasOffsets& offsets, const SolverOptions& opts) {
    if (row >= spec.rows) throw std::out_of_range("read_row: row out of range");
    return RowReader(spec, cells, opts).read(row, threshold, offsets);
}

double read_cell_conventional(const CrossbarSpec& spec, const CellArray& cells, std::size_t i, std::size_t j,
                              UnselectedLines others, const SolverOptions& opts) {
    const Network net = build_network(spec, cells, conventional_cell_bias(spec, i, j, others));
    const Solution sol = solve(net, opts);
    return -sol.terminal_currents.at(*net.bitline_terminal(j));
}

// ---------------------------------------------------------------------------

struct ConventionalReader::Impl {
    CrossbarSpec spec;
    UnselectedLines others;
    SolverOptions opts;
    const CellArray* cells = nullptr;
    // Floating + linear: grounded Laplacian factorization.
    std::unique_ptr<Network> laplacian_net;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    std::uint32_t ground = 0;
    bool effective_resistance = false;
    // Grounded: one shared solver.
    std::unique_ptr<Network> grounded_net;
    std::unique_ptr<NetworkSolver> grounded_solver;

    Eigen::Index reduced(std::uint32_t node) const { return node < ground ? node : node - 1; }
};

ConventionalReader::ConventionalReader(const CrossbarSpec& spec, const CellArray& cells, UnselectedLines others,
                                       SolverOptions opts)
    : impl_(std::make_unique<Impl>()) {
    auto& s = *impl_;
    s.spec = spec;
    s.others = others;
    s.opts = opts;
    s.cells = &cells;
    spec.validate();
    if (others == UnselectedLines::Grounded) {
        s.grounded_net = std::make_unique<Network>(build_network(spec, cells, conventional_cell_bias(spec, 0, 0, others)));
        s.grounded_solver = std::make_unique<NetworkSolver>(*s.grounded_net, opts);
        return;
    }
    if (cells.model() != DeviceModel::Linear) return;

    // Any bias works for extracting the device/wire graph; terminals are ignored below.
    s.laplacian_net = std::make_unique<Network>(build_network(spec, cells, conventional_cell_bias(spec, 0, 0, others)));
    const Network& net = *s.laplacian_net;
    const auto rails = static_cast<std::uint32_t>(net.rail_node_count());
    s.ground = rails - 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * net.branches().size());
    for (const auto& b : net.branches()) {
        if (b.kind == BranchKind::Terminal) continue;
        const bool fa = b.from != s.ground, fb = b.to != s.ground;
        const auto ra = s.reduced(b.from), rb = s.reduced(b.to);
        if (fa) trip.emplace_back(ra, ra, b.g);
        if (fb) trip.emplace_back(rb, rb, b.g);
        if (fa && fb) {
            trip.emplace_back(ra, rb, -b.g);
            trip.emplace_back(rb, ra, -b.g);
        }
    }
    Eigen::SparseMatrix<double> lg(rails - 1, rails - 1);
    lg.setFromTriplets(trip.begin(), trip.end());
    if (rails > 1) {
        s.llt.compute(lg);
        if (s.llt.info() != Eigen::Success)
            throw SingularNetworkError("ConventionalReader: Laplacian factorization failed", {});
    }
    s.effective_resistance = true;
}

ConventionalReader::~ConventionalReader() = default;
ConventionalReader::ConventionalReader(ConventionalReader&&) noexcept = default;

double ConventionalReader::read(std::size_t i, std::size_t j) const {
    const auto& s = *impl_;
    if (i >= s.spec.rows || j >= s.spec.cols) throw std::out_of_range("ConventionalReader: cell out of range");
    if (s.grounded_solver) {
        const auto tv = s.grounded_net->terminal_voltages(conventional_cell_bias(s.spec, i, j, s.others));
        return bitline_currents(*s.grounded_net, s.grounded_solver->solve(tv)).at(j);
    }
    if (!s.effective_resistance) return read_cell_conventional(s.spec, *s.cells, i, j, s.others, s.opts);

    const Network& net = *s.laplacian_net;
    const std::uint32_t p = net.wordline_node(i, 0);
    const std::uint32_t q = net.bitline_node(s.spec.rows - 1, j);
    const auto n = static_cast<Eigen::Index>(net.rail_node_count()) - 1;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    if (p != s.ground) e[s.reduced(p)] += 1.0;
    if (q != s.ground) e[s.reduced(q)] -= 1.0;
    const Eigen::VectorXd x = s.llt.solve(e);
    const double xp = p != s.ground ? x[s.reduced(p)] : 0.0;
    const double xq = q != s.ground ? x[s.reduced(q)] : 0.0;
    const double r_eff = xp - xq;
    return s.spec.v_dd / (r_eff + 2.0 * s.spec.r_driver);
}

// ---------------------------------------------------------------------------

ReadResult read_row_floating(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double threshold,
                             const SolverOptions& opts) {
    const Network net = build_network(spec, cells, floating_bitline_bias(spec, row));
    const Solution sol = solve(net, opts);
    auto v = bitline_sense_voltages(net, sol);
    for (double& x : v) x -= spec.v_b;
    return classify_row(row, SignalUnit::Volt, std::move(v), row_bits(cells, row), threshold);
}

ReadResult read_row_resistive(const CrossbarSpec& spec, const CellArray& cells, std::size_t row, double r_s,
                              double threshold, const SolverOptions& opts) {
    const Network net = build_network(spec, cells, resistive_load_bias(spec, row, r_s));
    const Solution sol = solve(net, opts);
    auto i = bitline_currents(net, sol);
    for (double& x : i) x *= r_s;
    return classify_row(row, SignalUnit::Volt, std::move(i), row_bits(cells, row), threshold);
}

double midpoint_threshold(const CrossbarSpec& spec, const DeviceParams& params) {
    validate(params);
    const double v = spec.read_voltage();
    const double on = device_current(nominal_cell(Bit::Lrs, params), v);
    const double off = device_current(nominal_cell(Bit::Hrs, params), v);
    return std::sqrt(on * off);
}

double balanced_error_rate(std::span<const double> lrs, std::span<const double> hrs, double threshold) {
    if (lrs.empty() || hrs.empty()) throw std::invalid_argument("balanced_error_rate: empty population");
    std::uint64_t miss_l = 0, miss_h = 0;
    for (double x : lrs) miss_l += !(x > threshold);
    for (double x : hrs) miss_h += (x > threshold);
    const std::uint64_t nl = lrs.size(), nh = hrs.size();
    return 0.5 * static_cast<double>(miss_l * nh + miss_h * nl) / static_cast<double>(nl * nh);
}

ThresholdBer best_threshold_ber(std::span<const double> lrs, std::span<const double> hrs) {
    if (lrs.empty() || hrs.empty()) throw std::invalid_argument("best_threshold_ber: empty population");
    struct Sample {
        double x;
        bool is_lrs;
    };
    std::vector<Sample> all;
    all.reserve(lrs.size() + hrs.size());
    for (double x : lrs) all.push_back({x, true});
    for (double x : hrs) all.push_back({x, false});
    std::sort(all.begin(), all.end(), [](const Sample& a, const Sample& b) { return a.x < b.x; });

    const std::uint64_t nl = lrs.size(), nh = hrs.size();
    // Threshold below everything: every LRS read correctly, every HRS wrong.
    std::uint64_t miss_l = 0, miss_h = nh;
    std::uint64_t best_num = miss_l * nh + miss_h * nl;
    double best_t = all.front().x - std::max(1.0, std::abs(all.front().x));
    for (std::size_t k = 0; k < all.size();) {
        const double x = all[k].x;
        while (k < all.size() && all[k].x == x) {
            if (all[k].is_lrs)
                ++miss_l;
            else
                --miss_h;
            ++k;
        }
        const double t = k < all.size() ? x + 0.5 * (all[k].x - x) : x + std::max(1.0, std::abs(x));
        const std::uint64_t num = miss_l * nh + miss_h * nl;
        if (num < best_num) {
            best_num = num;
            best_t = t;
        }
    }
    return {best_t, 0.5 * static_cast<double>(best_num) / static_cast<double>(nl * nh)};
}

}  // namespace xbar
