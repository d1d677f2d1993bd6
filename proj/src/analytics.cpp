#include "xbar/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "xbar/error.hpp"

namespace xbar {

namespace {

// Neumaier compensated sum.
class Accumulator {
public:
    void add(double x) {
        const double t = sum_ + x;
        comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double state_power(const CellState& c, double v) { return v * device_current(c, v); }

}  // namespace

double power_row_approx(const CrossbarSpec& spec, const CellArray& cells, std::size_t row) {
    if (cells.cols() == 0) return 0.0;
    if (row >= cells.rows()) throw std::out_of_range("power_row_approx: row out of range");
    const double v = spec.read_voltage();
    Accumulator acc;
    for (std::size_t j = 0; j < cells.cols(); ++j) acc.add(state_power(cells(row, j), v));
    return acc.value();
}

PowerBounds power_bounds_per_cycle(const CrossbarSpec& spec, const DeviceParams& params) {
    validate(params);
    const double v = spec.read_voltage();
    const double mn = static_cast<double>(spec.rows) * static_cast<double>(spec.cols);
    return {mn * state_power(nominal_cell(Bit::Hrs, params), v), mn * state_power(nominal_cell(Bit::Lrs, params), v)};
}

PowerBounds power_bounds(const CrossbarSpec& spec, const DeviceParams& params) {
    const auto b = power_bounds_per_cycle(spec, params);
    const double r = static_cast<double>(spec.bank_count());
    return {b.min_w * r, b.max_w * r};
}

double ExactPower::relative_gap() const {
    const double scale = std::max(std::abs(branch_sum_w), std::abs(source_sum_w));
    return scale == 0.0 ? 0.0 : std::abs(branch_sum_w - source_sum_w) / scale;
}

ExactPower power_exact(const Network& net, const Solution& sol) {
    const auto& v = sol.node_voltages;
    Accumulator branches;
    for (std::size_t k = 0; k < net.branches().size(); ++k) {
        const Branch& b = net.branches()[k];
        branches.add((v[b.from] - v[b.to]) * sol.branch_currents[k]);
    }
    // Sum of V_t * I_t is gauge-invariant when the injections balance; taking
    // potentials relative to the rest rail drops the rounding-level imbalance.
    std::map<double, std::size_t> votes;
    for (const Terminal& t : net.terminals()) ++votes[v[t.fixed_node]];
    double ref = 0.0;
    std::size_t best = 0;
    for (const auto& [volt, count] : votes)
        if (count > best) {
            best = count;
            ref = volt;
        }
    Accumulator sources;
    for (std::size_t t = 0; t < net.terminals().size(); ++t)
        sources.add((v[net.terminals()[t].fixed_node] - ref) * sol.terminal_currents[t]);
    // Tellegen holds up to the sum over free nodes of (v - ref) * KCL residual.
    std::vector<double> out(net.node_count(), 0.0);
    for (std::size_t k = 0; k < net.branches().size(); ++k) {
        const Branch& b = net.branches()[k];
        out[b.from] += sol.branch_currents[k];
        out[b.to] -= sol.branch_currents[k];
    }
    double bound = 0.0;
    for (std::size_t n = 0; n < net.node_count(); ++n)
        if (!net.is_fixed(n)) bound += std::abs(v[n] - ref) * std::abs(out[n]);
    return {branches.value(), sources.value(), bound};
}

// ---------------------------------------------------------------------------

void FomInputs::validate() const {
    if (!(throughput > 0.0)) throw std::invalid_argument("throughput must be positive");
    if (!(array_usage > 0.0 && array_usage <= 1.0)) throw std::invalid_argument("array_usage must be in (0, 1]");
    if (!(reading_power_w > 0.0)) throw std::invalid_argument("reading power must be positive");
    if (!(cell_count > 0.0)) throw std::invalid_argument("cell_count must be positive");
    if (!(cell_area_um2 > 0.0)) throw std::invalid_argument("cell_area must be positive");
}

double fom(const FomInputs& in) {
    in.validate();
    const double bits_per_w_um2 = in.throughput * in.array_usage * in.cell_count / (in.reading_power_w * in.cell_area_um2);
    return bits_per_w_um2 / 1e12;
}

std::vector<Table1Row> table1_report(std::size_t banks, std::size_t n) {
    if (banks == 0 || n < 3) throw std::invalid_argument("table1_report: need banks >= 1 and n >= 3");
    const double N = static_cast<double>(n);
    const double R = static_cast<double>(banks);
    const double cells = N * N;
    struct Descriptor {
        const char* name;
        double throughput, usage, power_mw, published;
    };
    const Descriptor rows[] = {
        {"Multistage", 1.0 / 6.0, 1.0, 7.0, 0.04},
        {"Multiport", 1.0 / 3.0, (N - 2.0) / N, 2.1, 0.265},
        {"Grounded rows and cols", 1.0, 1.0, 4.0, 0.4194},
        {"Predefined dummy bits", 1.0, (N - 1.0) / N, 0.291, 5.754},
        {"Row readout", N / R, 1.0, 1.358 * R, 633.0 / (R * R)},
    };
    std::vector<Table1Row> out;
    for (const auto& d : rows) {
        Table1Row r;
        r.technique = d.name;
        r.inputs = FomInputs{d.throughput, d.usage, d.power_mw * 1e-3, cells};
        r.published_fom = d.published;
        r.computed_fom = fom(r.inputs);
        r.relative_error = std::abs(r.computed_fom - d.published) / d.published;
        r.match = r.relative_error <= 0.01;
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

void MismatchParams::validate() const {
    if (!(delta_v >= 0.0) || !std::isfinite(delta_v)) throw std::invalid_argument("delta_v must be >= 0");
    if (!(i_max > 0.0) || !(i_min > 0.0)) throw std::invalid_argument("i_max and i_min must be positive");
    xbar::validate(device);
}

UnwantedCurrent mismatch_unwanted_current(std::size_t n, const MismatchParams& p) {
    if (n < 2) throw std::invalid_argument("mismatch_unwanted_current: N must be >= 2");
    p.validate();
    const double half = 0.5 * static_cast<double>(n);
    if (const auto* lin = std::get_if<LinearDeviceParams>(&p.device)) {
        return {p.delta_v * (half / lin->lrs_ohms + (half - 1.0) / lin->hrs_ohms), half * p.delta_v / lin->lrs_ohms};
    }
    const auto& nl = std::get<NonlinearDeviceParams>(p.device);
    return {nl.a * p.delta_v * (half * nl.k_on + (half - 1.0) * nl.k_off), half * nl.a * p.delta_v * nl.k_on};
}

std::size_t max_column_width(const MismatchParams& p) {
    p.validate();
    if (p.delta_v == 0.0) throw std::invalid_argument("max_column_width: unbounded for delta_v = 0");
    double per_unit;  // approximate unwanted current per column of width 2
    if (const auto* lin = std::get_if<LinearDeviceParams>(&p.device))
        per_unit = p.delta_v / lin->lrs_ohms;
    else {
        const auto& nl = std::get<NonlinearDeviceParams>(p.device);
        per_unit = p.delta_v * nl.a * nl.k_on;
    }
    const double n = 2.0 * std::min(p.i_max, p.i_min) / per_unit;
    // Guard against 194.99999999 from binary rounding of exact decimal ratios.
    return static_cast<std::size_t>(std::floor(n * (1.0 + 1e-12)));
}

double MismatchCheckResult::relative_error() const {
    if (!empirical) return INFINITY;
    return std::abs(static_cast<double>(*empirical) - static_cast<double>(analytic)) / static_cast<double>(analytic);
}

namespace {

Network mismatch_column(const CrossbarSpec& base, const MismatchParams& p, std::size_t n, double r_wire,
                        double delta_v) {
    CrossbarSpec spec = base;
    spec.rows = n;
    spec.cols = 1;
    spec.bank_width = 0;
    spec.r_wire = r_wire;
    std::vector<CellState> cells(n);
    // Row 0 is read; rows 1..floor(n/2) are LRS, the rest HRS.
    cells[0] = nominal_cell(Bit::Lrs, p.device);
    for (std::size_t i = 1; i < n; ++i) cells[i] = nominal_cell(i <= n / 2 ? Bit::Lrs : Bit::Hrs, p.device);
    BiasOffsets off;
    off.wordline_dv.assign(n, delta_v);
    off.wordline_dv[0] = 0.0;
    return build_network(spec, CellArray(n, 1, std::move(cells)), row_read_bias(spec, 0, off));
}

}  // namespace

double simulated_unwanted_current(const CrossbarSpec& spec, const MismatchParams& p, std::size_t n, double r_wire,
                                  const SolverOptions& opts) {
    if (n < 2) throw std::invalid_argument("simulated_unwanted_current: N must be >= 2");
    const Network with = mismatch_column(spec, p, n, r_wire, p.delta_v);
    const Network without = mismatch_column(spec, p, n, r_wire, 0.0);
    return bitline_currents(with, solve(with, opts))[0] - bitline_currents(without, solve(without, opts))[0];
}

MismatchCheckResult mismatch_simulation_check(const CrossbarSpec& spec, const MismatchParams& p,
                                              const MismatchCheckOptions& opts) {
    p.validate();
    MismatchCheckResult r{};
    const bool linear = std::holds_alternative<LinearDeviceParams>(p.device);
    r.step = opts.step ? opts.step : (linear ? 2 : 100);
    if (p.delta_v > 0.0) {
        r.analytic = max_column_width(p);
        r.sweep_cap = opts.sweep_cap ? opts.sweep_cap : std::max<std::size_t>(64, 4 * r.analytic);
    } else {
        r.analytic = 0;
        r.sweep_cap = opts.sweep_cap ? opts.sweep_cap : 1024;
    }
    const double window = std::min(p.i_max, p.i_min);
    std::optional<std::size_t> last_pass;
    for (std::size_t n = r.step; n <= r.sweep_cap; n += r.step) {
        if (n < 2) continue;
        const double i_unw = simulated_unwanted_current(spec, p, n, opts.r_wire, opts.solver);
        if (i_unw <= window)
            last_pass = n;
        else {
            r.empirical = last_pass.value_or(0);
            return r;
        }
    }
    return r;  // no failing width up to the cap
}

}  // namespace xbar
