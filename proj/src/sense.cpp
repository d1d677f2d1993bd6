#include "xbar/sense.hpp"

#include <cmath>
#include <string>

#include "xbar/units.hpp"

namespace xbar {

void SenseParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(v_dd, "v_dd");
    positive(v_b, "v_b");
    positive(r_l, "r_l");
    positive(alpha, "alpha");
    positive(i_ref, "i_ref");
    positive(i_1, "i_1");
    positive(noise_margin, "noise_margin");
    positive(v_disturb_pos, "v_disturb_pos");
    positive(recovery_time, "recovery_time");
    positive(energy_per_bit, "energy_per_bit");
    positive(i_max, "i_max");
    positive(i_min, "i_min");
    if (!(v_disturb_neg < 0.0)) throw std::invalid_argument("v_disturb_neg must be negative");
    if (!(v_b < v_dd)) throw std::invalid_argument("v_b must be below v_dd");
}

SenseOutput sense_output_voltage(const SenseParams& p, double i_in) {
    if (!(i_in >= 0.0)) throw std::invalid_argument("sense_output_voltage: i_in must be >= 0");
    const double v = p.v_ref() - i_in * p.r_l;
    return {v, v < 0.0 || v > p.v_dd};
}

LatchedComparator::LatchedComparator(double noise_margin) : noise_margin_(noise_margin) {
    if (!(noise_margin >= 0.0)) throw std::invalid_argument("noise_margin must be >= 0");
}

Decision LatchedComparator::step(ComparatorPhase phase, double differential) {
    Decision d{phase, differential, std::nullopt, true, 0};
    if (phase == ComparatorPhase::Reset) {
        if (!trace_.empty()) ++cycle_;
        armed_ = true;
    } else {
        if (!armed_) throw SequencingError("latch without a preceding reset in cycle " + std::to_string(cycle_));
        armed_ = false;
        d.bit = differential > 0.0 ? 1 : 0;
        d.reliable = std::abs(differential) >= noise_margin_;
        d.xor_out = 1;
    }
    trace_.push_back(d);
    return d;
}

std::vector<Decision> run_comparator(double noise_margin, const std::vector<ComparatorPhase>& phases,
                                     const std::vector<double>& differentials) {
    if (phases.size() != differentials.size()) throw std::invalid_argument("run_comparator: length mismatch");
    LatchedComparator c(noise_margin);
    for (std::size_t k = 0; k < phases.size(); ++k) c.step(phases[k], differentials[k]);
    return c.trace();
}

void write_decision_trace(std::ostream& os, const std::vector<Decision>& trace) {
    os << "cycle,phase,differential_V,bit,reliable\n";
    std::size_t cycle = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const Decision& d = trace[k];
        if (d.phase == ComparatorPhase::Reset && k > 0) ++cycle;
        os << cycle << ',' << (d.phase == ComparatorPhase::Reset ? "reset" : "latch") << ','
           << format_number(d.differential) << ',' << (d.bit ? std::to_string(*d.bit) : std::string()) << ','
           << (d.reliable ? 1 : 0) << '\n';
    }
}

CurrentWindow current_margin_limits(const SenseParams& p, double lrs_current, double hrs_current) {
    if (!(lrs_current > hrs_current))
        throw WindowViolation("LRS current " + format_number(lrs_current) + " A does not exceed HRS current " +
                              format_number(hrs_current) + " A");
    if (lrs_current > p.i_max)
        throw WindowViolation("LRS current " + format_number(lrs_current) + " A exceeds i_max " +
                              format_number(p.i_max) + " A; resize R_L or the read bias");
    if (hrs_current > p.i_min)
        throw WindowViolation("HRS current " + format_number(hrs_current) + " A exceeds i_min " +
                              format_number(p.i_min) + " A; resize R_L or the read bias");
    return {p.i_max, p.i_min};
}

double comparator_differential(const SenseParams& p, double i_in, double i_threshold) {
    return (i_in - i_threshold) * p.r_l;
}

}  // namespace xbar
