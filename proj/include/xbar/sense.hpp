#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace xbar {

struct SenseParams {
    double v_dd = 1.2;
    double v_b = 0.7;
    double r_l = 1e6;
    double alpha = 1.0;
    double i_ref = 1e-6;
    double i_1 = 1e-6;
    double noise_margin = 10e-3;
    double v_disturb_pos = 20e-3;
    double v_disturb_neg = -35e-3;
    double recovery_time = 1e-9;
    double energy_per_bit = 7.6e-15;
    double i_max = 0.22e-6;
    double i_min = 0.195e-6;

    void validate() const;
    double v_ref() const noexcept { return v_dd - (alpha * i_ref - i_1) * r_l; }
    friend bool operator==(const SenseParams&, const SenseParams&) = default;
};

struct SenseOutput {
    double v_o;
    bool out_of_range;  // outside [0, v_dd]
};

/// V_o = V_ref - i_in * R_L. Requires i_in >= 0.
SenseOutput sense_output_voltage(const SenseParams& p, double i_in);

enum class ComparatorPhase { Reset, Latch };

struct Decision {
    ComparatorPhase phase;
    double differential;
    std::optional<int> bit;  // empty during reset
    bool reliable;
    int xor_out;             // 0 during reset, 1 once latched
};

class SequencingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Per-channel reset/latch state machine. Each cycle must reset before it
/// latches; a second latch in the same cycle is also a sequencing error.
class LatchedComparator {
public:
    explicit LatchedComparator(double noise_margin = 10e-3);

    Decision step(ComparatorPhase phase, double differential);
    Decision reset() { return step(ComparatorPhase::Reset, 0.0); }
    Decision latch(double differential) { return step(ComparatorPhase::Latch, differential); }

    std::size_t cycle() const noexcept { return cycle_; }
    const std::vector<Decision>& trace() const noexcept { return trace_; }

private:
    double noise_margin_;
    bool armed_ = false;
    std::size_t cycle_ = 0;
    std::vector<Decision> trace_;
};

/// Replays a phase sequence; throws SequencingError on the first violation.
std::vector<Decision> run_comparator(double noise_margin, const std::vector<ComparatorPhase>& phases,
                                     const std::vector<double>& differentials);

/// CSV columns: cycle, phase, differential_V, bit, reliable.
void write_decision_trace(std::ostream& os, const std::vector<Decision>& trace);

struct CurrentWindow {
    double i_max;
    double i_min;
};

class WindowViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Returns the configured sensing window after checking lrs > hrs, the LRS
/// current does not exceed i_max and the HRS current does not exceed i_min.
CurrentWindow current_margin_limits(const SenseParams& p, double lrs_current, double hrs_current);

/// Comparator input for one sensed current against the reference current
/// threshold: (V_o at threshold) - (V_o at i_in). Positive reads as LRS.
double comparator_differential(const SenseParams& p, double i_in, double i_threshold);

}  // namespace xbar
