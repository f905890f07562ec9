#pragma once

// Two-threshold window discriminator and the CMOS modulator driver.
//
// Gate network (one NAND plus inverters, buffer on the output):
//
//   input --[lower trigger]--> L --NOT--> a --NOT--> b --.
//                                                        NAND--> d --NOT--> out --BUF--> drive
//   input --[upper trigger]--> U ----------------NOT--> c'
//
// out = delayed(L) AND NOT(U): a pulse appears exactly when the lower
// trigger fired but the upper did not. The two inverters in the lower arm
// delay it relative to the upper arm, and the upper trigger's longer
// feedback pulse holds c low well past the lower pulse, so a fast
// multi-photon rising edge that sweeps through the window cannot sneak a
// pulse out before the upper boundary disables the output (the NAND's
// inertial delay swallows the sub-margin overlap).

#include <stdexcept>

#include "digital.hpp"
#include "gates.hpp"
#include "schmitt.hpp"
#include "waveform.hpp"

namespace cryochain {

struct DiscriminatorGates {
    GateModel inverter{GateKind::not_gate, 3e-9, 1.0};
    GateModel nand_gate{GateKind::nand_gate, 3e-9, 1.0};
    GateModel output_buffer{GateKind::buffer_gate, 4e-9, 1.0};
};

struct DiscriminatorOutcome {
    DigitalWaveform lower_monitor;  // lower trigger output (probe point)
    DigitalWaveform upper_monitor;  // upper trigger output (probe point)
    DigitalWaveform output;         // buffered window strobe
};

inline void validate_window(const SchmittTrigger& lower, const SchmittTrigger& upper) {
    validate_trigger(lower);
    validate_trigger(upper);
    if (!(lower.threshold_v < upper.threshold_v))
        throw std::invalid_argument(
            "window_discriminator: lower threshold must be below upper threshold");
    if (!(upper.feedback_tau_s > lower.feedback_tau_s))
        throw std::invalid_argument(
            "window_discriminator: upper trigger needs the longer feedback pulse");
}

inline DiscriminatorOutcome discriminate(const SchmittTrigger& lower, const SchmittTrigger& upper,
                                         const DiscriminatorGates& gates, const Waveform& w) {
    validate_window(lower, upper);
    DiscriminatorOutcome r;
    r.lower_monitor = trigger_response(lower, w);
    r.upper_monitor = trigger_response(upper, w);

    const DigitalWaveform a = gate_eval(gates.inverter, {r.lower_monitor});
    const DigitalWaveform b = gate_eval(gates.inverter, {a});
    const DigitalWaveform c = gate_eval(gates.inverter, {r.upper_monitor});
    const DigitalWaveform d = gate_eval(gates.nand_gate, {b, c});
    const DigitalWaveform out = gate_eval(gates.inverter, {d});
    r.output = gate_eval(gates.output_buffer, {out});
    return r;
}

inline DigitalWaveform window_discriminator(const SchmittTrigger& lower,
                                            const SchmittTrigger& upper,
                                            const DiscriminatorGates& gates, const Waveform& w) {
    return discriminate(lower, upper, gates, w).output;
}

// Critical-path delay: comparator, two inverters, NAND, output inverter,
// buffer. Defaults sum to 20 ns.
inline double digital_path_delay(const DiscriminatorGates& gates, const SchmittTrigger& trig) {
    return trig.comparator_delay_s + 2.0 * gates.inverter.propagation_delay_s +
           gates.nand_gate.propagation_delay_s + gates.inverter.propagation_delay_s +
           gates.output_buffer.propagation_delay_s;
}

struct ModulatorDriver {
    double v_high = 3.6;
    double v_low = 0.0;
    double slew_10_90_s = 1e-9;  // made faster than the modulator bandwidth
};

// Analog drive voltage tracking the digital input with a linear slew.
// The record spans [0, duration); transitions before 0 set the start level.
inline Waveform modulator_driver(const DigitalWaveform& in, double duration_s,
                                 double sample_rate_hz = kDefaultSampleRate,
                                 const ModulatorDriver& drv = {}) {
    validate_digital(in);
    if (!(drv.v_high > drv.v_low))
        throw std::invalid_argument("modulator_driver: v_high must exceed v_low");
    if (!(drv.slew_10_90_s > 0.0))
        throw std::invalid_argument("modulator_driver: slew must be positive");

    const double ramp = drv.slew_10_90_s / 0.8;  // full 0-100% ramp time
    const double slope = (drv.v_high - drv.v_low) / ramp;

    Waveform w = make_waveform(duration_s, sample_rate_hz, drv.v_low);
    std::size_t cursor = 0;
    double seg_t = -std::numeric_limits<double>::infinity();
    double seg_v = drv.v_low;
    double target = drv.v_low;

    auto value_at_time = [&](double t) {
        if (!std::isfinite(seg_t)) return target;
        const double dv = slope * (t - seg_t);
        return target > seg_v ? std::min(seg_v + dv, target) : std::max(seg_v - dv, target);
    };

    for (std::size_t i = 0; i < w.size(); ++i) {
        const double t = w.time_at(i);
        while (cursor < in.transitions.size() && in.transitions[cursor].time_s <= t) {
            const auto& tr = in.transitions[cursor];
            seg_v = value_at_time(tr.time_s);
            seg_t = tr.time_s;
            target = tr.level == Level::high ? drv.v_high : drv.v_low;
            ++cursor;
        }
        w.samples[i] = value_at_time(t);
    }
    return w;
}

} // namespace cryochain
