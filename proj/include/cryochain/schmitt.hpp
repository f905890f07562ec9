#pragma once

// Schmitt trigger with RC-decaying positive feedback.
//
// While idle the comparator fires when v_in > threshold. At the trigger
// instant the feedback divider adds v_fb = feedback_fraction * output swing
// to the input; the feedback capacitor charges, so v_fb decays with
// feedback_tau. The output returns low when v_in + v_fb <= threshold, and
// the feedback resets (the divider no longer lifts the input once the
// output is low). With the input tail near v_tail by turn-off time, the
// output width has the closed form
//     W = feedback_tau * ln(feedback_fraction * swing / (threshold - v_tail)),
// which is set by the trigger's own RC, not by the input pulse length.

#include <cmath>
#include <stdexcept>

#include "digital.hpp"
#include "waveform.hpp"

namespace cryochain {

struct SchmittTrigger {
    double threshold_v = 0.05;
    double feedback_fraction = 0.5;   // 1:1 divider mixing
    double feedback_tau_s = 60e-9;
    double output_high_v = 1.0;
    double output_low_v = 0.0;
    double comparator_delay_s = 4e-9;
};

inline void validate_trigger(const SchmittTrigger& t) {
    if (!(t.output_high_v > t.output_low_v))
        throw std::invalid_argument("SchmittTrigger: output_high must exceed output_low");
    if (!(t.feedback_tau_s > 0.0))
        throw std::invalid_argument("SchmittTrigger: feedback_tau must be positive");
    if (!(t.feedback_fraction > 0.0 && t.feedback_fraction < 1.0))
        throw std::invalid_argument("SchmittTrigger: feedback_fraction must lie in (0,1)");
    if (!(t.comparator_delay_s >= 0.0))
        throw std::invalid_argument("SchmittTrigger: negative comparator delay");
}

inline double feedback_swing(const SchmittTrigger& t) {
    return t.feedback_fraction * (t.output_high_v - t.output_low_v);
}

// Closed-form output width for an input whose tail has settled to v_tail by
// the turn-off instant.
inline double trigger_pulse_width(const SchmittTrigger& t, double v_tail = 0.0) {
    validate_trigger(t);
    const double drop = t.threshold_v - v_tail;
    if (!(drop > 0.0))
        throw std::invalid_argument("trigger_pulse_width: tail must settle below threshold");
    if (!(feedback_swing(t) > drop))
        throw std::invalid_argument("trigger_pulse_width: feedback too weak to hold the output");
    return t.feedback_tau_s * std::log(feedback_swing(t) / drop);
}

// Stateful scan over the waveform. Transitions are stamped with the
// interpolated crossing instant plus comparator_delay.
inline DigitalWaveform trigger_response(const SchmittTrigger& trig, const Waveform& w) {
    validate_trigger(trig);
    if (w.samples.empty()) throw std::invalid_argument("trigger_response: empty waveform");
    if (!(w.sample_rate_hz * trig.feedback_tau_s >= 20.0))
        throw std::invalid_argument("trigger_response: sample rate does not resolve feedback_tau");

    DigitalWaveform out;
    const double swing = feedback_swing(trig);
    bool high = false;
    double t_on = 0.0;       // interpolated trigger instant of the open pulse
    double g_prev = 0.0;     // previous v_in + v_fb while high

    for (std::size_t i = 0; i < w.size(); ++i) {
        const double t = w.time_at(i);
        const double v = w.samples[i];
        if (!high) {
            if (v > trig.threshold_v) {
                double tc = t;
                if (i > 0) {
                    const double a = w.samples[i - 1];
                    tc = w.time_at(i - 1) + (trig.threshold_v - a) / (v - a) * w.dt();
                }
                t_on = tc;
                high = true;
                g_prev = v + swing * std::exp(-(t - t_on) / trig.feedback_tau_s);
                out.transitions.push_back({t_on + trig.comparator_delay_s, Level::high});
            }
        } else {
            const double g = v + swing * std::exp(-(t - t_on) / trig.feedback_tau_s);
            if (g <= trig.threshold_v) {
                const double frac = (g_prev - trig.threshold_v) / (g_prev - g);
                const double toff = t - w.dt() + frac * w.dt();
                high = false;
                out.transitions.push_back({toff + trig.comparator_delay_s, Level::low});
            }
            g_prev = g;
        }
    }
    return out;
}

} // namespace cryochain
