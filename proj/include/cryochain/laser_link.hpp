#pragma once

// Cryogenic laser-diode optical readout link: the click signal modulates a
// laser diode above threshold, travels up a fiber, and is converted back by
// a room-temperature photodiode, then cleaned up by a low-pass filter.
//
// All voltages are referenced to the quiescent operating point set by the
// diode bias. Drive excursions below the lasing threshold clip (flagged).
// The link adds band-concentrated intensity noise near 500 MHz, and a
// slightly under-damped second-order term reproduces the observed
// falling-edge overswing (a fit, not physics).

#include <cmath>
#include <stdexcept>

#include "filtering.hpp"
#include "noise.hpp"
#include "rng.hpp"
#include "waveform.hpp"

namespace cryochain {

struct LaserLink {
    double bias_current_a = 5e-3;
    double threshold_current_a = 2e-3;
    double bias_impedance_ohm = 50.0;      // converts bias headroom to voltage headroom
    double slope_efficiency_w_per_v = 1e-3;
    double link_noise_sigma_v = 1.0e-2;    // intensity noise, V-equivalent at the photodiode
    double noise_center_hz = 500e6;
    double noise_bandwidth_hz = 350e6;
    double photodiode_gain_v_per_w = 1e3;
    double lowpass_cutoff_hz = 45e6;
    double ring_f0_hz = 50e6;              // overswing fit: resonance
    double ring_zeta = 0.35;               // overswing fit: damping
};

inline void validate_link(const LaserLink& l) {
    if (!(l.lowpass_cutoff_hz > 0.0))
        throw std::invalid_argument("LaserLink: cutoff must be positive");
    if (!(l.slope_efficiency_w_per_v > 0.0))
        throw std::invalid_argument("LaserLink: slope efficiency must be positive");
    if (!(l.bias_current_a > l.threshold_current_a))
        throw std::invalid_argument("LaserLink: diode must be biased above threshold");
    if (!(l.bias_impedance_ohm > 0.0) || !(l.photodiode_gain_v_per_w > 0.0))
        throw std::invalid_argument("LaserLink: impedance and photodiode gain must be positive");
    if (!(l.link_noise_sigma_v >= 0.0) || !(l.noise_bandwidth_hz > 0.0) ||
        !(l.ring_f0_hz > 0.0) || !(l.ring_zeta > 0.0))
        throw std::invalid_argument("LaserLink: bad noise or ring parameters");
}

struct TransducedSignal {
    Waveform waveform;    // after the readout low-pass
    Waveform pre_filter;  // before the readout low-pass (noise fully visible)
    bool clipped = false;
};

inline TransducedSignal transduce_optical(const LaserLink& link, const Waveform& drive,
                                          std::uint64_t seed) {
    validate_link(link);
    if (drive.samples.empty()) throw std::invalid_argument("transduce_optical: empty drive");

    // Voltage headroom before the diode drops below lasing threshold.
    const double headroom_v =
        (link.bias_current_a - link.threshold_current_a) * link.bias_impedance_ohm;

    TransducedSignal out;
    Waveform v = drive;
    for (double& s : v.samples) {
        if (s < -headroom_v) {
            s = -headroom_v;  // hard clip at threshold
            out.clipped = true;
        }
    }

    // Electro-optic conversion and back: net transimpedance of the link.
    const double gain = link.slope_efficiency_w_per_v * link.photodiode_gain_v_per_w;
    for (double& s : v.samples) s *= gain;

    // Bandwidth-mismatch ringing on the signal path.
    out.pre_filter = lowpass_second_order(v, link.ring_f0_hz, link.ring_zeta);

    // Intensity noise as seen at the photodiode, centered near 500 MHz.
    if (link.link_noise_sigma_v > 0.0) {
        Rng rng = Rng::substream(seed, 0);
        Waveform noise = band_noise(v.duration_s(), v.sample_rate_hz, link.noise_center_hz,
                                    link.noise_bandwidth_hz, link.link_noise_sigma_v, rng);
        noise.t0_s = out.pre_filter.t0_s;
        add_in_place(out.pre_filter, noise);
    }

    out.waveform = lowpass_first_order(out.pre_filter, link.lowpass_cutoff_hz);
    return out;
}

} // namespace cryochain
