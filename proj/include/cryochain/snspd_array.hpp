#pragma once

// Amplitude-multiplexed SNSPD array: pixels wired in parallel so the summed
// pulse height encodes the number of fired pixels.

#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "snspd.hpp"
#include "waveform.hpp"

namespace cryochain {

struct MultiplexedArray {
    int n_pixels = 4;
    double unit_amplitude_v = 25e-3;  // per-pixel peak at the amplifier-chain output
    double crosstalk_prob = 0.13;
    double switch_over_prob = 0.01;
    double switch_over_delay_s = 4e-9;
};

inline void validate_array(const MultiplexedArray& a) {
    if (a.n_pixels < 1) throw std::invalid_argument("MultiplexedArray: need at least one pixel");
    if (!(a.crosstalk_prob >= 0.0 && a.crosstalk_prob <= 1.0) ||
        !(a.switch_over_prob >= 0.0 && a.switch_over_prob <= 1.0))
        throw std::invalid_argument("MultiplexedArray: probabilities must lie in [0,1]");
    if (!(a.unit_amplitude_v > 0.0) || !(a.switch_over_delay_s >= 0.0))
        throw std::invalid_argument("MultiplexedArray: bad amplitude or delay");
}

// One optical pulse hitting the array. Photons land on uniformly random
// pixels; a pixel fires when hit at least once; every firing pixel then
// recruits each still-idle pixel once with probability crosstalk_prob
// (single recruitment round); finally, with probability switch_over_prob an
// extra idle pixel fires after switch_over_delay, flagged switch_over.
// Draw order (photons, crosstalk in pixel order, switch-over) is fixed for
// reproducibility.
inline DetectionEvent array_event(const MultiplexedArray& a, int n_incident, Rng& rng,
                                  double t0_s = 0.0) {
    validate_array(a);
    if (n_incident < 0) throw std::invalid_argument("array_event: negative photon count");
    DetectionEvent ev;
    ev.t0_s = t0_s;
    ev.n_photons = n_incident;
    if (n_incident == 0) return ev;  // pixel_count 0: no event

    std::vector<char> fired(static_cast<std::size_t>(a.n_pixels), 0);
    for (int p = 0; p < n_incident; ++p) {
        const auto pixel = static_cast<std::size_t>(rng.uniform01() * a.n_pixels);
        fired[pixel >= fired.size() ? fired.size() - 1 : pixel] = 1;
    }

    const std::vector<char> initial = fired;
    for (std::size_t f = 0; f < initial.size(); ++f) {
        if (!initial[f]) continue;
        for (std::size_t i = 0; i < fired.size(); ++i) {
            if (initial[i] || fired[i]) continue;
            if (rng.uniform01() < a.crosstalk_prob) fired[i] = 1;
        }
    }

    int count = 0;
    for (char f : fired) count += f;

    if (count < a.n_pixels && rng.uniform01() < a.switch_over_prob) {
        ev.switch_over = true;
        ++count;
    }
    ev.pixel_count = count;
    return ev;
}

inline DetectionEvent array_event(const MultiplexedArray& a, int n_incident, std::uint64_t seed) {
    Rng rng(seed);
    return array_event(a, n_incident, rng);
}

// Summed array output for one event: pixel_count unit pulses (n=1 shape) at
// t0, the switch-over pixel delayed by switch_over_delay. `amplitude_scale`
// rescales the per-pixel peak (1.0 = unit_amplitude, chain-output referred;
// experiments use it to work at the detector plane instead).
inline Waveform array_waveform(const MultiplexedArray& a, const DetectionEvent& ev,
                               const SnspdModel& m, double duration_s,
                               double sample_rate_hz = kDefaultSampleRate,
                               double amplitude_scale = 1.0) {
    validate_array(a);
    if (ev.pixel_count < 1) throw std::invalid_argument("array_waveform: event fired no pixels");

    Waveform unit = pulse_waveform(m, 1, ev.t0_s, duration_s, sample_rate_hz);
    const double per_pixel = a.unit_amplitude_v * amplitude_scale / m.peak_voltage(1);
    const int prompt = ev.pixel_count - (ev.switch_over ? 1 : 0);

    Waveform out = scaled(unit, per_pixel * static_cast<double>(prompt));
    if (ev.switch_over) {
        Waveform late =
            pulse_waveform(m, 1, ev.t0_s + a.switch_over_delay_s, duration_s, sample_rate_hz);
        add_in_place(out, scaled(late, per_pixel));
    }
    return out;
}

} // namespace cryochain
