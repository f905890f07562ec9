#pragma once

// Phenomenological SNSPD models.
//
// Pulse shape: double exponential
//   V(t) = A(n) * (e^{-(t-t0)/tau_f} - e^{-(t-t0)/tau_r(n)}),  t >= t0
// with tau_r(n) = L_k / (n*R_hs + Z) and tau_f = L_k / Z. Simultaneous
// photons add hotspot resistances in series, so higher n means a faster
// rising edge; the peak follows the current division i_bias*Z*nR/(nR+Z)
// and is weakly increasing in n. A(n) normalizes the double exponential so
// its maximum hits that peak exactly, which gives closed-form oracles for
// edge-timing tests.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "waveform.hpp"

namespace cryochain {

struct SnspdModel {
    double i_bias_a = 10.5e-6;
    double kinetic_inductance_h = 500e-9;
    double hotspot_resistance_ohm = 1000.0;
    double load_impedance_ohm = 50.0;
    double latch_current_a = 21e-6;
    double dark_rate_hz = 50.0;        // at the plateau-midpoint reference bias
    double dark_scale_a = 1.5e-6;      // exponential dark growth scale toward latch
    double efficiency_mid = 0.85;
    double plateau_onset_a = 12e-6;
    double plateau_end_a = 18e-6;

    double tau_rise(int n) const {
        return kinetic_inductance_h /
               (static_cast<double>(n) * hotspot_resistance_ohm + load_impedance_ohm);
    }
    double tau_fall() const { return kinetic_inductance_h / load_impedance_ohm; }

    // Peak voltage of the n-photon pulse (current division over n series hotspots).
    double peak_voltage(int n) const {
        const double nr = static_cast<double>(n) * hotspot_resistance_ohm;
        return i_bias_a * load_impedance_ohm * nr / (nr + load_impedance_ohm);
    }
};

inline void validate_model(const SnspdModel& m) {
    if (!(m.i_bias_a > 0.0) || !(m.kinetic_inductance_h > 0.0) ||
        !(m.hotspot_resistance_ohm > 0.0) || !(m.load_impedance_ohm > 0.0) ||
        !(m.latch_current_a > 0.0))
        throw std::invalid_argument("SnspdModel: currents and impedances must be positive");
    if (!(m.efficiency_mid > 0.0 && m.efficiency_mid <= 1.0))
        throw std::invalid_argument("SnspdModel: efficiency_mid must lie in (0,1]");
    if (!(m.plateau_onset_a < m.plateau_end_a && m.plateau_end_a <= m.latch_current_a))
        throw std::invalid_argument("SnspdModel: requires plateau_onset < plateau_end <= latch_current");
    if (!(m.dark_rate_hz >= 0.0) || !(m.dark_scale_a > 0.0))
        throw std::invalid_argument("SnspdModel: bad dark-count parameters");
}

// Time (after t0) and normalized height of the double-exponential maximum.
inline double pulse_peak_offset(double tau_r, double tau_f) {
    return std::log(tau_f / tau_r) * tau_f * tau_r / (tau_f - tau_r);
}
inline double pulse_shape_max(double tau_r, double tau_f) {
    const double t = pulse_peak_offset(tau_r, tau_f);
    return std::exp(-t / tau_f) - std::exp(-t / tau_r);
}

inline Waveform pulse_waveform(const SnspdModel& m, int n, double t0_s, double duration_s,
                               double sample_rate_hz = kDefaultSampleRate) {
    validate_model(m);
    if (n < 1) throw std::invalid_argument("pulse_waveform: photon count must be >= 1");
    const double tau_r = m.tau_rise(n);
    const double tau_f = m.tau_fall();
    if (!(t0_s >= 0.0) || !(t0_s + 5.0 * tau_f <= duration_s))
        throw std::invalid_argument("pulse_waveform: pulse support does not fit in duration");

    const double amplitude = m.peak_voltage(n) / pulse_shape_max(tau_r, tau_f);
    Waveform w = make_waveform(duration_s, sample_rate_hz, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double t = w.time_at(i) - t0_s;
        if (t < 0.0) continue;
        w.samples[i] = amplitude * (std::exp(-t / tau_f) - std::exp(-t / tau_r));
    }
    return w;
}

struct BiasResponse {
    double efficiency = 0.0;
    double dark_rate_hz = 0.0;
    bool latched = false;
};

// Bias-dependent behavior: smooth sigmoidal efficiency turn-on reaching
// efficiency_mid exactly at plateau_onset and staying flat across the
// plateau; dark counts grow exponentially toward the latch current; above
// latch_current the detector is latched (absorbing, zero counts).
inline BiasResponse efficiency_at_bias(const SnspdModel& m, double i_a) {
    validate_model(m);
    if (!(i_a >= 0.0)) throw std::invalid_argument("efficiency_at_bias: negative bias current");
    BiasResponse r;
    if (i_a > m.latch_current_a) {
        r.latched = true;
        return r;
    }
    if (i_a < m.plateau_onset_a) {
        const double x = i_a / m.plateau_onset_a;
        r.efficiency = m.efficiency_mid * x * x * (3.0 - 2.0 * x);  // smoothstep turn-on
    } else {
        r.efficiency = m.efficiency_mid;
    }
    const double i_ref = 0.5 * (m.plateau_onset_a + m.plateau_end_a);
    r.dark_rate_hz = m.dark_rate_hz * std::exp((i_a - i_ref) / m.dark_scale_a);
    return r;
}

struct PhotonSource {
    double rep_rate_hz = 1e6;
    double mean_photons = 2.0;  // mean photon number per pulse at the detector
};

struct DetectionEvent {
    double t0_s = 0.0;
    int n_photons = 0;
    int pixel_count = 0;
    bool switch_over = false;
};

// Pulsed coherent illumination over a time window: per laser pulse the
// detected photon count is Poisson(mu * eta(i_bias)); pulses with zero
// detections produce no event. Dark counts (n = 1) arrive as a Poisson
// process at the bias-dependent dark rate. Latched detectors produce
// nothing. Deterministic under the seed.
inline std::vector<DetectionEvent> sample_detections(const SnspdModel& m, const PhotonSource& src,
                                                     double window_s, std::uint64_t seed) {
    validate_model(m);
    if (!(src.rep_rate_hz > 0.0) || !(src.mean_photons >= 0.0))
        throw std::invalid_argument("sample_detections: bad source parameters");
    if (!(window_s > 0.0)) throw std::invalid_argument("sample_detections: window must be positive");

    const BiasResponse bias = efficiency_at_bias(m, m.i_bias_a);
    std::vector<DetectionEvent> events;
    if (bias.latched) return events;

    Rng pulse_rng = Rng::substream(seed, 0);
    const double mean = src.mean_photons * bias.efficiency;
    const long n_pulses = static_cast<long>(std::floor(window_s * src.rep_rate_hz + 1e-9));
    for (long k = 0; k < n_pulses; ++k) {
        const long n = pulse_rng.poisson(mean);
        if (n < 1) continue;
        events.push_back({static_cast<double>(k) / src.rep_rate_hz, static_cast<int>(n), 1, false});
    }

    Rng dark_rng = Rng::substream(seed, 1);
    const long n_dark = dark_rng.poisson(bias.dark_rate_hz * window_s);
    for (long k = 0; k < n_dark; ++k)
        events.push_back({dark_rng.uniform(0.0, window_s), 1, 1, false});

    std::sort(events.begin(), events.end(),
              [](const DetectionEvent& a, const DetectionEvent& b) { return a.t0_s < b.t0_s; });
    return events;
}

} // namespace cryochain
