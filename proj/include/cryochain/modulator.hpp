#pragma once

// Electro-optic modulator: first-order band-limited electrical response and
// an interferometric sin^2 transmission curve.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "filtering.hpp"
#include "waveform.hpp"

namespace cryochain {

struct EoModulator {
    double v_pi = 3.8;            // half-wave (switching) voltage at 4 K
    double bandwidth_hz = 230e6;  // -3 dB electrical bandwidth
    double insertion_loss_db = 0.0;
    double bias_point_v = 0.0;    // zero-drive operating point
};

inline void validate_modulator(const EoModulator& m) {
    if (!(m.v_pi > 0.0)) throw std::invalid_argument("EoModulator: v_pi must be positive");
    if (!(m.bandwidth_hz > 0.0)) throw std::invalid_argument("EoModulator: bandwidth must be positive");
    if (!(m.insertion_loss_db >= 0.0))
        throw std::invalid_argument("EoModulator: insertion loss must be non-negative");
}

// Electrical drive after the modulator's bandwidth limit. A 0-100% step
// through the first-order pole has 10-90% risetime ln(9)/(2*pi*B) = 0.35/B.
inline Waveform drive_response(const EoModulator& m, const Waveform& drive) {
    validate_modulator(m);
    if (!(drive.sample_rate_hz >= 10.0 * m.bandwidth_hz))
        throw std::invalid_argument("drive_response: sample rate must be >= 10x bandwidth");
    return lowpass_first_order(drive, m.bandwidth_hz);
}

inline double step_risetime_10_90(const EoModulator& m) {
    return std::log(9.0) / (2.0 * std::numbers::pi * m.bandwidth_hz);
}

// Interferometric transmission at drive voltage v.
inline double transmission(const EoModulator& m, double v, bool include_insertion_loss = false) {
    validate_modulator(m);
    const double s = std::sin(std::numbers::pi * (v - m.bias_point_v) / (2.0 * m.v_pi));
    double t = s * s;
    if (include_insertion_loss) t *= std::pow(10.0, -m.insertion_loss_db / 10.0);
    return t;
}

// Optical transmission trace for a drive waveform (bandwidth limit applied).
inline Waveform transmission_waveform(const EoModulator& m, const Waveform& drive) {
    Waveform filtered = drive_response(m, drive);
    for (double& s : filtered.samples) {
        const double x = std::sin(std::numbers::pi * (s - m.bias_point_v) / (2.0 * m.v_pi));
        s = x * x;
    }
    return filtered;
}

// 10*log10(T_max/T_min) over the filtered drive, capped at 60 dB (T_min can
// be exactly 0 at the operating point).
inline double extinction_ratio_db(const EoModulator& m, const Waveform& drive) {
    validate_modulator(m);
    if (drive.samples.empty()) throw std::invalid_argument("extinction_ratio_db: empty drive");
    if (max_value(drive) - min_value(drive) < 1e-12)
        throw std::invalid_argument("extinction_ratio_db: drive must have high and low plateaus");
    const Waveform t = transmission_waveform(m, drive);
    const double t_max = max_value(t);
    const double t_min = min_value(t);
    if (!(t_max > 0.0)) return 0.0;
    const double cap = 60.0;
    if (t_min <= t_max * 1e-6) return cap;
    return std::min(cap, 10.0 * std::log10(t_max / t_min));
}

} // namespace cryochain
