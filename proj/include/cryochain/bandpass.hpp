#pragma once

// Linear two-port stage models for the amplifier chain.
//
// A stage is a first-order band-pass envelope: high-pass at f_low cascaded
// with low-pass at f_high, scaled by the midband gain, optionally inverting.
// S11/S12 are carried as scalar envelope metadata (the hardware datapoints
// are summary values, not full measured 2-ports). added_noise_sigma is the
// output-referred white noise the stage contributes.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cryochain {

struct BandPassStage {
    double gain_db = 0.0;
    double f_low_hz = 0.0;
    double f_high_hz = 0.0;
    bool inverting = false;
    double power_dissipation_w = 0.0;
    double input_return_loss_db = 0.0;   // representative |S11| (dB, negative)
    double reverse_isolation_db = 0.0;   // representative |S12| (dB, negative)
    double added_noise_sigma_v = 0.0;    // output-referred RMS noise
};

inline void validate_stage(const BandPassStage& s) {
    if (!(s.f_low_hz > 0.0) || !(s.f_high_hz > s.f_low_hz))
        throw std::invalid_argument("BandPassStage: requires 0 < f_low < f_high");
    if (!(s.power_dissipation_w >= 0.0))
        throw std::invalid_argument("BandPassStage: negative power dissipation");
    if (!std::isfinite(s.gain_db))
        throw std::invalid_argument("BandPassStage: gain must be finite");
}

enum class PowerMode { high, low };

// The cryogenic first-stage amplifier in its two supply configurations.
inline BandPassStage first_stage(PowerMode mode) {
    BandPassStage s;
    s.f_low_hz = 6e6;
    s.f_high_hz = 600e6;
    s.inverting = true;
    s.reverse_isolation_db = -30.0;
    if (mode == PowerMode::high) {
        s.gain_db = 20.0;
        s.power_dissipation_w = 1.3e-3;
        s.input_return_loss_db = -10.0;
        s.added_noise_sigma_v = 13e-6;
    } else {
        s.gain_db = 15.0;
        s.power_dissipation_w = 0.3e-3;
        s.input_return_loss_db = -6.0;  // degraded matching in the starved mode
        s.added_noise_sigma_v = 18e-6;
    }
    return s;
}

// Room-temperature follow-up amplifier. Its 200 MHz lower corner acts as a
// high-pass that favours the fast multi-photon edges.
inline BandPassStage commercial_stage() {
    BandPassStage s;
    s.gain_db = 40.0;
    s.f_low_hz = 200e6;
    s.f_high_hz = 3e9;
    s.inverting = false;
    s.power_dissipation_w = 0.0;  // room temperature: not on the cryo budget
    s.input_return_loss_db = -15.0;
    s.reverse_isolation_db = -40.0;
    s.added_noise_sigma_v = 260e-6;
    return s;
}

// Complex gain of the stage at frequency f.
inline std::complex<double> response_at(const BandPassStage& s, double f_hz) {
    validate_stage(s);
    if (!(f_hz > 0.0)) throw std::invalid_argument("response_at: frequency must be positive");
    const double g = std::pow(10.0, s.gain_db / 20.0);
    const std::complex<double> jw_low(0.0, f_hz / s.f_low_hz);
    const std::complex<double> jw_high(0.0, f_hz / s.f_high_hz);
    std::complex<double> h = g * (jw_low / (1.0 + jw_low)) / (1.0 + jw_high);
    if (s.inverting) h = -h;
    return h;
}

// Ordered cascade of stages. Response is the product of member responses;
// power adds; inversion parity is the XOR of member flags.
struct StageCascade {
    std::vector<BandPassStage> stages;

    double power_dissipation_w() const {
        double total = 0.0;
        for (const auto& s : stages) total += s.power_dissipation_w;
        return total;
    }
    bool inverting() const {
        bool inv = false;
        for (const auto& s : stages) inv ^= s.inverting;
        return inv;
    }
    double gain_db() const {
        double total = 0.0;
        for (const auto& s : stages) total += s.gain_db;
        return total;
    }
};

inline StageCascade cascade(const std::vector<BandPassStage>& stages) {
    if (stages.empty()) throw std::invalid_argument("cascade: need at least one stage");
    for (const auto& s : stages) validate_stage(s);
    return StageCascade{stages};
}

inline std::complex<double> response_at(const StageCascade& c, double f_hz) {
    if (c.stages.empty()) throw std::invalid_argument("response_at: empty cascade");
    std::complex<double> h(1.0, 0.0);
    for (const auto& s : c.stages) h *= response_at(s, f_hz);
    return h;
}

} // namespace cryochain
