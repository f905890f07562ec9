#pragma once

// Noise injection. All functions are pure given their seed.

#include <cmath>
#include <stdexcept>

#include "fft.hpp"
#include "rng.hpp"
#include "waveform.hpp"

namespace cryochain {

inline Waveform add_gaussian_noise(const Waveform& w, double sigma_v, std::uint64_t seed) {
    if (!(sigma_v >= 0.0))
        throw std::invalid_argument("add_gaussian_noise: sigma must be non-negative");
    Waveform out = w;
    if (sigma_v == 0.0) return out;
    Rng rng(seed);
    for (double& s : out.samples) s += sigma_v * rng.gaussian();
    return out;
}

inline Waveform add_gaussian_noise(const Waveform& w, double sigma_v, Rng& rng) {
    if (!(sigma_v >= 0.0))
        throw std::invalid_argument("add_gaussian_noise: sigma must be non-negative");
    Waveform out = w;
    if (sigma_v == 0.0) return out;
    for (double& s : out.samples) s += sigma_v * rng.gaussian();
    return out;
}

// Gaussian noise concentrated in a spectral band: white noise shaped in the
// frequency domain by a Gaussian envelope exp(-(f-center)^2 / (2*bw^2)) and
// rescaled to the requested total RMS. Deterministic under the rng state.
inline Waveform band_noise(double duration_s, double sample_rate_hz, double center_hz,
                           double bandwidth_hz, double sigma_v, Rng& rng) {
    if (!(sigma_v >= 0.0)) throw std::invalid_argument("band_noise: sigma must be non-negative");
    if (!(center_hz >= 0.0) || !(bandwidth_hz > 0.0))
        throw std::invalid_argument("band_noise: bad band parameters");
    Waveform w = make_waveform(duration_s, sample_rate_hz, 0.0);
    if (sigma_v == 0.0) return w;

    const std::size_t n = next_pow2(w.size());
    std::vector<double> white(n);
    for (double& s : white) s = rng.gaussian();

    auto spec = rfft(white);
    const double df = sample_rate_hz / static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = static_cast<double>(k) * df;
        const double d = (f - center_hz) / bandwidth_hz;
        spec[k] *= std::exp(-0.5 * d * d);
    }
    auto shaped = irfft(spec, n);

    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += shaped[i] * shaped[i];
    const double rms = std::sqrt(acc / static_cast<double>(w.size()));
    const double scale = rms > 0.0 ? sigma_v / rms : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) w.samples[i] = shaped[i] * scale;
    return w;
}

} // namespace cryochain
