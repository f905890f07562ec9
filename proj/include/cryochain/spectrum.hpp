#pragma once

// One-sided amplitude spectra.
//
// Scaling convention (fixed): for a real signal of N samples,
//   magnitude[0]   = |X_0| / N                     (DC)
//   magnitude[k]   = 2 |X_k| / N,  0 < k < N/2     (interior bins)
//   magnitude[N/2] = |X_{N/2}| / N                 (Nyquist, N even)
// so an on-bin sine of amplitude A reports A at its bin, and Parseval holds
// as sum(x^2)/N = m_0^2 + sum_k m_k^2/2 (+ Nyquist term).

#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "waveform.hpp"

namespace cryochain {

struct Spectrum {
    enum class Kind { amplitude, power_density };
    std::vector<double> freqs_hz;
    std::vector<double> magnitude;
    Kind kind = Kind::amplitude;
};

inline Spectrum spectrum_of(const Waveform& w) {
    if (w.size() < 2) throw std::invalid_argument("spectrum_of: need at least 2 samples");
    const std::size_t n = w.size();
    auto spec = rfft(w.samples);

    Spectrum out;
    out.kind = Spectrum::Kind::amplitude;
    out.freqs_hz.resize(spec.size());
    out.magnitude.resize(spec.size());
    const double df = w.sample_rate_hz / static_cast<double>(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        out.freqs_hz[k] = static_cast<double>(k) * df;
        double m = std::abs(spec[k]) / static_cast<double>(n);
        const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
        if (interior) m *= 2.0;
        out.magnitude[k] = m;
    }
    return out;
}

// Index of the largest-magnitude bin at or above min_freq_hz.
inline std::size_t dominant_bin(const Spectrum& s, double min_freq_hz = 0.0) {
    if (s.magnitude.empty()) throw std::invalid_argument("dominant_bin: empty spectrum");
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < s.magnitude.size(); ++k) {
        if (s.freqs_hz[k] < min_freq_hz) continue;
        if (!found || s.magnitude[k] > s.magnitude[best]) {
            best = k;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("dominant_bin: no bins above min_freq");
    return best;
}

} // namespace cryochain
