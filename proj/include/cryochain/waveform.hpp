#pragma once

// Sampled analog signals. A Waveform is a uniformly sampled voltage record:
// sample i sits at t0 + i / sample_rate. Arithmetic between waveforms
// requires identical sample rate, start time and length.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryochain {

struct Waveform {
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;
    std::vector<double> samples;

    std::size_t size() const { return samples.size(); }
    double dt() const { return 1.0 / sample_rate_hz; }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / sample_rate_hz; }
    double end_time_s() const { return time_at(samples.size()); }

    double& operator[](std::size_t i) { return samples[i]; }
    double operator[](std::size_t i) const { return samples[i]; }
};

// Default acquisition rate used throughout: 10 GSa/s.
inline constexpr double kDefaultSampleRate = 1e10;

inline Waveform make_waveform(double duration_s, double sample_rate_hz = kDefaultSampleRate,
                              double fill_v = 0.0) {
    if (!(duration_s > 0.0))
        throw std::invalid_argument("make_waveform: duration must be positive");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("make_waveform: sample rate must be positive");
    Waveform w;
    w.sample_rate_hz = sample_rate_hz;
    const double n = std::ceil(duration_s * sample_rate_hz - 1e-9);
    w.samples.assign(static_cast<std::size_t>(n < 1.0 ? 1.0 : n), fill_v);
    return w;
}

inline void require_compatible(const Waveform& a, const Waveform& b, const char* what) {
    if (a.sample_rate_hz != b.sample_rate_hz || a.t0_s != b.t0_s || a.size() != b.size())
        throw std::invalid_argument(std::string(what) +
                                    ": waveforms must share sample rate, start time and length");
}

inline Waveform add(const Waveform& a, const Waveform& b) {
    require_compatible(a, b, "add");
    Waveform out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += b.samples[i];
    return out;
}

inline void add_in_place(Waveform& acc, const Waveform& w) {
    require_compatible(acc, w, "add_in_place");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.samples[i] += w.samples[i];
}

inline Waveform scaled(const Waveform& w, double factor) {
    Waveform out = w;
    for (double& s : out.samples) s *= factor;
    return out;
}

inline Waveform negated(const Waveform& w) { return scaled(w, -1.0); }

inline double max_value(const Waveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("max_value: empty waveform");
    return *std::max_element(w.samples.begin(), w.samples.end());
}

inline double min_value(const Waveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("min_value: empty waveform");
    return *std::min_element(w.samples.begin(), w.samples.end());
}

// Largest absolute excursion; sign of the extreme sample is preserved.
inline double peak_value(const Waveform& w) {
    const double hi = max_value(w);
    const double lo = min_value(w);
    return std::abs(hi) >= std::abs(lo) ? hi : lo;
}

inline double rms(const Waveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("rms: empty waveform");
    double acc = 0.0;
    for (double s : w.samples) acc += s * s;
    return std::sqrt(acc / static_cast<double>(w.size()));
}

inline double mean(const Waveform& w) {
    if (w.samples.empty()) throw std::invalid_argument("mean: empty waveform");
    double acc = 0.0;
    for (double s : w.samples) acc += s;
    return acc / static_cast<double>(w.size());
}

// Linearly interpolated value at an arbitrary time inside the record.
inline double value_at(const Waveform& w, double t) {
    if (w.samples.empty()) throw std::invalid_argument("value_at: empty waveform");
    const double x = (t - w.t0_s) * w.sample_rate_hz;
    if (x <= 0.0) return w.samples.front();
    const double last = static_cast<double>(w.size() - 1);
    if (x >= last) return w.samples.back();
    const std::size_t i = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(i);
    return w.samples[i] + frac * (w.samples[i + 1] - w.samples[i]);
}

} // namespace cryochain
