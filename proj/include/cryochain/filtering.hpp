#pragma once

// LTI filtering of sampled waveforms.
//
// Stages are applied in the frequency domain: the padded signal is
// transformed, multiplied by the exact continuous-time response at each bin
// frequency, and transformed back. This realization matches the analytic
// magnitude response exactly at every bin (a bilinear-transform IIR would
// warp by >2% near fs/10, violating the accuracy contract).
//
// Circular-convolution wrap-around is suppressed by edge-hold padding: the
// record is extended on both sides with its resting level for at least
// five time constants of the slowest corner before transforming, and the
// original span is sliced back out. The resting level is the mean of a short
// boundary window (not the bare end sample, which for a noisy record is a
// single noise draw). The filter therefore sees a constant
// pre-history equal to the boundary mean. Within a few slowest-corner time
// constants of the record ends the output reflects that assumed pre-history
// rather than any true (unrecorded) past, so edge neighbourhoods are
// realization-dependent; properties are asserted on the settled interior.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bandpass.hpp"
#include "fft.hpp"
#include "waveform.hpp"

namespace cryochain {

// Apply an arbitrary frequency response H(f), f in Hz (H must be defined at
// f = 0). settle_time_s controls the edge-hold padding length.
template <typename ResponseFn>
Waveform apply_frequency_response(const Waveform& w, ResponseFn&& response, double settle_time_s) {
    if (w.samples.empty())
        throw std::invalid_argument("apply_frequency_response: empty waveform");
    if (!(w.sample_rate_hz > 0.0))
        throw std::invalid_argument("apply_frequency_response: invalid sample rate");

    const std::size_t n = w.size();
    const std::size_t pad = static_cast<std::size_t>(std::ceil(settle_time_s * w.sample_rate_hz));
    const std::size_t total = next_pow2(n + 2 * pad);
    const std::size_t front = pad + (total - n - 2 * pad) / 2;

    // The pad level estimates the record's resting level. Averaging a short
    // boundary window instead of holding the single end sample matters for
    // noisy records: one noise draw held for a long pad is a DC step that a
    // slow high-pass corner would answer with a gain-times-sigma transient
    // reaching deep into the record.
    const std::size_t k = std::min(n, std::max<std::size_t>(1, pad / 8));
    double front_level = 0.0, back_level = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        front_level += w.samples[i];
        back_level += w.samples[n - 1 - i];
    }
    front_level /= static_cast<double>(k);
    back_level /= static_cast<double>(k);

    std::vector<double> x(total);
    for (std::size_t i = 0; i < front; ++i) x[i] = front_level;
    for (std::size_t i = 0; i < n; ++i) x[front + i] = w.samples[i];
    for (std::size_t i = front + n; i < total; ++i) x[i] = back_level;

    auto spec = rfft(x);
    const double df = w.sample_rate_hz / static_cast<double>(total);
    for (std::size_t k = 0; k < spec.size(); ++k)
        spec[k] *= response(static_cast<double>(k) * df);

    // The DC and Nyquist bins of a real record are self-conjugate, so a
    // complex multiplier on them cannot be realized: it would be silently
    // projected onto the real axis, and that projection does not commute
    // with cascading (Re(Ha)*Re(Hb) != Re(Ha*Hb)). Keep DC's real part
    // (every shipped response is real at f = 0) and drop the Nyquist bin
    // outright — its phase response is unrepresentable at two samples per
    // cycle — so that applying a composite response equals applying its
    // factors in sequence, bin for bin.
    spec.front() = std::complex<double>(spec.front().real(), 0.0);
    if (total % 2 == 0) spec.back() = std::complex<double>(0.0, 0.0);

    auto y = irfft(spec, total);
    Waveform out = w;
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = y[front + i];
    return out;
}

inline double settle_time_for_corner(double f_corner_hz) {
    return 5.0 / (2.0 * std::numbers::pi * f_corner_hz);
}

// First-order band-pass stage applied to a waveform.
inline Waveform apply_linear_stage(const Waveform& w, const BandPassStage& s) {
    validate_stage(s);
    if (!(s.f_high_hz < w.sample_rate_hz / 2.0))
        throw std::invalid_argument("apply_linear_stage: upper corner at or above Nyquist");
    return apply_frequency_response(
        w,
        [&s](double f) {
            return f <= 0.0 ? std::complex<double>(0.0, 0.0) : response_at(s, f);
        },
        settle_time_for_corner(s.f_low_hz));
}

// Whole cascade in a single pass. Sequential stage application produces the
// same interior samples (the per-bin multipliers compose exactly); only the
// edge neighbourhoods differ, because each pass re-derives its edge-hold
// pre-history from the record it is given.
inline Waveform apply_cascade(const Waveform& w, const StageCascade& c) {
    if (c.stages.empty()) throw std::invalid_argument("apply_cascade: empty cascade");
    double slowest = c.stages.front().f_low_hz;
    for (const auto& s : c.stages) {
        validate_stage(s);
        if (!(s.f_high_hz < w.sample_rate_hz / 2.0))
            throw std::invalid_argument("apply_cascade: upper corner at or above Nyquist");
        slowest = std::min(slowest, s.f_low_hz);
    }
    return apply_frequency_response(
        w,
        [&c](double f) {
            return f <= 0.0 ? std::complex<double>(0.0, 0.0) : response_at(c, f);
        },
        settle_time_for_corner(slowest));
}

// First-order low-pass (unity DC gain).
inline Waveform lowpass_first_order(const Waveform& w, double cutoff_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < w.sample_rate_hz / 2.0))
        throw std::invalid_argument("lowpass_first_order: cutoff must lie in (0, Nyquist)");
    return apply_frequency_response(
        w,
        [cutoff_hz](double f) {
            return 1.0 / std::complex<double>(1.0, f / cutoff_hz);
        },
        settle_time_for_corner(cutoff_hz));
}

// Second-order unity-DC low-pass; underdamped (zeta < 1/sqrt(2)) produces
// the ringing/overswing used by the laser-link edge model.
inline Waveform lowpass_second_order(const Waveform& w, double f0_hz, double zeta) {
    if (!(f0_hz > 0.0) || !(f0_hz < w.sample_rate_hz / 2.0))
        throw std::invalid_argument("lowpass_second_order: f0 must lie in (0, Nyquist)");
    if (!(zeta > 0.0)) throw std::invalid_argument("lowpass_second_order: zeta must be positive");
    const double settle = 5.0 / (2.0 * std::numbers::pi * f0_hz * zeta);
    return apply_frequency_response(
        w,
        [f0_hz, zeta](double f) {
            const double r = f / f0_hz;
            return 1.0 / std::complex<double>(1.0 - r * r, 2.0 * zeta * r);
        },
        settle);
}

} // namespace cryochain
