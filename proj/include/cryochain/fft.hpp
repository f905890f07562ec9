#pragma once

// Thin facade over FFTW3 (double precision, real transforms).
//
// Plans are cached per transform length together with their aligned buffers
// and reused; a global mutex serializes plan creation and execution, which
// is fine here (the library is used single-threaded, and FFTW planning is
// not thread-safe anyway). rfft is unnormalized, irfft divides by n, so
// irfft(rfft(x), n) == x.

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace cryochain {

namespace detail {

struct FftPlan {
    std::size_t n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    explicit FftPlan(std::size_t length) : n(length) {
        real = fftw_alloc_real(n);
        cplx = fftw_alloc_complex(n / 2 + 1);
        if (!real || !cplx) throw std::bad_alloc();
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE);
    }
    ~FftPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (real) fftw_free(real);
        if (cplx) fftw_free(cplx);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
};

inline std::mutex& fft_mutex() {
    static std::mutex m;
    return m;
}

inline FftPlan& plan_for(std::size_t n) {
    static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
    return *it->second;
}

} // namespace detail

// Forward real FFT; returns n/2+1 complex bins (unnormalized).
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("rfft: need at least 2 samples");
    std::lock_guard<std::mutex> lock(detail::fft_mutex());
    auto& p = detail::plan_for(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p.real[i] = x[i];
    fftw_execute(p.fwd);
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = {p.cplx[k][0], p.cplx[k][1]};
    return out;
}

// Inverse of rfft for a length-n real signal (normalized by 1/n).
inline std::vector<double> irfft(const std::vector<std::complex<double>>& spec, std::size_t n) {
    if (n < 2 || spec.size() != n / 2 + 1)
        throw std::invalid_argument("irfft: spectrum length does not match n");
    std::lock_guard<std::mutex> lock(detail::fft_mutex());
    auto& p = detail::plan_for(n);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        p.cplx[k][0] = spec[k].real();
        p.cplx[k][1] = spec[k].imag();
    }
    fftw_execute(p.inv);
    std::vector<double> out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = p.real[i] * scale;
    return out;
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace cryochain
