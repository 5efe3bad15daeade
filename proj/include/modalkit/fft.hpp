#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "modalkit/errors.hpp"

namespace modalkit::detail {

/// In-place iterative radix-2 FFT. Length must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error(errc::invalid_input, "fft length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// One-sided spectrum of a real segment, zero-padded to nfft (power of two).
/// Returns nfft/2 + 1 bins.
inline std::vector<std::complex<double>> real_spectrum(const std::vector<double>& segment,
                                                       std::size_t nfft) {
    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    for (std::size_t i = 0; i < segment.size() && i < nfft; ++i) buf[i] = segment[i];
    fft_radix2(buf);
    buf.resize(nfft / 2 + 1);
    return buf;
}

} // namespace modalkit::detail
