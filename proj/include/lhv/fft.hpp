#pragma once
// Minimal in-place radix-2 FFT, enough for the tomography ramp filter.

#include <complex>
#include <cstddef>
#include <vector>

namespace lhv {

// In-place complex FFT. Size must be a power of two. The inverse transform
// includes the 1/n normalization.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

std::size_t next_pow2(std::size_t n) noexcept;

}  // namespace lhv
