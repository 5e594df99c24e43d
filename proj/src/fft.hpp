#pragma once

#include <complex>
#include <vector>

namespace shakekey::detail {

/// In-place radix-2 Cooley-Tukey FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

}  // namespace shakekey::detail
