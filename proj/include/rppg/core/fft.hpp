#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace rppg::core {

// In-place iterative radix-2 FFT. data.size() must be a power of two.
// inverse=true applies the conjugate transform and divides by the length.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Smallest power of two >= n (n = 0 gives 1).
std::size_t next_pow2(std::size_t n);

}  // namespace rppg::core
