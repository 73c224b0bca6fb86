#pragma once

#include <complex>

namespace pnbound::detail {

// Unnormalized in-place DFT of length n. sign = -1 computes sum x_n e^{-j2pi nk/n},
// sign = +1 the conjugate kernel. Thread-safe: plans are created once under a lock
// and executed with the new-array interface.
void dft_inplace(std::complex<double>* data, int n, int sign);

} // namespace pnbound::detail
