#pragma once

#include "notchset/types.hpp"

namespace notchset {

// Thin FFTW3 front end. Plans are FFTW_ESTIMATE (deterministic plan choice)
// and cached per size; planning is mutex-guarded, execution is thread-safe.

// In-place forward DFT, X_k = sum_n x_n e^{-j 2 pi k n / N}. Unnormalized.
void fft_forward(cvec& data);

// In-place inverse DFT including the 1/N factor.
void fft_inverse(cvec& data);

// Out-of-place forward DFT of `in` zero-padded to nfft.
cvec fft_forward_padded(const cvec& in, std::size_t nfft);

// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace notchset
