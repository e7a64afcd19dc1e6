#pragma once

#include <vector>

#include "notchset/types.hpp"

// Hot inner loops, each in two builds: a serial *_ref reference (direct sums,
// the test oracle) and the production version (FFT-backed and/or OpenMP
// parallel). Parallel reductions accumulate fixed-order per-task partials, so
// results do not depend on the thread count.

namespace notchset::kernels {

// Aperiodic cross-correlation r(l) = sum_n x[n] y*[n+l], out[l + n - 1] for
// lags -(n-1)..n-1.
void xcorr_aperiodic_ref(const cplx* x, const cplx* y, int n, cplx* out);
void xcorr_aperiodic_fft(const cplx* x, const cplx* y, int n, cplx* out);

// Periodic variant, cyclic index n+l mod N, same lag layout.
void xcorr_periodic_ref(const cplx* x, const cplx* y, int n, cplx* out);
void xcorr_periodic_fft(const cplx* x, const cplx* y, int n, cplx* out);

// Total cross energy over ordered pairs: sum_{m != m'} sum_l |r_{m,m'}(l)|^2
// for M equal-length rows stored back to back.
double cross_energy_ref(const cplx* rows, int n_rows, int n);
double cross_energy(const cplx* rows, int n_rows, int n);

// Quadratic form sum_m x_m^H G x_m for a circulant G given by its generating
// column gen (entry(n,l) = gen[(n-l) mod N]).
double quad_form_set_ref(const cplx* rows, int n_rows, int n, const cplx* gen);
double quad_form_set(const cplx* rows, int n_rows, int n, const cplx* gen);

// Correlate each of n_streams fast-time streams (length w, zero-padded
// beyond) against each of n_filters length-n filters:
//   out[s][f][tau] = sum_k stream_s[tau + k] filter_f[k]^*, tau = 0..w-1.
// Streams and filters are stored back to back; out is [s][f][tau] contiguous.
void matched_filter_bank_ref(const cplx* streams, int n_streams, int w, const cplx* filters,
                             int n_filters, int n, cplx* out);
void matched_filter_bank(const cplx* streams, int n_streams, int w, const cplx* filters,
                         int n_filters, int n, cplx* out);

// DFT across the pulse axis for every range cell: in[p][cell] (n_pulses rows
// of n_cells), out[b][cell] = sum_p in[p][cell] e^{-j 2 pi p b / P}, with an
// optional slow-time window applied over p.
void slow_time_dft_ref(const cplx* in, int n_pulses, int n_cells, const double* window,
                       cplx* out);
void slow_time_dft(const cplx* in, int n_pulses, int n_cells, const double* window, cplx* out);

// Multitone synthesis: accumulate sum_k amps[k] e^{j 2 pi freqs[k] t} for
// t = t0..t0+n-1 into out (freqs in cycles/sample; initial phases ride in
// the complex amps).
void mix_tones_ref(const double* freqs, const cplx* amps, int n_tones, long t0, int n,
                   cplx* out);
void mix_tones(const double* freqs, const cplx* amps, int n_tones, long t0, int n, cplx* out);

}  // namespace notchset::kernels
