#pragma once

#include <string>
#include <vector>

#include "notchset/seqset.hpp"
#include "notchset/types.hpp"

namespace notchset {

// One normalized stopband [lo, hi], 0 <= lo < hi <= 1.
struct Stopband {
    double lo = 0.0;
    double hi = 0.0;
};

// Stopbands resolved onto the length-N DFT grid: U holds the undesired bin
// indices, V its complement. degenerate is set when U swallowed every bin.
struct SpectralMask {
    int n_bins = 0;
    std::vector<Stopband> stopbands;
    std::vector<int> undesired;  // U, sorted
    std::vector<int> desired;    // V, sorted

    bool degenerate() const { return desired.empty(); }
};

// f_k: entry n equals e^{j 2 pi k n / N}.
cvec dft_vector(int k, int n_bins);

// Rounds each stopband to inclusive bin ranges [round(N*lo), round(N*hi)]
// (half rounds away from zero; the upper edge clamps to N-1) and unions them
// into U. Overlapping stopband interiors are a parameter error.
SpectralMask band_to_bins(const std::vector<Stopband>& stopbands, int n_bins);

enum class BinSelect { Undesired, Desired };

// F_U (or F_V) = sum over the selected bins of f_k f_k^H. The sum of DFT
// outer products is circulant, so only the generating column is stored:
// entry(n, l) = gen[(n - l) mod N].
struct BinGram {
    int n_bins = 0;
    BinSelect source = BinSelect::Undesired;
    cvec gen;  // gen[d] = sum_{k in bins} e^{j 2 pi k d / N}

    cplx entry(int n, int l) const {
        int d = n - l;
        if (d < 0) d += n_bins;
        return gen[d];
    }
    // Dense N x N materialization, for callers that want the matrix itself.
    std::vector<cvec> dense() const;
};

BinGram bin_gram(const SpectralMask& mask, BinSelect which);

// SILR evaluation; num/den are the stopband and passband energies g_a, g_b.
struct SilrResult {
    double ratio = 0.0;
    double num = 0.0;
    double den = 0.0;
};

SilrResult silr(const SequenceSet& set, const SpectralMask& mask);

enum class Window { Rectangular, Hann, Hamming, Blackman };

// Window samples w_n, n = 0..n-1 (periodic forms are not needed here).
dvec make_window(Window w, int n);

// Zero-padded windowed periodogram in dB, normalized so an unwindowed
// unit-modulus tone on a bin peaks at 0 dB. nfft must be >= the input length.
dvec psd(const cvec& x, int nfft, Window w = Window::Rectangular);

// PSD rows as CSV: bin,freq_norm,db.
void save_psd_csv(const dvec& psd_db, const std::string& path);

// Mask file (JSON): {"stopbands": [[lo, hi], ...]}.
void save_mask_file(const std::vector<Stopband>& stopbands, const std::string& path);
std::vector<Stopband> load_mask_file(const std::string& path);

}  // namespace notchset
