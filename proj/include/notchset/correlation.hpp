#pragma once

#include <string>

#include "notchset/seqset.hpp"
#include "notchset/types.hpp"

namespace notchset {

enum class CorrKind { Aperiodic, Periodic };

// r(l) for lags -(N-1) .. N-1. Aperiodic lags sum N-|l| terms; periodic lags
// wrap the index and always sum N terms (so |r| is N-periodic in l).
struct CorrelationProfile {
    int n = 0;
    CorrKind kind = CorrKind::Aperiodic;
    int pair_m = 0;
    int pair_mp = 0;
    cvec values;  // index l + (n-1)

    const cplx& at_lag(int l) const { return values[static_cast<std::size_t>(l + n - 1)]; }
    int min_lag() const { return -(n - 1); }
    int max_lag() const { return n - 1; }
};

// Direct O(N^2) evaluation of r_{x,y}(l) = sum_n x_n y*_{n+l}. This is the
// oracle path; see xcorr_fft for the production path.
CorrelationProfile xcorr(const cvec& x, const cvec& y, CorrKind kind = CorrKind::Aperiodic);

// Same result via zero-padded FFTs (aperiodic) or a length-N cyclic FFT
// (periodic).
CorrelationProfile xcorr_fft(const cvec& x, const cvec& y, CorrKind kind = CorrKind::Aperiodic);

struct IcclResult {
    double raw = 0.0;     // g~_c: sum over ordered pairs and all lags of |r|^2
    double scaled = 0.0;  // g_c = raw / (2MN)^2
};

IcclResult iccl(const SequenceSet& set);

// ISL machinery: isl = autocorrelation sidelobe energy + iccl raw.
double isl(const SequenceSet& set, CorrKind kind = CorrKind::Aperiodic);
double isl_bound(int n_seq, int n_samples);  // N^2 M (M-1)

// ISLR relative to the total mainlobe energy M N^2; bound gap uses the same
// normalization, so bound_db = 10 log10(M-1).
double islr_db(const SequenceSet& set, CorrKind kind = CorrKind::Aperiodic);
double isl_bound_db(int n_seq);

struct SetCorrelationSummary {
    double iccl_raw = 0.0;
    double iccl_scaled = 0.0;
    double isl = 0.0;
    double islr_db = 0.0;
    double bound_db = 0.0;  // ISLR floor for the set size, same normalization
};

SetCorrelationSummary correlation_summary(const SequenceSet& set);

// Largest |r_{m,m'}(l)| over all pairs m != m' and all lags, in dB relative
// to the mainlobe value N.
double peak_cross_correlation_db(const SequenceSet& set);

// CSV rows lag,abs_db with 20 log10(|r|/N) normalization (mainlobe = 0 dB).
void save_correlation_csv(const CorrelationProfile& p, const std::string& path);

}  // namespace notchset
