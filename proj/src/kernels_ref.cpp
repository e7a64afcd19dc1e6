// Serial reference kernels. Straight transcriptions of the defining sums;
// kept unoptimized on purpose so the production kernels have an independent
// oracle to agree with.

#include <cmath>

#include "notchset/kernels.hpp"

namespace notchset::kernels {

void xcorr_aperiodic_ref(const cplx* x, const cplx* y, int n, cplx* out) {
    for (int l = -(n - 1); l <= n - 1; ++l) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            const int j = i + l;
            if (j >= 0 && j < n) acc += x[i] * std::conj(y[j]);
        }
        out[l + n - 1] = acc;
    }
}

void xcorr_periodic_ref(const cplx* x, const cplx* y, int n, cplx* out) {
    for (int l = -(n - 1); l <= n - 1; ++l) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            int j = (i + l) % n;
            if (j < 0) j += n;
            acc += x[i] * std::conj(y[j]);
        }
        out[l + n - 1] = acc;
    }
}

double cross_energy_ref(const cplx* rows, int n_rows, int n) {
    std::vector<cplx> prof(2 * n - 1);
    double total = 0.0;
    for (int m = 0; m < n_rows; ++m) {
        for (int mp = 0; mp < n_rows; ++mp) {
            if (mp == m) continue;
            xcorr_aperiodic_ref(rows + static_cast<std::size_t>(m) * n,
                                rows + static_cast<std::size_t>(mp) * n, n, prof.data());
            for (const auto& v : prof) total += std::norm(v);
        }
    }
    return total;
}

double quad_form_set_ref(const cplx* rows, int n_rows, int n, const cplx* gen) {
    double total = 0.0;
    for (int m = 0; m < n_rows; ++m) {
        const cplx* x = rows + static_cast<std::size_t>(m) * n;
        cplx acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int l = 0; l < n; ++l) {
                int d = i - l;
                if (d < 0) d += n;
                acc += std::conj(x[i]) * gen[d] * x[l];
            }
        }
        total += acc.real();
    }
    return total;
}

void matched_filter_bank_ref(const cplx* streams, int n_streams, int w, const cplx* filters,
                             int n_filters, int n, cplx* out) {
    for (int s = 0; s < n_streams; ++s) {
        const cplx* stream = streams + static_cast<std::size_t>(s) * w;
        for (int f = 0; f < n_filters; ++f) {
            const cplx* filt = filters + static_cast<std::size_t>(f) * n;
            cplx* dst = out + (static_cast<std::size_t>(s) * n_filters + f) * w;
            for (int tau = 0; tau < w; ++tau) {
                cplx acc(0.0, 0.0);
                const int kmax = std::min(n, w - tau);
                for (int k = 0; k < kmax; ++k) acc += stream[tau + k] * std::conj(filt[k]);
                dst[tau] = acc;
            }
        }
    }
}

void slow_time_dft_ref(const cplx* in, int n_pulses, int n_cells, const double* window,
                       cplx* out) {
    for (int b = 0; b < n_pulses; ++b) {
        for (int c = 0; c < n_cells; ++c) {
            cplx acc(0.0, 0.0);
            for (int p = 0; p < n_pulses; ++p) {
                const double wgt = window ? window[p] : 1.0;
                const cplx ph = std::polar(1.0, -kTwoPi * p * b / n_pulses);
                acc += wgt * in[static_cast<std::size_t>(p) * n_cells + c] * ph;
            }
            out[static_cast<std::size_t>(b) * n_cells + c] = acc;
        }
    }
}

void mix_tones_ref(const double* freqs, const cplx* amps, int n_tones, long t0, int n,
                   cplx* out) {
    for (int t = 0; t < n; ++t) {
        cplx acc(0.0, 0.0);
        for (int k = 0; k < n_tones; ++k)
            acc += amps[k] * std::polar(1.0, kTwoPi * freqs[k] * static_cast<double>(t0 + t));
        out[t] += acc;
    }
}

}  // namespace notchset::kernels
