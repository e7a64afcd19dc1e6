// Production kernels: FFT-backed where the algebra allows it, OpenMP across
// independent work items. Every parallel reduction stores per-item partials
// and sums them serially in index order, so the totals are identical for any
// thread count.

#include <cmath>

#include "notchset/fft.hpp"
#include "notchset/kernels.hpp"

namespace notchset::kernels {

namespace {

// Circular cross-correlation c[k] = sum_i x[i] y*[(i-k) mod nf] via FFTs.
cvec circular_xcorr(const cvec& x, const cvec& y) {
    cvec cx = x;
    cvec cy = y;
    fft_forward(cx);
    fft_forward(cy);
    for (std::size_t i = 0; i < cx.size(); ++i) cx[i] *= std::conj(cy[i]);
    fft_inverse(cx);
    return cx;
}

}  // namespace

void xcorr_aperiodic_fft(const cplx* x, const cplx* y, int n, cplx* out) {
    const std::size_t nf = next_pow2(2 * static_cast<std::size_t>(n) - 1);
    cvec px(nf, cplx(0.0, 0.0)), py(nf, cplx(0.0, 0.0));
    std::copy(x, x + n, px.begin());
    std::copy(y, y + n, py.begin());
    const cvec c = circular_xcorr(px, py);
    // c[m] = sum_i x[i] y*[(i-m) mod nf], so r(l) = sum_i x[i] y*[i+l] = c[-l mod nf].
    const long nfs = static_cast<long>(nf);
    for (int l = -(n - 1); l <= n - 1; ++l)
        out[l + n - 1] = c[static_cast<std::size_t>((nfs - l) % nfs)];
}

void xcorr_periodic_fft(const cplx* x, const cplx* y, int n, cplx* out) {
    cvec px(x, x + n), py(y, y + n);
    const cvec c = circular_xcorr(px, py);
    for (int l = -(n - 1); l <= n - 1; ++l)
        out[l + n - 1] = c[(n - l) % n];
}

double cross_energy(const cplx* rows, int n_rows, int n) {
    // |r_{m,m'}(l)| = |r_{m',m}(-l)|: evaluate unordered pairs, double.
    std::vector<std::pair<int, int>> pairs;
    for (int m = 0; m < n_rows; ++m)
        for (int mp = m + 1; mp < n_rows; ++mp) pairs.emplace_back(m, mp);

    std::vector<double> partial(pairs.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        cvec prof(2 * n - 1);
        xcorr_aperiodic_fft(rows + static_cast<std::size_t>(pairs[i].first) * n,
                            rows + static_cast<std::size_t>(pairs[i].second) * n, n, prof.data());
        double e = 0.0;
        for (const auto& v : prof) e += std::norm(v);
        partial[i] = e;
    }
    double total = 0.0;
    for (double e : partial) total += e;
    return 2.0 * total;
}

double quad_form_set(const cplx* rows, int n_rows, int n, const cplx* gen) {
    // Circulant G: G x is a circular convolution of gen with x.
    cvec gen_spec(gen, gen + n);
    fft_forward(gen_spec);

    std::vector<double> partial(n_rows, 0.0);
#pragma omp parallel for schedule(static)
    for (int m = 0; m < n_rows; ++m) {
        const cplx* x = rows + static_cast<std::size_t>(m) * n;
        cvec gx(x, x + n);
        fft_forward(gx);
        for (int i = 0; i < n; ++i) gx[i] *= gen_spec[i];
        fft_inverse(gx);
        cplx acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) acc += std::conj(x[i]) * gx[i];
        partial[m] = acc.real();
    }
    double total = 0.0;
    for (double e : partial) total += e;
    return total;
}

void matched_filter_bank(const cplx* streams, int n_streams, int w, const cplx* filters,
                         int n_filters, int n, cplx* out) {
    const std::size_t nf = next_pow2(static_cast<std::size_t>(w) + n);
    std::vector<cvec> filt_spec(n_filters);
    for (int f = 0; f < n_filters; ++f) {
        filt_spec[f] = fft_forward_padded(cvec(filters + static_cast<std::size_t>(f) * n,
                                               filters + static_cast<std::size_t>(f) * n + n),
                                          nf);
    }

#pragma omp parallel for schedule(static)
    for (int s = 0; s < n_streams; ++s) {
        const cvec stream_spec = fft_forward_padded(
            cvec(streams + static_cast<std::size_t>(s) * w,
                 streams + static_cast<std::size_t>(s) * w + w),
            nf);
        for (int f = 0; f < n_filters; ++f) {
            cvec prod(nf);
            for (std::size_t i = 0; i < nf; ++i)
                prod[i] = stream_spec[i] * std::conj(filt_spec[f][i]);
            fft_inverse(prod);
            cplx* dst = out + (static_cast<std::size_t>(s) * n_filters + f) * w;
            std::copy(prod.begin(), prod.begin() + w, dst);
        }
    }
}

void slow_time_dft(const cplx* in, int n_pulses, int n_cells, const double* window, cplx* out) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < n_cells; ++c) {
        cvec col(n_pulses);
        for (int p = 0; p < n_pulses; ++p) {
            const double wgt = window ? window[p] : 1.0;
            col[p] = wgt * in[static_cast<std::size_t>(p) * n_cells + c];
        }
        fft_forward(col);
        for (int b = 0; b < n_pulses; ++b)
            out[static_cast<std::size_t>(b) * n_cells + c] = col[b];
    }
}

void mix_tones(const double* freqs, const cplx* amps, int n_tones, long t0, int n, cplx* out) {
    // Fixed chunking (independent of thread count); phase recurrence within a
    // chunk, re-anchored with an exact polar() at each chunk start.
    const int chunk = 4096;
    const int n_chunks = (n + chunk - 1) / chunk;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < n_chunks; ++ci) {
        const int begin = ci * chunk;
        const int len = std::min(chunk, n - begin);
        cvec acc(len, cplx(0.0, 0.0));
        for (int k = 0; k < n_tones; ++k) {
            const double w = kTwoPi * freqs[k];
            cplx ph = amps[k] * std::polar(1.0, w * static_cast<double>(t0 + begin));
            const cplx rot = std::polar(1.0, w);
            for (int t = 0; t < len; ++t) {
                acc[t] += ph;
                ph *= rot;
            }
        }
        for (int t = 0; t < len; ++t) out[begin + t] += acc[t];
    }
}

}  // namespace notchset::kernels
