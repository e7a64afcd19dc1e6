// Times each kernel's serial reference against the production build and
// reports the largest numeric deviation between them on the same inputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "notchset/kernels.hpp"
#include "notchset/rng.hpp"

using namespace notchset;

namespace {

cvec random_vec(std::size_t n, Rng& rng) {
    cvec v(n);
    for (auto& x : v) x = std::polar(1.0, rng.uniform_phase());
    return v;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up also primes FFT plans
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

double max_abs_diff(const cvec& a, const cvec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

void report(const char* name, double ref_ms, double prod_ms, double dev) {
    std::printf("%-22s %10.3f ms %10.3f ms %8.2fx   %.3g\n", name, ref_ms, prod_ms,
                ref_ms / prod_ms, dev);
}

}  // namespace

int main() {
    Rng rng({12345, 0});
    std::printf("%-22s %13s %13s %9s   %s\n", "kernel", "reference", "production", "speedup",
                "max |diff|");

    {
        const int m = 4, n = 512;
        const cvec rows = random_vec(static_cast<std::size_t>(m) * n, rng);
        double ref_ms = time_ms([&] { kernels::cross_energy_ref(rows.data(), m, n); }, 3);
        double prod_ms = time_ms([&] { kernels::cross_energy(rows.data(), m, n); }, 20);
        const double dev = std::abs(kernels::cross_energy_ref(rows.data(), m, n) -
                                    kernels::cross_energy(rows.data(), m, n));
        report("cross_energy M4 N512", ref_ms, prod_ms, dev);
    }
    {
        const int m = 4, n = 512;
        const cvec rows = random_vec(static_cast<std::size_t>(m) * n, rng);
        const cvec gen = random_vec(n, rng);
        double ref_ms =
            time_ms([&] { kernels::quad_form_set_ref(rows.data(), m, n, gen.data()); }, 5);
        double prod_ms = time_ms([&] { kernels::quad_form_set(rows.data(), m, n, gen.data()); }, 50);
        const double dev = std::abs(kernels::quad_form_set_ref(rows.data(), m, n, gen.data()) -
                                    kernels::quad_form_set(rows.data(), m, n, gen.data()));
        report("quad_form M4 N512", ref_ms, prod_ms, dev);
    }
    {
        const int n_streams = 32, w = 800, n_filters = 2, n = 400;
        const cvec streams = random_vec(static_cast<std::size_t>(n_streams) * w, rng);
        const cvec filters = random_vec(static_cast<std::size_t>(n_filters) * n, rng);
        cvec out_ref(static_cast<std::size_t>(n_streams) * n_filters * w);
        cvec out(out_ref.size());
        double ref_ms = time_ms(
            [&] {
                kernels::matched_filter_bank_ref(streams.data(), n_streams, w, filters.data(),
                                                 n_filters, n, out_ref.data());
            },
            2);
        double prod_ms = time_ms(
            [&] {
                kernels::matched_filter_bank(streams.data(), n_streams, w, filters.data(),
                                             n_filters, n, out.data());
            },
            10);
        report("mf_bank 32x800", ref_ms, prod_ms, max_abs_diff(out_ref, out));
    }
    {
        const int p = 64, cells = 800;
        const cvec in = random_vec(static_cast<std::size_t>(p) * cells, rng);
        const dvec win(p, 1.0);
        cvec out_ref(in.size()), out(in.size());
        double ref_ms = time_ms(
            [&] { kernels::slow_time_dft_ref(in.data(), p, cells, win.data(), out_ref.data()); },
            2);
        double prod_ms = time_ms(
            [&] { kernels::slow_time_dft(in.data(), p, cells, win.data(), out.data()); }, 10);
        report("slow_time 64x800", ref_ms, prod_ms, max_abs_diff(out_ref, out));
    }
    {
        const int n_tones = 1200, n = 16384;
        dvec freqs(n_tones);
        for (int k = 0; k < n_tones; ++k) freqs[k] = rng.uniform() - 0.5;
        const cvec amps = random_vec(n_tones, rng);
        cvec out_ref(n), out(n);
        double ref_ms = time_ms(
            [&] {
                std::fill(out_ref.begin(), out_ref.end(), cplx(0.0, 0.0));
                kernels::mix_tones_ref(freqs.data(), amps.data(), n_tones, 0, n, out_ref.data());
            },
            2);
        double prod_ms = time_ms(
            [&] {
                std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
                kernels::mix_tones(freqs.data(), amps.data(), n_tones, 0, n, out.data());
            },
            5);
        report("mix_tones 1200x16k", ref_ms, prod_ms, max_abs_diff(out_ref, out));
    }
    {
        const int n = 4096;
        const cvec x = random_vec(n, rng), y = random_vec(n, rng);
        cvec out_ref(2 * n - 1), out(2 * n - 1);
        double ref_ms = time_ms(
            [&] { kernels::xcorr_aperiodic_ref(x.data(), y.data(), n, out_ref.data()); }, 2);
        double prod_ms =
            time_ms([&] { kernels::xcorr_aperiodic_fft(x.data(), y.data(), n, out.data()); }, 20);
        report("xcorr N4096", ref_ms, prod_ms, max_abs_diff(out_ref, out));
    }
    return 0;
}
