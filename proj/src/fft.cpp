#include "notchset/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace notchset {

namespace {

std::mutex plan_mutex;

fftw_plan plan_for(std::size_t n, int sign) {
    // One cached in-place plan per (size, direction); executed via the
    // new-array interface so concurrent callers never share buffers.
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    cvec scratch(n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    // FFTW_UNALIGNED: plans must accept whatever alignment std::vector gives.
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, p);
    return p;
}

void execute(cvec& data, int sign) {
    fftw_plan p = plan_for(data.size(), sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, buf, buf);
}

}  // namespace

void fft_forward(cvec& data) {
    if (data.empty()) return;
    execute(data, FFTW_FORWARD);
}

void fft_inverse(cvec& data) {
    if (data.empty()) return;
    execute(data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

cvec fft_forward_padded(const cvec& in, std::size_t nfft) {
    cvec buf(nfft, cplx(0.0, 0.0));
    std::copy(in.begin(), in.end(), buf.begin());
    fft_forward(buf);
    return buf;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace notchset
