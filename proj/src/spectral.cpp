#include "notchset/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "notchset/fft.hpp"

namespace notchset {

cvec dft_vector(int k, int n_bins) {
    if (k < 0 || k >= n_bins)
        throw ParamError("dft_vector: bin " + std::to_string(k) + " outside [0, " +
                         std::to_string(n_bins) + ")");
    cvec f(n_bins);
    for (int n = 0; n < n_bins; ++n)
        f[n] = std::polar(1.0, kTwoPi * k * n / n_bins);
    return f;
}

namespace {

// Round half away from zero (std::lround semantics, without the errno paths).
long round_half_away(double x) {
    return static_cast<long>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

}  // namespace

SpectralMask band_to_bins(const std::vector<Stopband>& stopbands, int n_bins) {
    if (n_bins < 1) throw ParamError("band_to_bins: N must be positive");
    for (const auto& s : stopbands) {
        if (!(s.lo >= 0.0 && s.lo < s.hi && s.hi <= 1.0))
            throw ParamError("stopband [" + std::to_string(s.lo) + ", " + std::to_string(s.hi) +
                             "] not within 0 <= lo < hi <= 1");
    }
    for (std::size_t i = 0; i < stopbands.size(); ++i) {
        for (std::size_t j = i + 1; j < stopbands.size(); ++j) {
            if (stopbands[i].lo < stopbands[j].hi && stopbands[j].lo < stopbands[i].hi)
                throw ParamError("stopbands overlap");
        }
    }

    SpectralMask mask;
    mask.n_bins = n_bins;
    mask.stopbands = stopbands;
    std::vector<char> in_u(n_bins, 0);
    for (const auto& s : stopbands) {
        const long lo = round_half_away(n_bins * s.lo);
        const long hi = std::min<long>(round_half_away(n_bins * s.hi), n_bins - 1);
        for (long k = lo; k <= hi; ++k) in_u[k] = 1;
    }
    for (int k = 0; k < n_bins; ++k)
        (in_u[k] ? mask.undesired : mask.desired).push_back(k);
    return mask;
}

std::vector<cvec> BinGram::dense() const {
    std::vector<cvec> m(n_bins, cvec(n_bins));
    for (int n = 0; n < n_bins; ++n)
        for (int l = 0; l < n_bins; ++l) m[n][l] = entry(n, l);
    return m;
}

BinGram bin_gram(const SpectralMask& mask, BinSelect which) {
    const auto& bins = (which == BinSelect::Undesired) ? mask.undesired : mask.desired;
    BinGram g;
    g.n_bins = mask.n_bins;
    g.source = which;
    g.gen.assign(mask.n_bins, cplx(0.0, 0.0));
    for (int d = 0; d < mask.n_bins; ++d) {
        cplx acc(0.0, 0.0);
        for (int k : bins) acc += std::polar(1.0, kTwoPi * k * d / mask.n_bins);
        g.gen[d] = acc;
    }
    return g;
}

SilrResult silr(const SequenceSet& set, const SpectralMask& mask) {
    if (mask.n_bins != set.n_samples())
        throw ParamError("silr: mask bin count does not match sequence length");
    if (mask.degenerate())
        throw DegenerateMaskError("silr: mask leaves no desired bins");

    std::vector<char> in_u(mask.n_bins, 0);
    for (int k : mask.undesired) in_u[k] = 1;

    SilrResult r;
    for (int m = 0; m < set.n_seq(); ++m) {
        cvec spec(set.row(m), set.row(m) + set.n_samples());
        fft_forward(spec);  // spec[k] = f_k^H x_m
        for (int k = 0; k < mask.n_bins; ++k) {
            const double p = std::norm(spec[k]);
            if (in_u[k])
                r.num += p;
            else
                r.den += p;
        }
    }
    r.ratio = r.num / r.den;
    return r;
}

dvec make_window(Window w, int n) {
    dvec win(n, 1.0);
    if (n == 1) return win;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        switch (w) {
            case Window::Rectangular:
                break;
            case Window::Hann:
                win[i] = 0.5 - 0.5 * std::cos(kTwoPi * t);
                break;
            case Window::Hamming:
                win[i] = 0.54 - 0.46 * std::cos(kTwoPi * t);
                break;
            case Window::Blackman:
                win[i] = 0.42 - 0.5 * std::cos(kTwoPi * t) + 0.08 * std::cos(2.0 * kTwoPi * t);
                break;
        }
    }
    return win;
}

dvec psd(const cvec& x, int nfft, Window w) {
    const int n = static_cast<int>(x.size());
    if (n == 0) throw ParamError("psd: empty input");
    if (nfft < n) throw ParamError("psd: nfft < input length");
    double energy = 0.0;
    for (const auto& v : x) energy += std::norm(v);
    if (energy == 0.0) throw ParamError("psd: zero-energy input");

    const dvec win = make_window(w, n);
    double wsum = 0.0;
    for (double v : win) wsum += v;

    cvec buf(nfft, cplx(0.0, 0.0));
    for (int i = 0; i < n; ++i) buf[i] = x[i] * win[i];
    fft_forward(buf);

    dvec out(nfft);
    for (int k = 0; k < nfft; ++k)
        out[k] = db10(std::norm(buf[k]) / (wsum * wsum));
    return out;
}

void save_psd_csv(const dvec& psd_db, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParamError("cannot open " + path + " for writing");
    f << "bin,freq_norm,db\n";
    char buf[96];
    const int nfft = static_cast<int>(psd_db.size());
    for (int k = 0; k < nfft; ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, static_cast<double>(k) / nfft,
                      psd_db[k]);
        f << buf;
    }
}

void save_mask_file(const std::vector<Stopband>& stopbands, const std::string& path) {
    nlohmann::json j;
    j["stopbands"] = nlohmann::json::array();
    for (const auto& s : stopbands) j["stopbands"].push_back({s.lo, s.hi});
    std::ofstream f(path);
    if (!f) throw ParamError("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

std::vector<Stopband> load_mask_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParamError("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ParamError(path + ": bad mask file: " + e.what());
    }
    if (!j.contains("stopbands") || !j["stopbands"].is_array())
        throw ParamError(path + ": mask file needs a stopbands array");
    std::vector<Stopband> out;
    for (const auto& e : j["stopbands"]) {
        if (!e.is_array() || e.size() != 2)
            throw ParamError(path + ": each stopband must be [lo, hi]");
        out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return out;
}

}  // namespace notchset
