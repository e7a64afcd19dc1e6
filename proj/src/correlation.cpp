#include "notchset/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "notchset/kernels.hpp"

namespace notchset {

namespace {

CorrelationProfile make_profile(const cvec& x, const cvec& y, CorrKind kind, bool use_fft) {
    if (x.empty() || x.size() != y.size())
        throw ParamError("xcorr: inputs must be non-empty and equal length");
    CorrelationProfile p;
    p.n = static_cast<int>(x.size());
    p.kind = kind;
    p.values.resize(2 * x.size() - 1);
    if (kind == CorrKind::Aperiodic) {
        if (use_fft)
            kernels::xcorr_aperiodic_fft(x.data(), y.data(), p.n, p.values.data());
        else
            kernels::xcorr_aperiodic_ref(x.data(), y.data(), p.n, p.values.data());
    } else {
        if (use_fft)
            kernels::xcorr_periodic_fft(x.data(), y.data(), p.n, p.values.data());
        else
            kernels::xcorr_periodic_ref(x.data(), y.data(), p.n, p.values.data());
    }
    return p;
}

}  // namespace

CorrelationProfile xcorr(const cvec& x, const cvec& y, CorrKind kind) {
    return make_profile(x, y, kind, /*use_fft=*/false);
}

CorrelationProfile xcorr_fft(const cvec& x, const cvec& y, CorrKind kind) {
    return make_profile(x, y, kind, /*use_fft=*/true);
}

IcclResult iccl(const SequenceSet& set) {
    const int m = set.n_seq();
    const int n = set.n_samples();
    IcclResult r;
    if (m >= 2) r.raw = kernels::cross_energy(set.entries().data(), m, n);
    const double denom = 2.0 * m * n;
    r.scaled = r.raw / (denom * denom);
    return r;
}

double isl(const SequenceSet& set, CorrKind kind) {
    const int m = set.n_seq();
    const int n = set.n_samples();
    double total = 0.0;
    CorrelationProfile p;
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            p = make_profile(cvec(set.row(a), set.row(a) + n),
                             cvec(set.row(b), set.row(b) + n), kind, /*use_fft=*/true);
            double e = 0.0;
            for (int l = p.min_lag(); l <= p.max_lag(); ++l) {
                if (a == b && l == 0) continue;
                e += std::norm(p.at_lag(l));
            }
            total += (a == b) ? e : 2.0 * e;  // |r_{b,a}(l)| = |r_{a,b}(-l)|
        }
    }
    return total;
}

double isl_bound(int n_seq, int n_samples) {
    return static_cast<double>(n_samples) * n_samples * n_seq * (n_seq - 1);
}

double islr_db(const SequenceSet& set, CorrKind kind) {
    const double mainlobe =
        static_cast<double>(set.n_seq()) * set.n_samples() * set.n_samples();
    return db10(isl(set, kind) / mainlobe);
}

double isl_bound_db(int n_seq) { return db10(static_cast<double>(n_seq - 1)); }

SetCorrelationSummary correlation_summary(const SequenceSet& set) {
    SetCorrelationSummary s;
    const auto ic = iccl(set);
    s.iccl_raw = ic.raw;
    s.iccl_scaled = ic.scaled;
    s.isl = isl(set, CorrKind::Aperiodic);
    s.islr_db = islr_db(set, CorrKind::Aperiodic);
    s.bound_db = isl_bound_db(set.n_seq());
    return s;
}

double peak_cross_correlation_db(const SequenceSet& set) {
    const int m = set.n_seq();
    const int n = set.n_samples();
    if (m < 2) throw ParamError("peak_cross_correlation_db: need at least two sequences");
    double peak = 0.0;
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            const auto p = xcorr_fft(cvec(set.row(a), set.row(a) + n),
                                     cvec(set.row(b), set.row(b) + n), CorrKind::Aperiodic);
            for (const auto& v : p.values) peak = std::max(peak, std::abs(v));
        }
    }
    return db20(std::max(peak / n, 1e-300));
}

void save_correlation_csv(const CorrelationProfile& p, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "lag,abs_db\n");
    for (int l = p.min_lag(); l <= p.max_lag(); ++l) {
        const double mag = std::abs(p.at_lag(l)) / p.n;
        std::fprintf(f, "%d,%.17g\n", l, db20(std::max(mag, 1e-300)));
    }
    std::fclose(f);
}

}  // namespace notchset
