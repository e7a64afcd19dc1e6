#include "notchset/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "notchset/correlation.hpp"
#include "notchset/fft.hpp"
#include "notchset/kernels.hpp"

namespace notchset {

namespace {

// y = G x for the circulant Gram with spectrum gen_spec (FFT of the
// generating column): a circular convolution.
cvec apply_circulant(const cvec& gen_spec, const cplx* x, int n) {
    cvec y(x, x + n);
    fft_forward(y);
    for (int i = 0; i < n; ++i) y[i] *= gen_spec[i];
    fft_inverse(y);
    return y;
}

void check_indices(const SequenceSet& set, int t, int d, const char* who) {
    if (t < 0 || t >= set.n_seq() || d < 0 || d >= set.n_samples())
        throw ParamError(std::string(who) + ": entry index out of range");
}

// Fills one (x0, x1, x2) triple of the quadratic Re(x0 v + x1 + x2 v*) that
// a Gram's energy reduces to as a function of the single entry (t, d).
void spectral_triple(const SequenceSet& set, int t, int d, const BinGram& gram, cplx& x0, cplx& x1,
                     cplx& x2) {
    const int n = set.n_samples();
    const cplx v0 = set.at(t, d);
    // p_d = (G x_t)_d; the diagonal gram.gen[0] is real (bin count).
    cplx pd(0.0, 0.0);
    const cplx* row = set.row(t);
    for (int l = 0; l < n; ++l) pd += gram.entry(d, l) * row[l];
    const double diag = gram.gen.empty() ? 0.0 : gram.gen[0].real();
    x0 = std::conj(pd) - diag * std::conj(v0);
    x2 = std::conj(x0);
    const double total =
        kernels::quad_form_set(set.entries().data(), set.n_seq(), n, gram.gen.data());
    x1 = cplx(total - 2.0 * (x0 * v0).real(), 0.0);
}

}  // namespace

double EntryCoefficients::g(double theta, cplx v) const {
    double val = 0.0;
    if (theta > 0.0) {
        const double den = gb(v);
        if (den <= 0.0)
            throw DegenerateMaskError("single-entry objective: passband energy not positive");
        val += theta * (ga(v) / den);
    }
    if (theta < 1.0) val += (1.0 - theta) * gc(v);
    return val;
}

ObjectiveValue objective(const SequenceSet& set, const SpectralMask& mask, double theta) {
    if (theta < 0.0 || theta > 1.0) throw ParamError("objective: theta must lie in [0, 1]");
    ObjectiveValue o;
    o.g_c = iccl(set).scaled;
    const bool usable = mask.n_bins == set.n_samples() && !mask.degenerate();
    if (theta > 0.0 && !usable) {
        if (mask.n_bins != set.n_samples())
            throw ParamError("objective: mask grid does not match the sequence length");
        throw DegenerateMaskError("objective: empty passband with theta > 0");
    }
    if (usable) o.g_s = silr(set, mask).ratio;
    o.g = theta * o.g_s + (1.0 - theta) * o.g_c;
    return o;
}

EntryCoefficients silr_coefficients(const SequenceSet& set, int t, int d, const BinGram& f_u,
                                    const BinGram& f_v) {
    check_indices(set, t, d, "silr_coefficients");
    if (f_u.n_bins != set.n_samples() || f_v.n_bins != set.n_samples())
        throw ParamError("silr_coefficients: gram size does not match the sequence length");
    EntryCoefficients co;
    spectral_triple(set, t, d, f_u, co.a0, co.a1, co.a2);
    spectral_triple(set, t, d, f_v, co.b0, co.b1, co.b2);
    return co;
}

EntryCoefficients iccl_coefficients(const SequenceSet& set, int t, int d) {
    check_indices(set, t, d, "iccl_coefficients");
    EntryCoefficients co;
    const int m_total = set.n_seq();
    const int n = set.n_samples();
    if (m_total < 2) return co;

    // The entry appears in r_{m,t}(l) (and by symmetry r_{t,m}) as
    // alpha_{m,l} v* + gamma_{m,l} with alpha_{m,l} = x_m[d-l]. Summing the
    // cross terms of |...|^2 over both pair orders doubles them.
    const cplx v0 = set.at(t, d);
    cplx acc(0.0, 0.0);
    cvec prof(2 * static_cast<std::size_t>(n) - 1);
    for (int m = 0; m < m_total; ++m) {
        if (m == t) continue;
        kernels::xcorr_aperiodic_fft(set.row(m), set.row(t), n, prof.data());
        cplx s(0.0, 0.0);
        const cplx* row = set.row(m);
        for (int i = 0; i < n; ++i) s += std::conj(row[i]) * prof[d - i + n - 1];
        acc += s - static_cast<double>(n) * std::conj(v0);
    }
    const double denom = 2.0 * m_total * n;
    const double scale = 1.0 / (denom * denom);
    co.c0 = 2.0 * scale * acc;
    co.c2 = std::conj(co.c0);
    co.c1 = cplx(iccl(set).scaled - 2.0 * (co.c0 * v0).real(), 0.0);
    return co;
}

EntryCoefficients entry_coefficients(const SequenceSet& set, int t, int d, const BinGram& f_u,
                                     const BinGram& f_v) {
    EntryCoefficients co = silr_coefficients(set, t, d, f_u, f_v);
    const EntryCoefficients cc = iccl_coefficients(set, t, d);
    co.c0 = cc.c0;
    co.c1 = cc.c1;
    co.c2 = cc.c2;
    return co;
}

double solve_phase_continuous(const EntryCoefficients& c, double theta, double current_phase,
                              int grid_points) {
    if (grid_points < 2) throw ParamError("solve_phase_continuous: need at least 2 grid points");
    const auto eval = [&](double phi) { return c.g(theta, std::polar(1.0, phi)); };
    const auto deriv = [&](double phi) {
        const cplx v = std::polar(1.0, phi);
        double r = 0.0;
        if (theta > 0.0) {
            const double num = c.ga(v), den = c.gb(v);
            const double dnum = -2.0 * (c.a0 * v).imag();
            const double dden = -2.0 * (c.b0 * v).imag();
            r += theta * (dnum * den - num * dden) / (den * den);
        }
        if (theta < 1.0) r += (1.0 - theta) * (-2.0 * (c.c0 * v).imag());
        return r;
    };

    double best_phi = wrap_phase(current_phase);
    double best_g = eval(best_phi);
    const double step = kTwoPi / grid_points;
    for (int i = 0; i < grid_points; ++i) {
        const double phi = i * step;
        const double g = eval(phi);
        if (g < best_g) {
            best_g = g;
            best_phi = phi;
        }
    }

    // Refine inside the winning cell: narrow [best-step, best+step] to a
    // sign change of g', then bisect.
    double refined = best_phi;
    double lo = best_phi - step, hi = best_phi + step;
    double dmid = deriv(best_phi);
    if (std::abs(dmid) > 1e-12) {
        if (dmid > 0.0)
            hi = best_phi;
        else
            lo = best_phi;
        if (deriv(lo) < 0.0 && deriv(hi) > 0.0) {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = deriv(mid);
                refined = mid;
                if (std::abs(dm) <= 1e-12) break;
                if (dm < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
        }
    }

    const double refined_w = wrap_phase(refined);
    if (eval(refined_w) < best_g) return refined_w;
    return best_phi;
}

DiscretePhase solve_phase_discrete(const EntryCoefficients& c, double theta, int levels) {
    if (levels < 2) throw ParamError("solve_phase_discrete: need at least 2 levels");
    const int L = levels;
    // L-point DFTs of the coefficient triples; then with w_l = e^{j2pil/L},
    //   ga(l) = Re(w_l A_l), gb(l) = Re(w_l B_l), gc(l) = Re(w_l C_l)
    // and the ratio collapses to Re(A_l conj(B_l)) / |B_l|^2 because both
    // numerator and denominator are real.
    std::vector<cplx> A(L), B(L), C(L);
    if (L == 2) {
        // Folded two-term transforms: the v and v* coefficients merge since
        // v = +-1 on the binary alphabet.
        A[0] = c.a0 + c.a2 + c.a1;
        A[1] = c.a0 + c.a2 - c.a1;
        B[0] = c.b0 + c.b2 + c.b1;
        B[1] = c.b0 + c.b2 - c.b1;
        C[0] = c.c0 + c.c2 + c.c1;
        C[1] = c.c0 + c.c2 - c.c1;
    } else {
        for (int l = 0; l < L; ++l) {
            const cplx w1 = std::polar(1.0, -kTwoPi * l / L);
            const cplx w2 = std::polar(1.0, -kTwoPi * (2 * l % L) / L);
            A[l] = c.a0 + c.a1 * w1 + c.a2 * w2;
            B[l] = c.b0 + c.b1 * w1 + c.b2 * w2;
            C[l] = c.c0 + c.c1 * w1 + c.c2 * w2;
        }
    }

    int best = -1;
    double best_g = 0.0;
    for (int l = 0; l < L; ++l) {
        double g = 0.0;
        if (theta > 0.0) {
            const cplx w = std::polar(1.0, kTwoPi * l / L);
            if ((w * B[l]).real() <= 0.0)
                throw DegenerateMaskError("solve_phase_discrete: passband energy not positive");
            g += theta * (A[l] * std::conj(B[l])).real() / std::norm(B[l]);
        }
        if (theta < 1.0) {
            const cplx w = std::polar(1.0, kTwoPi * l / L);
            g += (1.0 - theta) * (w * C[l]).real();
        }
        if (best < 0 || g < best_g) {
            best = l;
            best_g = g;
        }
    }
    return {best, kTwoPi * best / L};
}

namespace {

// Mutable optimizer state over a set being descended: the spectral caches
// (per-row Gram products and the two total energies), the correlation caches
// (upper-triangle pair profiles and their energies), or neither when the
// corresponding objective weight is zero. full_recompute bypasses all of it.
class CdState {
public:
    CdState(SequenceSet& set, const SpectralMask& mask, const CdConfig& cfg)
        : set_(set),
          cfg_(cfg),
          spectral_(cfg.theta > 0.0),
          corr_(cfg.theta < 1.0),
          m_(set.n_seq()),
          n_(set.n_samples()) {
        if (spectral_) {
            fu_ = bin_gram(mask, BinSelect::Undesired);
            fv_ = bin_gram(mask, BinSelect::Desired);
            fu_spec_ = fu_.gen;
            fft_forward(fu_spec_);
            fv_spec_ = fv_.gen;
            fft_forward(fv_spec_);
        }
        const double denom = 2.0 * m_ * n_;
        corr_scale_ = 1.0 / (denom * denom);
        refresh();
    }

    // Rebuild every cache from the set (called once per sweep so incremental
    // float drift cannot accumulate across sweeps).
    void refresh() {
        if (cfg_.full_recompute) return;
        if (spectral_) {
            pu_.resize(m_);
            pv_.resize(m_);
            ga_ = gb_ = 0.0;
            for (int m = 0; m < m_; ++m) {
                pu_[m] = apply_circulant(fu_spec_, set_.row(m), n_);
                pv_[m] = apply_circulant(fv_spec_, set_.row(m), n_);
                const cplx* row = set_.row(m);
                for (int i = 0; i < n_; ++i) {
                    ga_ += (std::conj(row[i]) * pu_[m][i]).real();
                    gb_ += (std::conj(row[i]) * pv_[m][i]).real();
                }
            }
        }
        if (corr_ && m_ >= 2) {
            profile_.assign(static_cast<std::size_t>(m_) * m_, cvec());
            energy_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
            corr_raw_ = 0.0;
            for (int a = 0; a < m_; ++a) {
                for (int b = a + 1; b < m_; ++b) {
                    cvec& prof = profile_[pair(a, b)];
                    prof.resize(2 * static_cast<std::size_t>(n_) - 1);
                    kernels::xcorr_aperiodic_fft(set_.row(a), set_.row(b), n_, prof.data());
                    double e = 0.0;
                    for (const auto& z : prof) e += std::norm(z);
                    energy_[pair(a, b)] = e;
                    corr_raw_ += 2.0 * e;
                }
            }
        }
    }

    EntryCoefficients coefficients(int t, int d) const {
        if (cfg_.full_recompute) {
            EntryCoefficients co;
            if (corr_) co = iccl_coefficients(set_, t, d);
            if (spectral_) {
                const EntryCoefficients cs = silr_coefficients(set_, t, d, fu_, fv_);
                co.a0 = cs.a0;
                co.a1 = cs.a1;
                co.a2 = cs.a2;
                co.b0 = cs.b0;
                co.b1 = cs.b1;
                co.b2 = cs.b2;
            }
            return co;
        }

        EntryCoefficients co;
        const cplx v0 = set_.at(t, d);
        if (spectral_) {
            co.a0 = std::conj(pu_[t][d]) - fu_.gen[0].real() * std::conj(v0);
            co.a2 = std::conj(co.a0);
            co.a1 = cplx(ga_ - 2.0 * (co.a0 * v0).real(), 0.0);
            co.b0 = std::conj(pv_[t][d]) - fv_.gen[0].real() * std::conj(v0);
            co.b2 = std::conj(co.b0);
            co.b1 = cplx(gb_ - 2.0 * (co.b0 * v0).real(), 0.0);
        }
        if (corr_ && m_ >= 2) {
            cplx acc(0.0, 0.0);
            for (int m = 0; m < m_; ++m) {
                if (m == t) continue;
                cplx s(0.0, 0.0);
                const cplx* row = set_.row(m);
                if (m < t) {
                    const cvec& prof = profile_[pair(m, t)];  // r_{m,t} directly
                    for (int i = 0; i < n_; ++i) s += std::conj(row[i]) * prof[d - i + n_ - 1];
                } else {
                    const cvec& prof = profile_[pair(t, m)];  // r_{m,t}(l) = conj(R_{t,m}(-l))
                    for (int i = 0; i < n_; ++i)
                        s += std::conj(row[i]) * std::conj(prof[i - d + n_ - 1]);
                }
                acc += s - static_cast<double>(n_) * std::conj(v0);
            }
            co.c0 = 2.0 * corr_scale_ * acc;
            co.c2 = std::conj(co.c0);
            co.c1 = cplx(corr_raw_ * corr_scale_ - 2.0 * (co.c0 * v0).real(), 0.0);
        }
        return co;
    }

    // Write the accepted value and patch every cache it touches. The a0/b0
    // coefficients passed in were computed against the pre-update set, which
    // is exactly what the O(1) total-energy updates need.
    void apply(int t, int d, const EntryCoefficients& co, int index, cplx v_cand) {
        const cplx v_old = set_.at(t, d);
        if (index >= 0)
            set_.set_phase_index(t, d, index);
        else
            set_.set_entry_unit(t, d, v_cand);
        if (cfg_.full_recompute) return;

        const cplx delta = set_.at(t, d) - v_old;
        if (spectral_) {
            ga_ += 2.0 * (co.a0 * delta).real();
            gb_ += 2.0 * (co.b0 * delta).real();
            for (int i = 0; i < n_; ++i) {
                int k = i - d;
                if (k < 0) k += n_;
                pu_[t][i] += delta * fu_.gen[k];
                pv_[t][i] += delta * fv_.gen[k];
            }
        }
        if (corr_ && m_ >= 2) {
            const cplx dconj = std::conj(delta);
            for (int m = 0; m < m_; ++m) {
                if (m == t) continue;
                const std::size_t p = pair(std::min(m, t), std::max(m, t));
                cvec& prof = profile_[p];
                const cplx* row = set_.row(m);
                if (m < t) {
                    // R_{m,t}(d - i) gains x_m[i] * conj(delta)
                    for (int i = 0; i < n_; ++i) prof[d - i + n_ - 1] += row[i] * dconj;
                } else {
                    // R_{t,m}(l) gains delta * conj(x_m[d + l])
                    for (int l = -d; l < n_ - d; ++l)
                        prof[l + n_ - 1] += delta * std::conj(row[d + l]);
                }
                double e = 0.0;
                for (const auto& z : prof) e += std::norm(z);
                corr_raw_ += 2.0 * (e - energy_[p]);
                energy_[p] = e;
            }
        }
    }

    // One coordinate pass; returns the squared Frobenius norm of the change.
    double sweep(const std::vector<int>& row_order, std::vector<double>* deltas) {
        const bool discrete = cfg_.alphabet.is_discrete();
        double fro_sq = 0.0;
        for (int t : row_order) {
            for (int d = 0; d < n_; ++d) {
                const cplx v0 = set_.at(t, d);
                const EntryCoefficients co = coefficients(t, d);
                const double g0 = co.g(cfg_.theta, v0);
                cplx v_cand;
                int index = -1;
                if (discrete) {
                    index = solve_phase_discrete(co, cfg_.theta, cfg_.alphabet.levels).index;
                    v_cand = std::polar(1.0, kTwoPi * index / cfg_.alphabet.levels);
                } else {
                    const double phi = solve_phase_continuous(co, cfg_.theta, set_.phase_of(t, d),
                                                              cfg_.grid_points);
                    v_cand = std::polar(1.0, phi);
                }
                const double g1 = co.g(cfg_.theta, v_cand);
                // Sufficient decrease only: ties and sub-threshold gains
                // (including the all-flat fixed point) keep the incumbent so
                // fixed points have zero delta. g0 >= 0 for theta in [0, 1].
                if (g1 < g0 - cfg_.min_rel_improvement * g0) {
                    apply(t, d, co, index, v_cand);
                    fro_sq += std::norm(set_.at(t, d) - v0);
                    if (deltas) deltas->push_back(g1 - g0);
                } else if (deltas) {
                    deltas->push_back(0.0);
                }
            }
        }
        return fro_sq;
    }

private:
    std::size_t pair(int a, int b) const { return static_cast<std::size_t>(a) * m_ + b; }

    SequenceSet& set_;
    const CdConfig& cfg_;
    bool spectral_;
    bool corr_;
    int m_;
    int n_;
    BinGram fu_, fv_;
    cvec fu_spec_, fv_spec_;
    std::vector<cvec> pu_, pv_;
    double ga_ = 0.0, gb_ = 0.0;
    std::vector<cvec> profile_;  // [a * M + b], a < b
    std::vector<double> energy_;
    double corr_raw_ = 0.0;
    double corr_scale_ = 0.0;
};

void validate_cd_inputs(const SequenceSet& init, const SpectralMask& mask, const CdConfig& cfg) {
    if (cfg.theta < 0.0 || cfg.theta > 1.0) throw ParamError("cd: theta must lie in [0, 1]");
    if (!(cfg.zeta > 0.0)) throw ParamError("cd: zeta must be positive");
    if (cfg.max_sweeps < 1) throw ParamError("cd: max_sweeps must be at least 1");
    if (!cfg.alphabet.is_discrete() && cfg.grid_points < 2)
        throw ParamError("cd: grid_points must be at least 2");
    if (!(cfg.min_rel_improvement >= 0.0) || cfg.min_rel_improvement >= 1.0)
        throw ParamError("cd: min_rel_improvement must lie in [0, 1)");
    if (!(init.alphabet() == cfg.alphabet))
        throw ParamError("cd: init alphabet does not match the config alphabet");
    if (cfg.theta > 0.0) {
        if (mask.n_bins != init.n_samples())
            throw ParamError("cd: mask grid does not match the sequence length");
        if (mask.degenerate()) throw DegenerateMaskError("cd: empty passband with theta > 0");
    }
}

// Trace-friendly evaluation: with theta = 0 a degenerate or mismatched mask
// reports g_s = 0 instead of throwing.
ObjectiveValue eval_components(const SequenceSet& set, const SpectralMask& mask, double theta) {
    if (theta == 0.0 && (mask.n_bins != set.n_samples() || mask.degenerate())) {
        ObjectiveValue o;
        o.g_c = iccl(set).scaled;
        o.g = o.g_c;
        return o;
    }
    return objective(set, mask, theta);
}

}  // namespace

SequenceSet cd_sweep(const SequenceSet& set, const SpectralMask& mask, const CdConfig& config,
                     const std::vector<int>& row_order) {
    validate_cd_inputs(set, mask, config);
    std::vector<int> sorted = row_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(set.n_seq());
    std::iota(identity.begin(), identity.end(), 0);
    if (sorted != identity) throw ParamError("cd_sweep: row_order must permute 0..M-1");

    SequenceSet out = set;
    CdState state(out, mask, config);
    state.sweep(row_order, nullptr);
    return out;
}

DesignResult cd_design(const SequenceSet& init, const SpectralMask& mask, const CdConfig& config) {
    validate_cd_inputs(init, mask, config);
    SequenceSet cur = init;
    CdState state(cur, mask, config);

    std::vector<int> order(cur.n_seq());
    std::iota(order.begin(), order.end(), 0);

    ObjectiveValue ov = eval_components(cur, mask, config.theta);
    std::vector<double> trace{ov.g}, gs_trace{ov.g_s}, gc_trace{ov.g_c};
    std::vector<double> delta_trace;
    std::vector<double> update_deltas;
    bool converged = false;
    int sweeps = 0;
    while (sweeps < config.max_sweeps) {
        const double fro_sq =
            state.sweep(order, config.record_update_deltas ? &update_deltas : nullptr);
        ++sweeps;
        const double fro = std::sqrt(fro_sq);
        delta_trace.push_back(fro);
        ov = eval_components(cur, mask, config.theta);
        trace.push_back(ov.g);
        gs_trace.push_back(ov.g_s);
        gc_trace.push_back(ov.g_c);
        state.refresh();
        if (fro <= config.zeta) {
            converged = true;
            break;
        }
    }

    return DesignResult{std::move(cur),         std::move(trace),     std::move(gs_trace),
                        std::move(gc_trace),    std::move(delta_trace), sweeps,
                        converged,              ov,                   std::move(update_deltas)};
}

}  // namespace notchset
