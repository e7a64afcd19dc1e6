#include "notchset/seqset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace notchset {

PhaseAlphabet PhaseAlphabet::discrete(int levels) {
    if (levels < 2) throw ParamError("discrete alphabet needs L >= 2, got " + std::to_string(levels));
    return {Kind::Discrete, levels};
}

SequenceSet::SequenceSet(int n_seq, int n_samples, PhaseAlphabet alphabet)
    : m_(n_seq), n_(n_samples), alphabet_(alphabet) {
    if (n_seq < 1 || n_samples < 1)
        throw ParamError("sequence set needs M >= 1 and N >= 1");
    entries_.assign(static_cast<std::size_t>(m_) * n_, cplx(1.0, 0.0));
    if (alphabet_.is_discrete())
        phase_idx_.assign(static_cast<std::size_t>(m_) * n_, 0);
}

void SequenceSet::set_phase(int m, int n, double phi) {
    if (alphabet_.is_discrete())
        throw ParamError("set_phase on a discrete set; use set_phase_index");
    entries_[idx(m, n)] = std::polar(1.0, phi);
}

void SequenceSet::set_entry_unit(int m, int n, cplx v) {
    if (alphabet_.is_discrete())
        throw ParamError("set_entry_unit on a discrete set; use set_phase_index");
    if (std::abs(std::abs(v) - 1.0) > 1e-12)
        throw ParamError("entry modulus " + std::to_string(std::abs(v)) + " off unit circle");
    entries_[idx(m, n)] = v;
}

void SequenceSet::set_phase_index(int m, int n, int index) {
    if (!alphabet_.is_discrete())
        throw ParamError("set_phase_index on a continuous set");
    const int levels = alphabet_.levels;
    int l = index % levels;
    if (l < 0) l += levels;
    phase_idx_[idx(m, n)] = l;
    entries_[idx(m, n)] = std::polar(1.0, kTwoPi * l / levels);
}

double SequenceSet::phase_of(int m, int n) const {
    if (alphabet_.is_discrete())
        return kTwoPi * phase_idx_[idx(m, n)] / alphabet_.levels;
    return wrap_phase(std::arg(entries_[idx(m, n)]));
}

SequenceSet random_phase_set(int n_seq, int n_samples, PhaseAlphabet alphabet, RngSpec spec) {
    SequenceSet set(n_seq, n_samples, alphabet);
    Rng rng(spec);
    for (int m = 0; m < n_seq; ++m) {
        for (int n = 0; n < n_samples; ++n) {
            if (alphabet.is_discrete())
                set.set_phase_index(m, n, static_cast<int>(rng.uniform_below(alphabet.levels)));
            else
                set.set_phase(m, n, rng.uniform_phase());
        }
    }
    return set;
}

std::vector<Violation> validate(const SequenceSet& set) {
    std::vector<Violation> out;
    const double tol = 1e-12;
    for (int m = 0; m < set.n_seq(); ++m) {
        for (int n = 0; n < set.n_samples(); ++n) {
            const cplx v = set.at(m, n);
            if (std::abs(std::abs(v) - 1.0) > tol) {
                out.push_back({m, n, "modulus " + std::to_string(std::abs(v)) + " off unit circle"});
                continue;
            }
            if (set.alphabet().is_discrete()) {
                const int l = set.phase_index(m, n);
                const cplx want = std::polar(1.0, kTwoPi * l / set.alphabet().levels);
                if (v != want)
                    out.push_back({m, n, "entry does not match its phase index " + std::to_string(l)});
            }
        }
    }
    return out;
}

SequenceSet quantize_to_alphabet(const SequenceSet& set, int levels) {
    if (levels < 2) throw ParamError("quantize needs L >= 2");
    SequenceSet out(set.n_seq(), set.n_samples(), PhaseAlphabet::discrete(levels));
    const double step = kTwoPi / levels;
    for (int m = 0; m < set.n_seq(); ++m) {
        for (int n = 0; n < set.n_samples(); ++n) {
            const double phi = set.phase_of(m, n);
            // Halfway points (phi = (l + 1/2) * step) go to the lower index.
            int l = static_cast<int>(std::floor(phi / step + 0.5));
            if (phi / step + 0.5 - std::floor(phi / step + 0.5) == 0.0) l -= 1;
            if (l < 0) l += levels;
            if (l >= levels) l -= levels;
            out.set_phase_index(m, n, l);
        }
    }
    return out;
}

void save_sequences_csv(const SequenceSet& set, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParamError("cannot open " + path + " for writing");
    f << "m,n,re,im,phase_index\n";
    char buf[128];
    for (int m = 0; m < set.n_seq(); ++m) {
        for (int n = 0; n < set.n_samples(); ++n) {
            const cplx v = set.at(m, n);
            if (set.alphabet().is_discrete()) {
                std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%d\n", m, n, v.real(), v.imag(),
                              set.phase_index(m, n));
            } else {
                std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,\n", m, n, v.real(), v.imag());
            }
            f << buf;
        }
    }
}

SequenceSet load_sequences_csv(const std::string& path, std::optional<int> expected_levels) {
    std::ifstream f(path);
    if (!f) throw ParamError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("m,n,re,im,phase_index", 0) != 0)
        throw ParamError(path + ": missing m,n,re,im,phase_index header");

    struct Row {
        int m, n;
        double re, im;
        std::optional<int> idx;
    };
    std::vector<Row> rows;
    int max_m = -1, max_n = -1;
    bool any_index = false, all_index = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        Row r{};
        std::istringstream ss(line);
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ',')) throw ParamError(path + ": short row, missing " + what);
            return field;
        };
        try {
            r.m = std::stoi(next("m"));
            r.n = std::stoi(next("n"));
            r.re = std::stod(next("re"));
            r.im = std::stod(next("im"));
        } catch (const std::exception&) {
            throw ParamError(path + ": unparsable row '" + line + "'");
        }
        if (std::getline(ss, field, ',') && !field.empty()) {
            r.idx = std::stoi(field);
            any_index = true;
        } else {
            all_index = false;
        }
        if (r.m < 0 || r.n < 0) throw ParamError(path + ": negative index");
        max_m = std::max(max_m, r.m);
        max_n = std::max(max_n, r.n);
        rows.push_back(r);
    }
    if (rows.empty()) throw ParamError(path + ": no data rows");
    if (any_index && !all_index) throw ParamError(path + ": mixed discrete/continuous rows");

    const int M = max_m + 1, N = max_n + 1;
    if (rows.size() != static_cast<std::size_t>(M) * N)
        throw ParamError(path + ": expected " + std::to_string(M * N) + " rows, got " +
                         std::to_string(rows.size()));

    PhaseAlphabet alph = PhaseAlphabet::continuous();
    if (any_index) {
        auto consistent = [&](int L) {
            for (const auto& r : rows) {
                if (*r.idx >= L) return false;
                const cplx want = std::polar(1.0, kTwoPi * *r.idx / L);
                if (std::abs(want - cplx(r.re, r.im)) > 1e-9) return false;
            }
            return true;
        };
        int levels;
        if (expected_levels) {
            levels = *expected_levels;
            if (!consistent(levels))
                throw ParamError(path + ": entries not on the L=" + std::to_string(levels) + " grid");
        } else {
            // Level count is not stored in the CSV; recover the smallest L
            // consistent with every entry (phase k*2pi/L matching re/im).
            int max_idx = 0;
            for (const auto& r : rows) max_idx = std::max(max_idx, *r.idx);
            levels = std::max(2, max_idx + 1);
            while (levels <= (1 << 20) && !consistent(levels)) ++levels;
            if (levels > (1 << 20)) throw ParamError(path + ": cannot infer discrete alphabet size");
        }
        alph = PhaseAlphabet::discrete(levels);
    } else if (expected_levels) {
        throw ParamError(path + ": expected a discrete set but phase_index column is blank");
    }

    SequenceSet set(M, N, alph);
    for (const auto& r : rows) {
        if (any_index)
            set.set_phase_index(r.m, r.n, *r.idx);
        else
            set.set_entry_unit(r.m, r.n, cplx(r.re, r.im));
    }
    auto bad = validate(set);
    if (!bad.empty())
        throw ParamError(path + ": invalid sequence set (" + bad.front().what + " at m=" +
                         std::to_string(bad.front().m) + ",n=" + std::to_string(bad.front().n) + ")");
    return set;
}

}  // namespace notchset
