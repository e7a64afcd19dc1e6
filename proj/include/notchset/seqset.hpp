#pragma once

#include <optional>
#include <string>
#include <vector>

#include "notchset/rng.hpp"
#include "notchset/types.hpp"

namespace notchset {

// Phase feasible set: the full circle [0, 2*pi) or the L-point M-PSK grid
// {2*pi*l/L : l = 0..L-1}.
struct PhaseAlphabet {
    enum class Kind { Continuous, Discrete };

    Kind kind = Kind::Continuous;
    int levels = 0;  // L; meaningful iff Discrete

    static PhaseAlphabet continuous() { return {Kind::Continuous, 0}; }
    static PhaseAlphabet discrete(int levels);

    bool is_discrete() const { return kind == Kind::Discrete; }
    bool operator==(const PhaseAlphabet&) const = default;
};

// An M x N set of unit-modulus sequences, one row per transmitter.
// Discrete sets carry exact integer phase indices; the complex entries are
// materialized from them, so alphabet membership never depends on a float
// tolerance.
class SequenceSet {
public:
    SequenceSet(int n_seq, int n_samples, PhaseAlphabet alphabet);

    int n_seq() const { return m_; }
    int n_samples() const { return n_; }
    const PhaseAlphabet& alphabet() const { return alphabet_; }

    const cplx& at(int m, int n) const { return entries_[idx(m, n)]; }
    const cplx* row(int m) const { return entries_.data() + static_cast<std::size_t>(m) * n_; }
    const cvec& entries() const { return entries_; }

    int phase_index(int m, int n) const { return phase_idx_[idx(m, n)]; }

    // Continuous sets only.
    void set_phase(int m, int n, double phi);
    // Continuous sets only; v must sit on the unit circle to 1e-12. Stores v
    // bit-exactly (the CSV loader depends on this for round trips).
    void set_entry_unit(int m, int n, cplx v);
    // Discrete sets only; index taken mod L.
    void set_phase_index(int m, int n, int index);

    // Entry phase in [0, 2*pi); exact 2*pi*l/L for discrete entries.
    double phase_of(int m, int n) const;

private:
    std::size_t idx(int m, int n) const { return static_cast<std::size_t>(m) * n_ + n; }

    int m_ = 0;
    int n_ = 0;
    PhaseAlphabet alphabet_;
    cvec entries_;
    std::vector<int> phase_idx_;  // empty for continuous
};

struct Violation {
    int m = 0;
    int n = 0;
    std::string what;
};

// Random-phase initialization: i.i.d. uniform phases (continuous) or i.i.d.
// uniform phase indices (discrete). Pure function of (M, N, alphabet, rng).
SequenceSet random_phase_set(int n_seq, int n_samples, PhaseAlphabet alphabet, RngSpec rng);

// Reports every broken type invariant; empty means the set is well formed.
std::vector<Violation> validate(const SequenceSet& set);

// Nearest-neighbor phase quantization onto the L-point grid. Exact halfway
// ties resolve to the lower index.
SequenceSet quantize_to_alphabet(const SequenceSet& set, int levels);

// CSV with header m,n,re,im,phase_index (phase_index blank for continuous).
// The file does not record L, so a discrete load infers the smallest alphabet
// consistent with every entry unless the caller pins expected_levels.
void save_sequences_csv(const SequenceSet& set, const std::string& path);
SequenceSet load_sequences_csv(const std::string& path,
                               std::optional<int> expected_levels = std::nullopt);

}  // namespace notchset
