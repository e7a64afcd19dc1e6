#pragma once

#include <vector>

#include "notchset/seqset.hpp"
#include "notchset/spectral.hpp"
#include "notchset/types.hpp"

namespace notchset {

// Coordinate-descent settings. theta in [0,1] weights the spectral ratio
// against the scaled cross-correlation energy; zeta is the stop threshold on
// the per-sweep Frobenius norm of the set change.
struct CdConfig {
    double theta = 1.0;
    PhaseAlphabet alphabet = PhaseAlphabet::continuous();
    double zeta = 1e-5;
    int max_sweeps = 1000;
    int grid_points = 1024;  // phase grid for the continuous solver

    // Sufficient-decrease gate: an update is applied only when it lowers the
    // objective by more than this fraction of its current value. Near-flat
    // directions otherwise sustain arbitrarily long phase drifts bought with
    // vanishing improvements, which keeps the per-sweep Frobenius delta from
    // ever reaching zeta. Relative so deep descents (tiny g) are unimpeded.
    double min_rel_improvement = 1e-6;

    // Rebuild every coefficient from scratch at each entry instead of using
    // the incremental caches. Orders of magnitude slower; kept as the oracle
    // the cached path is tested against.
    bool full_recompute = false;
    // Record the (coefficient-form) objective delta of every entry update.
    bool record_update_deltas = false;
};

// The objective restricted to one entry: with every other entry frozen and
// v = x_{t,d} on the unit circle,
//   stopband energy   ga(v) = Re(a0 v + a1 + a2 v*)
//   passband energy   gb(v) = Re(b0 v + b1 + b2 v*)
//   correlation term  gc(v) = Re(c0 v + c1 + c2 v*)
// and g(v) = theta * ga/gb + (1-theta) * gc. The *2 coefficients are the
// conjugates of the *0 ones and the *1 ones are real, so each form is real
// on the circle; they are stored separately so that invariant stays visible.
struct EntryCoefficients {
    cplx a0{}, a1{}, a2{};
    cplx b0{}, b1{}, b2{};
    cplx c0{}, c1{}, c2{};

    double ga(cplx v) const { return (a0 * v + a1 + a2 * std::conj(v)).real(); }
    double gb(cplx v) const { return (b0 * v + b1 + b2 * std::conj(v)).real(); }
    double gc(cplx v) const { return (c0 * v + c1 + c2 * std::conj(v)).real(); }

    // Weighted objective at v. The ratio is skipped entirely at theta = 0;
    // a nonpositive denominator with theta > 0 is a degenerate-mask error.
    double g(double theta, cplx v) const;
};

struct ObjectiveValue {
    double g = 0.0;
    double g_s = 0.0;  // stopband / passband energy ratio
    double g_c = 0.0;  // cross-correlation energy, scaled by 1/(2MN)^2
};

// g = theta * g_s + (1-theta) * g_c. With theta = 0 the mask is ignored
// (g = g_c even for a degenerate or mismatched mask); with theta > 0 a
// degenerate mask throws DegenerateMaskError and a grid-size mismatch throws
// ParamError.
ObjectiveValue objective(const SequenceSet& set, const SpectralMask& mask, double theta);

// Exact single-entry coefficients rebuilt from the full set. silr_ fills the
// a/b triples (stopband/passband Grams), iccl_ fills the c triple,
// entry_coefficients merges both.
EntryCoefficients silr_coefficients(const SequenceSet& set, int t, int d, const BinGram& f_u,
                                    const BinGram& f_v);
EntryCoefficients iccl_coefficients(const SequenceSet& set, int t, int d);
EntryCoefficients entry_coefficients(const SequenceSet& set, int t, int d, const BinGram& f_u,
                                     const BinGram& f_v);

// Minimize g(phase) over the full circle: a uniform grid of grid_points
// phases plus current_phase (so the result never loses to the incumbent),
// then derivative bisection inside the winning cell until |g'| <= 1e-12 or
// 60 halvings. Throws DegenerateMaskError if the passband energy is not
// positive at an evaluated phase (theta > 0).
double solve_phase_continuous(const EntryCoefficients& c, double theta, double current_phase,
                              int grid_points);

struct DiscretePhase {
    int index = 0;
    double phase = 0.0;  // 2 pi index / levels
};

// Minimize g over the levels-point phase grid. Evaluated through the
// levels-point DFTs of the coefficient triples (folded to two terms when
// levels = 2); ties break to the smallest index.
DiscretePhase solve_phase_discrete(const EntryCoefficients& c, double theta, int levels);

struct DesignResult {
    SequenceSet final;
    std::vector<double> objective_trace;  // g at init, then after every sweep
    std::vector<double> gs_trace;         // g_s aligned with objective_trace
    std::vector<double> gc_trace;         // g_c aligned with objective_trace
    std::vector<double> delta_trace;      // per-sweep Frobenius change
    int sweeps = 0;
    bool converged = false;      // stopped on zeta rather than the sweep cap
    ObjectiveValue components;   // evaluated at final
    std::vector<double> update_deltas;  // iff record_update_deltas
};

// One full coordinate pass visiting rows in row_order (samples in ascending
// order within each row). Exposed so order-dependence can be probed directly;
// cd_design uses the natural order 0..M-1.
SequenceSet cd_sweep(const SequenceSet& set, const SpectralMask& mask, const CdConfig& config,
                     const std::vector<int>& row_order);

// Cyclic coordinate descent over all entries. Each update minimizes the
// single-entry objective and is applied only when it strictly improves, so
// the objective never increases and a fixed point converges with zero
// Frobenius delta in one sweep.
DesignResult cd_design(const SequenceSet& init, const SpectralMask& mask, const CdConfig& config);

}  // namespace notchset
