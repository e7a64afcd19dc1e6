#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "notchset/rng.hpp"
#include "notchset/seqset.hpp"
#include "notchset/spectral.hpp"
#include "notchset/types.hpp"

// Radar / communications coexistence sandbox: OFDM-style interference with
// resource-block holes, target echo synthesis, the matched-filter +
// slow-time-FFT receive chain, cell SINR measurement, energy-detector
// spectrum sensing, and the sense -> mask -> redesign loop.
//
// Power convention: every *_db / *_dbm field is dB relative to the unit
// power of one radar transmit sample (the simulation has no absolute
// reference). -INFINITY disables the corresponding component.

namespace notchset::sim {

struct InterferenceSpec {
    std::string allocation = "1111111111110000000111111";  // 1 = RB group occupied
    int prb_per_bit = 4;
    double bandwidth_hz = 20e6;  // occupied span must fit inside this
    double center_offset_hz = 0.0;  // comms center minus radar center
    double power_dbm = 0.0;         // total power (see convention above)
    int subcarriers_per_prb = 12;
    double subcarrier_spacing_hz = 15e3;
};

struct Target {
    double delay_s = 0.0;
    double normalized_doppler = 0.0;  // cycles per pulse, in (-0.5, 0.5]
    double angle_deg = 0.0;
    double attenuation_db = 0.0;  // two-way power attenuation
};

struct RadarParams {
    int n_tx = 2;
    int n_rx = 2;
    int code_length = 400;  // N transmit samples per pulse
    double pri_s = 20e-6;
    int n_pulses = 64;
    double sample_rate_hz = 40e6;
    double noise_power_db = -8.0;

    // Fast-time samples per PRI; code_length / window() is the duty cycle.
    int window() const { return static_cast<int>(std::lround(pri_s * sample_rate_hz)); }
};

// Received fast-time data, [rx][pulse][fast-time] contiguous.
struct RxCube {
    int n_rx = 0;
    int n_pulses = 0;
    int w = 0;
    double sample_rate_hz = 0.0;
    cvec data;

    cplx& at(int r, int p, int i) {
        return data[(static_cast<std::size_t>(r) * n_pulses + p) * w + i];
    }
    const cplx& at(int r, int p, int i) const {
        return data[(static_cast<std::size_t>(r) * n_pulses + p) * w + i];
    }
};

// Matched-filter outputs, one (tx, rx) channel each holding n_pulses rows of
// w fast-time cells.
struct MfOutput {
    int n_tx = 0;
    int n_rx = 0;
    int n_pulses = 0;
    int w = 0;
    double sample_rate_hz = 0.0;
    std::vector<cvec> channel;  // index tx * n_rx + rx, layout [pulse][cell]
};

struct RangeDopplerMap {
    int n_tx = 0;
    int n_rx = 0;
    int n_cells = 0;
    int n_pulses = 0;
    double sample_rate_hz = 0.0;
    std::vector<dvec> mag;  // per channel, layout [doppler_bin][cell], |value|

    double cell_delay_s(int cell) const { return cell / sample_rate_hz; }
    // Doppler of bin b, wrapped into (-0.5, 0.5].
    double bin_doppler(int bin) const {
        const double f = static_cast<double>(bin) / n_pulses;
        return f > 0.5 ? f - 1.0 : f;
    }
    // Summed |value|^2 across channels.
    double power(int bin, int cell) const;
};

struct CellIndex {
    int range_cell = 0;
    int doppler_bin = 0;  // 0 .. n_pulses-1 (negative Doppler in the upper half)
};

struct Band {
    double lo_hz = 0.0;
    double hi_hz = 0.0;
};

// Resolved synthesis grid for an InterferenceSpec at a given sample rate:
// the subcarrier spacing snaps to sample_rate / symbol_samples so that each
// subcarrier is an exact DFT bin of one symbol window.
struct InterferenceGrid {
    int n_subcarriers = 0;   // full grid, occupied or not
    int symbol_samples = 0;  // samples per OFDM-style symbol
    double spacing_hz = 0.0;
    double offset_norm = 0.0;        // center offset, cycles/sample
    std::vector<int> occupied;       // subcarrier indices carrying symbols

    // Frequency of subcarrier j in cycles/sample, including the offset;
    // j = n_subcarriers/2 sits at the (offset) center.
    double freq_norm(int j) const;
    double freq_hz(int j, double sample_rate_hz) const {
        return freq_norm(j) * sample_rate_hz;
    }
};

InterferenceGrid resolve_grid(const InterferenceSpec& spec, double sample_rate_hz);

// Unit-symbol synthesis: symbols[s][k] rides occupied subcarrier
// grid.occupied[k] during symbol s; windows are back to back with no cyclic
// prefix, the tail symbol is truncated at n_samples. No power calibration.
cvec synth_symbols(const InterferenceGrid& grid, const std::vector<cvec>& symbols, int n_samples);

// Random-QPSK interference on the occupied subcarriers, total power
// calibrated to spec.power_dbm over the emitted samples.
cvec gen_interference(const InterferenceSpec& spec, int n_samples, double sample_rate_hz,
                      RngSpec rng);

// Target echoes + noise + optional sample-aligned interference (length >=
// n_pulses * window). Each target delays the superposition of every tx
// waveform, rotates pulse p by e^{j 2 pi f_d p}, and applies the
// half-wavelength ULA phase e^{j pi e sin(angle)} across rx elements.
RxCube gen_echo(const SequenceSet& waveforms, const std::vector<Target>& targets,
                const RadarParams& params, const cvec* interference, RngSpec rng);

// Correlate every rx fast-time stream against every tx waveform.
MfOutput matched_filter(const RxCube& cube, const SequenceSet& waveforms);

// DFT across pulses per range cell; stores magnitudes. The window applies to
// the pulse axis (rectangular keeps the coherent-gain oracle exact; Hann is
// what the scenario driver uses to keep off-bin leakage out of the SINR
// training ring).
RangeDopplerMap range_doppler(const MfOutput& mf, Window slow_time_window = Window::Rectangular);

// Peak power within +-1 cell of the nominal location over the mean power of
// the training ring (Chebyshev shell guard < d <= guard + training around
// the found peak; Doppler wraps, range clamps).
double measure_sinr(const RangeDopplerMap& map, CellIndex cell, int guard = 2, int training = 4);

// Welch-averaged periodogram aggregated into bin_hz bins; bins whose power
// exceeds the median by threshold_db merge into occupied bands. Frequencies
// are signed baseband Hz in (-sample_rate/2, sample_rate/2].
std::vector<Band> energy_detect(const cvec& signal, double sample_rate_hz, double bin_hz,
                                double threshold_db_over_floor);

// Intersect occupied bands (absolute Hz) with the radar band
// [center - bw/2, center + bw/2] and convert to normalized stopbands on the
// length-N design grid: f >= 0 maps to f/bw, f < 0 to 1 + f/bw, bands
// straddling 0 split. Throws DegenerateMaskError when nothing is left to
// transmit in.
SpectralMask sense_to_mask(const std::vector<Band>& bands, double radar_center_hz,
                           double radar_bandwidth_hz, int n_bins);

// ---- comms-side proxy ----------------------------------------------------

enum class Constellation { Qpsk, Qam16, Qam64 };

// Unit-mean-power points; hard decisions go to the nearest point.
cvec constellation_points(Constellation c);
const char* constellation_name(Constellation c);

struct CommsLinkResult {
    double evm = 0.0;  // rms error / rms reference, linear fraction
    double ser = 0.0;  // hard-decision symbol error rate
};

// Project rx onto the occupied subcarriers symbol by symbol and compare with
// the transmitted symbols scaled by amp (the per-subcarrier reference
// amplitude used at synthesis time).
CommsLinkResult demod_comms(const cvec& rx, const InterferenceGrid& grid,
                            const std::vector<cvec>& symbols, double amp, Constellation c);

// ---- scenario driver -----------------------------------------------------

struct Scenario {
    RadarParams radar;
    std::vector<Target> targets;
    InterferenceSpec interference;                       // power_dbm ignored; see sweep
    std::vector<double> interference_power_dbm{-20.0, -5.0, 10.0};

    double sense_bin_hz = 1e6;
    double sense_threshold_db = 10.0;

    double design_theta = 0.75;
    int design_max_sweeps = 40;

    double comms_noise_db = -30.0;            // at the comms receiver
    double radar_to_comms_coupling_db = -12.0;

    int n_trials = 10;
    std::uint64_t seed = 1;
};

Scenario default_scenario();  // Table-style two-target setup used throughout

// One simulated step: 1 radar only, 2 comms only, 3 both with random-phase
// waveforms, 4 both with waveforms redesigned against the sensed mask.
struct StepMetrics {
    int step = 0;
    double interference_power_dbm = 0.0;
    int trial = 0;
    std::vector<double> sinr_db;             // per target; empty for step 2
    std::vector<double> evm;                 // per constellation; empty for step 1
    std::vector<double> ser;
};

struct CoexistReport {
    std::vector<StepMetrics> rows;           // every (power, trial, step)
    std::vector<Stopband> sensed_stopbands;  // from the highest power's last trial
    // Detected bands (Hz) from the same trial; if sensing ever left no
    // passband the offending trial's bands are kept here instead.
    std::vector<Band> sensed_bands_hz;
    bool sensing_degenerate = false;
    // Combined (channel-summed power) range-Doppler maps at the highest
    // power: step-3 and step-4, last trial, for map CSV export.
    std::optional<RangeDopplerMap> map_random;
    std::optional<RangeDopplerMap> map_optimized;
};

CoexistReport run_scenario(const Scenario& sc);

// Linear-power mean of a dB metric across trials for one (power, step).
double mean_db(const std::vector<double>& values_db);

}  // namespace notchset::sim
