#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "notchset/optimizer.hpp"
#include "notchset/simulate.hpp"
#include "notchset/spectral.hpp"

// Artifact plumbing shared by the command-line drivers: config parsing with
// field-path error reporting, CSV writers (%.17g so reruns are byte-stable),
// and the run manifest that makes every output reproducible.

namespace notchset::io {

using json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
json parse_json_file(const std::string& path);

// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a(std::string_view bytes);
// Hash of the mask's resolved bin sets (stable across runs); 0 for an
// all-passband mask.
std::uint64_t mask_hash(const SpectralMask& mask);

// ---- configs -------------------------------------------------------------

struct DesignConfig {
    int n_seq = 2;
    int n_samples = 64;
    PhaseAlphabet alphabet = PhaseAlphabet::continuous();
    double theta = 1.0;
    std::vector<Stopband> stopbands;
    double zeta = 1e-5;
    int max_sweeps = 1000;
    int grid_points = 1024;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
};

// Strict parsers: unknown fields and type mismatches throw ParamError naming
// the offending field path. Absent fields keep their defaults.
DesignConfig design_config_from_json(const json& j);
json design_config_to_json(const DesignConfig& c);

sim::Scenario scenario_from_json(const json& j);
json scenario_to_json(const sim::Scenario& sc);

struct EvaluateConfig {
    std::string sequences_csv;  // required
    std::string mask_file;      // empty = all-passband mask
    int expected_levels = 0;    // 0 = infer from the file
    int psd_nfft = 4096;
};
EvaluateConfig evaluate_config_from_json(const json& j);
json evaluate_config_to_json(const EvaluateConfig& c);

struct SenseConfig {
    std::string signal_csv;  // empty -> synthesize from `interference`
    sim::InterferenceSpec interference;
    int n_samples = 65536;
    double sample_rate_hz = 40e6;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    double bin_hz = 1e6;
    double threshold_db = 10.0;
    double radar_center_hz = 0.0;
    double radar_bandwidth_hz = 0.0;  // 0 = sample_rate_hz
    int mask_bins = 400;
};
SenseConfig sense_config_from_json(const json& j);
json sense_config_to_json(const SenseConfig& c);

// ---- run manifest --------------------------------------------------------

struct RunManifest {
    std::string command;
    json config;  // full normalized snapshot (defaults materialized)
    std::string version;
    std::uint64_t mask_hash = 0;
    std::vector<std::string> outputs;  // file names relative to the out dir
};

json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);
void save_manifest(const std::string& path, const RunManifest& m);
RunManifest load_manifest(const std::string& path);

// ---- CSV writers ---------------------------------------------------------

// sweep,g,g_s,g_c,delta_fro ; row 0 is the initial objective with delta 0.
void save_trace_csv(const std::string& path, const DesignResult& result);

// step,interference_power_dbm,trial,metric,value ; one row per scalar.
void save_metrics_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows);

// One step's rows across the power sweep:
// interference_power_dbm,trial,metric,value_db. dB metrics carry _db in
// their names; the EVM/SER proxies are linear fractions.
void save_step_metrics_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows,
                           int step);

// interference_power_dbm,step,metric,mean ; dB metrics average in linear
// power, everything else arithmetically.
void save_summary_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows);

// lo_hz,hi_hz
void save_bands_csv(const std::string& path, const std::vector<sim::Band>& bands);

// lo,hi (normalized design frequencies)
void save_stopbands_csv(const std::string& path, const std::vector<Stopband>& bands);

// range_cell,doppler_bin,mag_db ; channel-summed power in dB, floor -300 dB.
void save_map_csv(const std::string& path, const sim::RangeDopplerMap& map);

// Two-column complex samples. Loader accepts an optional re,im header.
void save_signal_csv(const std::string& path, const cvec& x);
cvec load_signal_csv(const std::string& path);

}  // namespace notchset::io
