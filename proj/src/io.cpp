#include "notchset/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace notchset::io {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw ParamError("config: " + path + " " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad_field(path, "must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ParamError("config: unknown field " + path + "." + it.key());
    }
}

double get_num(const json& j, const std::string& path, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_number()) bad_field(path + "." + key, "must be a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) bad_field(path + "." + key, "must be an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path, const char* key,
                      std::uint64_t dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    // values above INT64_MAX are stored unsigned; check that case first so
    // the signed read below never overflows
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        bad_field(path + "." + key, "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_string()) bad_field(path + "." + key, "must be a string");
    return v.get<std::string>();
}

std::vector<Stopband> get_stopbands(const json& j, const std::string& path, const char* key,
                                    std::vector<Stopband> dflt) {
    if (!j.contains(key)) return dflt;
    const auto& arr = j.at(key);
    const std::string p = path + "." + key;
    if (!arr.is_array()) bad_field(p, "must be an array of [lo, hi] pairs");
    std::vector<Stopband> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& el = arr[i];
        const std::string pe = p + "[" + std::to_string(i) + "]";
        if (!el.is_array() || el.size() != 2 || !el[0].is_number() || !el[1].is_number())
            bad_field(pe, "must be a [lo, hi] number pair");
        out.push_back({el[0].get<double>(), el[1].get<double>()});
    }
    return out;
}

sim::InterferenceSpec parse_interference(const json& a, const std::string& p,
                                         sim::InterferenceSpec sp) {
    check_keys(a, p,
               {"allocation", "prb_per_bit", "bandwidth_hz", "center_offset_hz", "power_dbm",
                "subcarriers_per_prb", "subcarrier_spacing_hz"});
    sp.allocation = get_str(a, p, "allocation", sp.allocation);
    sp.prb_per_bit = get_int(a, p, "prb_per_bit", sp.prb_per_bit);
    sp.bandwidth_hz = get_num(a, p, "bandwidth_hz", sp.bandwidth_hz);
    sp.center_offset_hz = get_num(a, p, "center_offset_hz", sp.center_offset_hz);
    sp.power_dbm = get_num(a, p, "power_dbm", sp.power_dbm);
    sp.subcarriers_per_prb = get_int(a, p, "subcarriers_per_prb", sp.subcarriers_per_prb);
    sp.subcarrier_spacing_hz = get_num(a, p, "subcarrier_spacing_hz", sp.subcarrier_spacing_hz);
    return sp;
}

json interference_to_json(const sim::InterferenceSpec& sp) {
    json interf;
    interf["allocation"] = sp.allocation;
    interf["prb_per_bit"] = sp.prb_per_bit;
    interf["bandwidth_hz"] = sp.bandwidth_hz;
    interf["center_offset_hz"] = sp.center_offset_hz;
    interf["power_dbm"] = sp.power_dbm;
    interf["subcarriers_per_prb"] = sp.subcarriers_per_prb;
    interf["subcarrier_spacing_hz"] = sp.subcarrier_spacing_hz;
    return interf;
}

// RAII stdio writer: fprintf with %.17g keeps reruns byte-identical.
struct CsvFile {
    std::FILE* f = nullptr;
    explicit CsvFile(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw ParamError("cannot open for writing: " + path);
    }
    ~CsvFile() {
        if (f) std::fclose(f);
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;
};

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParamError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParamError("cannot open for writing: " + path);
    out << text;
    if (!out) throw ParamError("write failed: " + path);
}

json parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParamError("invalid JSON in " + path);
    return j;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mask_hash(const SpectralMask& mask) {
    if (mask.undesired.empty()) return 0;
    std::string buf = std::to_string(mask.n_bins);
    buf += "U";
    for (int b : mask.undesired) {
        buf += std::to_string(b);
        buf += ',';
    }
    return fnv1a(buf);
}

// ---- configs -------------------------------------------------------------

DesignConfig design_config_from_json(const json& j) {
    const std::string r = "$";
    check_keys(j, r,
               {"n_seq", "n_samples", "alphabet", "theta", "stopbands", "zeta", "max_sweeps",
                "grid_points", "seed", "stream"});
    DesignConfig c;
    c.n_seq = get_int(j, r, "n_seq", c.n_seq);
    c.n_samples = get_int(j, r, "n_samples", c.n_samples);
    c.theta = get_num(j, r, "theta", c.theta);
    if (c.theta < 0.0 || c.theta > 1.0) bad_field("$.theta", "must lie in [0, 1]");
    c.stopbands = get_stopbands(j, r, "stopbands", c.stopbands);
    c.zeta = get_num(j, r, "zeta", c.zeta);
    c.max_sweeps = get_int(j, r, "max_sweeps", c.max_sweeps);
    c.grid_points = get_int(j, r, "grid_points", c.grid_points);
    c.seed = get_u64(j, r, "seed", c.seed);
    c.stream = get_u64(j, r, "stream", c.stream);
    if (j.contains("alphabet")) {
        const auto& a = j.at("alphabet");
        check_keys(a, "$.alphabet", {"kind", "levels"});
        const std::string kind = get_str(a, "$.alphabet", "kind", "continuous");
        if (kind == "continuous") {
            c.alphabet = PhaseAlphabet::continuous();
        } else if (kind == "discrete") {
            const int levels = get_int(a, "$.alphabet", "levels", 0);
            if (levels < 2) bad_field("$.alphabet.levels", "must be an integer >= 2");
            c.alphabet = PhaseAlphabet::discrete(levels);
        } else {
            bad_field("$.alphabet.kind", "must be \"continuous\" or \"discrete\"");
        }
    }
    return c;
}

json design_config_to_json(const DesignConfig& c) {
    json a;
    if (c.alphabet.is_discrete()) {
        a["kind"] = "discrete";
        a["levels"] = c.alphabet.levels;
    } else {
        a["kind"] = "continuous";
    }
    json s = json::array();
    for (const auto& b : c.stopbands) s.push_back(json::array({b.lo, b.hi}));
    json j;
    j["n_seq"] = c.n_seq;
    j["n_samples"] = c.n_samples;
    j["alphabet"] = a;
    j["theta"] = c.theta;
    j["stopbands"] = s;
    j["zeta"] = c.zeta;
    j["max_sweeps"] = c.max_sweeps;
    j["grid_points"] = c.grid_points;
    j["seed"] = c.seed;
    j["stream"] = c.stream;
    return j;
}

sim::Scenario scenario_from_json(const json& j) {
    sim::Scenario sc = sim::default_scenario();
    const std::string r = "$";
    check_keys(j, r,
               {"radar", "targets", "interference", "interference_power_dbm", "sense_bin_hz",
                "sense_threshold_db", "design_theta", "design_max_sweeps", "comms_noise_db",
                "radar_to_comms_coupling_db", "n_trials", "seed"});
    if (j.contains("radar")) {
        const auto& a = j.at("radar");
        const std::string p = "$.radar";
        check_keys(a, p,
                   {"n_tx", "n_rx", "code_length", "pri_s", "n_pulses", "sample_rate_hz",
                    "noise_power_db"});
        sc.radar.n_tx = get_int(a, p, "n_tx", sc.radar.n_tx);
        sc.radar.n_rx = get_int(a, p, "n_rx", sc.radar.n_rx);
        sc.radar.code_length = get_int(a, p, "code_length", sc.radar.code_length);
        sc.radar.pri_s = get_num(a, p, "pri_s", sc.radar.pri_s);
        sc.radar.n_pulses = get_int(a, p, "n_pulses", sc.radar.n_pulses);
        sc.radar.sample_rate_hz = get_num(a, p, "sample_rate_hz", sc.radar.sample_rate_hz);
        sc.radar.noise_power_db = get_num(a, p, "noise_power_db", sc.radar.noise_power_db);
    }
    if (j.contains("targets")) {
        const auto& arr = j.at("targets");
        if (!arr.is_array()) bad_field("$.targets", "must be an array");
        sc.targets.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "$.targets[" + std::to_string(i) + "]";
            const auto& a = arr[i];
            check_keys(a, p, {"delay_s", "normalized_doppler", "angle_deg", "attenuation_db"});
            sim::Target t;
            t.delay_s = get_num(a, p, "delay_s", 0.0);
            t.normalized_doppler = get_num(a, p, "normalized_doppler", 0.0);
            t.angle_deg = get_num(a, p, "angle_deg", 0.0);
            t.attenuation_db = get_num(a, p, "attenuation_db", 0.0);
            sc.targets.push_back(t);
        }
    }
    if (j.contains("interference"))
        sc.interference =
            parse_interference(j.at("interference"), "$.interference", sc.interference);
    if (j.contains("interference_power_dbm")) {
        const auto& arr = j.at("interference_power_dbm");
        if (!arr.is_array()) bad_field("$.interference_power_dbm", "must be an array of numbers");
        sc.interference_power_dbm.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_number())
                bad_field("$.interference_power_dbm[" + std::to_string(i) + "]",
                          "must be a number");
            sc.interference_power_dbm.push_back(arr[i].get<double>());
        }
    }
    sc.sense_bin_hz = get_num(j, r, "sense_bin_hz", sc.sense_bin_hz);
    sc.sense_threshold_db = get_num(j, r, "sense_threshold_db", sc.sense_threshold_db);
    sc.design_theta = get_num(j, r, "design_theta", sc.design_theta);
    if (sc.design_theta < 0.0 || sc.design_theta > 1.0)
        bad_field("$.design_theta", "must lie in [0, 1]");
    sc.design_max_sweeps = get_int(j, r, "design_max_sweeps", sc.design_max_sweeps);
    sc.comms_noise_db = get_num(j, r, "comms_noise_db", sc.comms_noise_db);
    sc.radar_to_comms_coupling_db =
        get_num(j, r, "radar_to_comms_coupling_db", sc.radar_to_comms_coupling_db);
    sc.n_trials = get_int(j, r, "n_trials", sc.n_trials);
    sc.seed = get_u64(j, r, "seed", sc.seed);
    return sc;
}

json scenario_to_json(const sim::Scenario& sc) {
    json radar;
    radar["n_tx"] = sc.radar.n_tx;
    radar["n_rx"] = sc.radar.n_rx;
    radar["code_length"] = sc.radar.code_length;
    radar["pri_s"] = sc.radar.pri_s;
    radar["n_pulses"] = sc.radar.n_pulses;
    radar["sample_rate_hz"] = sc.radar.sample_rate_hz;
    radar["noise_power_db"] = sc.radar.noise_power_db;

    json targets = json::array();
    for (const auto& t : sc.targets) {
        json a;
        a["delay_s"] = t.delay_s;
        a["normalized_doppler"] = t.normalized_doppler;
        a["angle_deg"] = t.angle_deg;
        a["attenuation_db"] = t.attenuation_db;
        targets.push_back(a);
    }

    json j;
    j["radar"] = radar;
    j["targets"] = targets;
    j["interference"] = interference_to_json(sc.interference);
    j["interference_power_dbm"] = sc.interference_power_dbm;
    j["sense_bin_hz"] = sc.sense_bin_hz;
    j["sense_threshold_db"] = sc.sense_threshold_db;
    j["design_theta"] = sc.design_theta;
    j["design_max_sweeps"] = sc.design_max_sweeps;
    j["comms_noise_db"] = sc.comms_noise_db;
    j["radar_to_comms_coupling_db"] = sc.radar_to_comms_coupling_db;
    j["n_trials"] = sc.n_trials;
    j["seed"] = sc.seed;
    return j;
}

EvaluateConfig evaluate_config_from_json(const json& j) {
    const std::string r = "$";
    check_keys(j, r, {"sequences_csv", "mask_file", "expected_levels", "psd_nfft"});
    EvaluateConfig c;
    c.sequences_csv = get_str(j, r, "sequences_csv", "");
    if (c.sequences_csv.empty()) bad_field("$.sequences_csv", "is required");
    c.mask_file = get_str(j, r, "mask_file", c.mask_file);
    c.expected_levels = get_int(j, r, "expected_levels", c.expected_levels);
    c.psd_nfft = get_int(j, r, "psd_nfft", c.psd_nfft);
    if (c.psd_nfft < 2) bad_field("$.psd_nfft", "must be >= 2");
    return c;
}

json evaluate_config_to_json(const EvaluateConfig& c) {
    json j;
    j["sequences_csv"] = c.sequences_csv;
    j["mask_file"] = c.mask_file;
    j["expected_levels"] = c.expected_levels;
    j["psd_nfft"] = c.psd_nfft;
    return j;
}

SenseConfig sense_config_from_json(const json& j) {
    const std::string r = "$";
    check_keys(j, r,
               {"signal_csv", "interference", "n_samples", "sample_rate_hz", "seed", "stream",
                "bin_hz", "threshold_db", "radar_center_hz", "radar_bandwidth_hz", "mask_bins"});
    SenseConfig c;
    c.signal_csv = get_str(j, r, "signal_csv", c.signal_csv);
    if (j.contains("interference"))
        c.interference = parse_interference(j.at("interference"), "$.interference",
                                            c.interference);
    c.n_samples = get_int(j, r, "n_samples", c.n_samples);
    c.sample_rate_hz = get_num(j, r, "sample_rate_hz", c.sample_rate_hz);
    c.seed = get_u64(j, r, "seed", c.seed);
    c.stream = get_u64(j, r, "stream", c.stream);
    c.bin_hz = get_num(j, r, "bin_hz", c.bin_hz);
    c.threshold_db = get_num(j, r, "threshold_db", c.threshold_db);
    c.radar_center_hz = get_num(j, r, "radar_center_hz", c.radar_center_hz);
    c.radar_bandwidth_hz = get_num(j, r, "radar_bandwidth_hz", c.radar_bandwidth_hz);
    c.mask_bins = get_int(j, r, "mask_bins", c.mask_bins);
    if (c.mask_bins < 1) bad_field("$.mask_bins", "must be >= 1");
    return c;
}

json sense_config_to_json(const SenseConfig& c) {
    json j;
    j["signal_csv"] = c.signal_csv;
    j["interference"] = interference_to_json(c.interference);
    j["n_samples"] = c.n_samples;
    j["sample_rate_hz"] = c.sample_rate_hz;
    j["seed"] = c.seed;
    j["stream"] = c.stream;
    j["bin_hz"] = c.bin_hz;
    j["threshold_db"] = c.threshold_db;
    j["radar_center_hz"] = c.radar_center_hz;
    j["radar_bandwidth_hz"] = c.radar_bandwidth_hz;
    j["mask_bins"] = c.mask_bins;
    return j;
}

// ---- run manifest --------------------------------------------------------

json manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["mask_hash"] = m.mask_hash;
    j["outputs"] = m.outputs;
    j["config"] = m.config;
    return j;
}

RunManifest manifest_from_json(const json& j) {
    check_keys(j, "$", {"command", "version", "mask_hash", "outputs", "config"});
    RunManifest m;
    m.command = get_str(j, "$", "command", "");
    if (m.command.empty()) bad_field("$.command", "is required");
    m.version = get_str(j, "$", "version", "");
    m.mask_hash = get_u64(j, "$", "mask_hash", 0);
    if (j.contains("outputs")) {
        const auto& arr = j.at("outputs");
        if (!arr.is_array()) bad_field("$.outputs", "must be an array of strings");
        for (const auto& s : arr) {
            if (!s.is_string()) bad_field("$.outputs", "must be an array of strings");
            m.outputs.push_back(s.get<std::string>());
        }
    }
    if (!j.contains("config")) bad_field("$.config", "is required");
    m.config = j.at("config");
    return m;
}

void save_manifest(const std::string& path, const RunManifest& m) {
    write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
    return manifest_from_json(parse_json_file(path));
}

// ---- CSV writers ---------------------------------------------------------

void save_trace_csv(const std::string& path, const DesignResult& result) {
    CsvFile csv(path);
    std::fprintf(csv.f, "sweep,g,g_s,g_c,delta_fro\n");
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
        const double delta = i == 0 ? 0.0 : result.delta_trace[i - 1];
        std::fprintf(csv.f, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, result.objective_trace[i],
                     result.gs_trace[i], result.gc_trace[i], delta);
    }
}

namespace {

void metric_rows(const sim::StepMetrics& m,
                 const std::function<void(const std::string&, double)>& emit) {
    for (std::size_t i = 0; i < m.sinr_db.size(); ++i)
        emit("sinr_target" + std::to_string(i + 1) + "_db", m.sinr_db[i]);
    static const sim::Constellation kAll[] = {sim::Constellation::Qpsk,
                                              sim::Constellation::Qam16,
                                              sim::Constellation::Qam64};
    for (std::size_t i = 0; i < m.evm.size(); ++i)
        emit(std::string("evm_") + sim::constellation_name(kAll[i]), m.evm[i]);
    for (std::size_t i = 0; i < m.ser.size(); ++i)
        emit(std::string("ser_") + sim::constellation_name(kAll[i]), m.ser[i]);
}

}  // namespace

void save_metrics_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows) {
    CsvFile csv(path);
    std::fprintf(csv.f, "step,interference_power_dbm,trial,metric,value\n");
    for (const auto& m : rows)
        metric_rows(m, [&](const std::string& name, double v) {
            std::fprintf(csv.f, "%d,%.17g,%d,%s,%.17g\n", m.step, m.interference_power_dbm,
                         m.trial, name.c_str(), v);
        });
}

void save_step_metrics_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows,
                           int step) {
    CsvFile csv(path);
    std::fprintf(csv.f, "interference_power_dbm,trial,metric,value_db\n");
    for (const auto& m : rows) {
        if (m.step != step) continue;
        metric_rows(m, [&](const std::string& name, double v) {
            std::fprintf(csv.f, "%.17g,%d,%s,%.17g\n", m.interference_power_dbm, m.trial,
                         name.c_str(), v);
        });
    }
}

void save_summary_csv(const std::string& path, const std::vector<sim::StepMetrics>& rows) {
    struct Bucket {
        double power;
        int step;
        std::string metric;
        std::vector<double> values;
    };
    std::vector<Bucket> buckets;  // first-appearance order keeps output stable
    for (const auto& m : rows)
        metric_rows(m, [&](const std::string& name, double v) {
            for (auto& b : buckets)
                if (b.power == m.interference_power_dbm && b.step == m.step &&
                    b.metric == name) {
                    b.values.push_back(v);
                    return;
                }
            buckets.push_back({m.interference_power_dbm, m.step, name, {v}});
        });

    CsvFile csv(path);
    std::fprintf(csv.f, "interference_power_dbm,step,metric,mean\n");
    for (const auto& b : buckets) {
        double mean;
        if (b.metric.size() >= 3 && b.metric.rfind("_db") == b.metric.size() - 3) {
            mean = sim::mean_db(b.values);
        } else {
            mean = 0.0;
            for (double v : b.values) mean += v;
            mean /= b.values.size();
        }
        std::fprintf(csv.f, "%.17g,%d,%s,%.17g\n", b.power, b.step, b.metric.c_str(), mean);
    }
}

void save_bands_csv(const std::string& path, const std::vector<sim::Band>& bands) {
    CsvFile csv(path);
    std::fprintf(csv.f, "lo_hz,hi_hz\n");
    for (const auto& b : bands) std::fprintf(csv.f, "%.17g,%.17g\n", b.lo_hz, b.hi_hz);
}

void save_stopbands_csv(const std::string& path, const std::vector<Stopband>& bands) {
    CsvFile csv(path);
    std::fprintf(csv.f, "lo,hi\n");
    for (const auto& b : bands) std::fprintf(csv.f, "%.17g,%.17g\n", b.lo, b.hi);
}

void save_map_csv(const std::string& path, const sim::RangeDopplerMap& map) {
    CsvFile csv(path);
    std::fprintf(csv.f, "range_cell,doppler_bin,mag_db\n");
    for (int c = 0; c < map.n_cells; ++c)
        for (int b = 0; b < map.n_pulses; ++b) {
            const double p = std::max(map.power(b, c), 1e-30);
            std::fprintf(csv.f, "%d,%d,%.17g\n", c, b, db10(p));
        }
}

void save_signal_csv(const std::string& path, const cvec& x) {
    CsvFile csv(path);
    std::fprintf(csv.f, "re,im\n");
    for (const auto& v : x) std::fprintf(csv.f, "%.17g,%.17g\n", v.real(), v.imag());
}

cvec load_signal_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    cvec out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && !line.empty() && (std::isalpha(static_cast<unsigned char>(line[0]))))
            continue;  // header
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &re, &im) != 2)
            throw ParamError("malformed signal CSV at line " + std::to_string(lineno) + ": " +
                             path);
        out.emplace_back(re, im);
    }
    return out;
}

}  // namespace notchset::io
