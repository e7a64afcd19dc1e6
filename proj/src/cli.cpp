#include "notchset/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "notchset/correlation.hpp"
#include "notchset/optimizer.hpp"
#include "notchset/seqset.hpp"
#include "notchset/simulate.hpp"
#include "notchset/spectral.hpp"
#include "notchset/version.hpp"

namespace notchset::cli {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty()) return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

int fail(const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
}

}  // namespace

int cmd_design(const io::json& config, const std::string& out_dir) try {
    const io::DesignConfig cfg = io::design_config_from_json(config);
    ensure_dir(out_dir);

    const SpectralMask mask = band_to_bins(cfg.stopbands, cfg.n_samples);
    const SequenceSet init =
        random_phase_set(cfg.n_seq, cfg.n_samples, cfg.alphabet, {cfg.seed, cfg.stream});
    CdConfig cd;
    cd.theta = cfg.theta;
    cd.alphabet = cfg.alphabet;
    cd.zeta = cfg.zeta;
    cd.max_sweeps = cfg.max_sweeps;
    cd.grid_points = cfg.grid_points;
    const DesignResult result = cd_design(init, mask, cd);

    save_sequences_csv(result.final, join_path(out_dir, "sequences.csv"));
    io::save_trace_csv(join_path(out_dir, "trace.csv"), result);

    io::RunManifest m;
    m.command = "design";
    m.config = io::design_config_to_json(cfg);
    m.version = kVersion;
    m.mask_hash = io::mask_hash(mask);
    m.outputs = {"sequences.csv", "trace.csv"};
    io::save_manifest(join_path(out_dir, "run_manifest.json"), m);

    std::printf("design: g %.6g -> %.6g in %d sweep(s)%s\n", result.objective_trace.front(),
                result.objective_trace.back(), result.sweeps,
                result.converged ? "" : " (sweep cap)");
    if (!result.converged) {
        std::fprintf(stderr, "warning: sweep cap reached before the convergence threshold\n");
        return 2;
    }
    return 0;
} catch (const std::exception& e) {
    return fail(e);
}

int cmd_evaluate(const io::json& config, const std::string& out_dir) try {
    const io::EvaluateConfig cfg = io::evaluate_config_from_json(config);
    ensure_dir(out_dir);

    const std::optional<int> levels =
        cfg.expected_levels > 0 ? std::optional<int>(cfg.expected_levels) : std::nullopt;
    const SequenceSet set = load_sequences_csv(cfg.sequences_csv, levels);
    const int m_seq = set.n_seq();
    const int n = set.n_samples();

    std::vector<Stopband> stop;
    if (!cfg.mask_file.empty()) stop = load_mask_file(cfg.mask_file);
    const SpectralMask mask = band_to_bins(stop, n);
    if (mask.degenerate()) throw ParamError("mask leaves no passband to evaluate against");
    const SilrResult sr = silr(set, mask);
    const SetCorrelationSummary cs = correlation_summary(set);

    io::json rep;
    rep["n_seq"] = m_seq;
    rep["n_samples"] = n;
    rep["alphabet"] = set.alphabet().is_discrete()
                          ? io::json{{"kind", "discrete"}, {"levels", set.alphabet().levels}}
                          : io::json{{"kind", "continuous"}};
    rep["g_s"] = sr.ratio;
    rep["g_s_db"] = sr.ratio > 0.0 ? io::json(db10(sr.ratio)) : io::json();
    rep["stopband_energy"] = sr.num;
    rep["passband_energy"] = sr.den;
    rep["g_c"] = cs.iccl_scaled;
    rep["g_c_raw"] = cs.iccl_raw;
    rep["isl"] = cs.isl;
    rep["islr_db"] = cs.islr_db;
    rep["islr_bound_db"] = m_seq > 1 ? io::json(cs.bound_db) : io::json();
    rep["bound_gap_db"] = m_seq > 1 ? io::json(cs.islr_db - cs.bound_db) : io::json();
    rep["peak_cross_correlation_db"] =
        m_seq > 1 ? io::json(peak_cross_correlation_db(set)) : io::json();

    io::json pairs = io::json::array();
    for (int a = 0; a < m_seq; ++a)
        for (int b = a + 1; b < m_seq; ++b) {
            const cvec xa(set.row(a), set.row(a) + n), xb(set.row(b), set.row(b) + n);
            const CorrelationProfile prof = xcorr_fft(xa, xb);
            double peak = 0.0;
            for (const auto& v : prof.values) peak = std::max(peak, std::abs(v));
            pairs.push_back(io::json{{"a", a}, {"b", b}, {"peak_db", db20(std::max(peak / n, 1e-300))}});
        }
    rep["pairs"] = pairs;
    io::write_text_file(join_path(out_dir, "report.json"), rep.dump(2) + "\n");

    io::RunManifest man;
    man.command = "evaluate";
    man.config = io::evaluate_config_to_json(cfg);
    man.version = kVersion;
    man.mask_hash = io::mask_hash(mask);
    man.outputs = {"report.json"};
    const int nfft = std::max(cfg.psd_nfft, n);
    for (int s = 0; s < m_seq; ++s) {
        const cvec x(set.row(s), set.row(s) + n);
        const std::string name = "psd_seq" + std::to_string(s) + ".csv";
        save_psd_csv(psd(x, nfft), join_path(out_dir, name));
        man.outputs.push_back(name);
    }
    io::save_manifest(join_path(out_dir, "run_manifest.json"), man);
    return 0;
} catch (const std::exception& e) {
    return fail(e);
}

int cmd_simulate(const io::json& config, const std::string& out_dir) try {
    const sim::Scenario sc = io::scenario_from_json(config);
    ensure_dir(out_dir);

    const sim::CoexistReport rep = sim::run_scenario(sc);

    io::save_metrics_csv(join_path(out_dir, "metrics.csv"), rep.rows);
    io::save_summary_csv(join_path(out_dir, "summary.csv"), rep.rows);
    io::save_bands_csv(join_path(out_dir, "sensed_bands.csv"), rep.sensed_bands_hz);
    io::save_stopbands_csv(join_path(out_dir, "sensed_stopbands.csv"), rep.sensed_stopbands);

    io::RunManifest man;
    man.command = "simulate";
    man.config = io::scenario_to_json(sc);
    man.version = kVersion;
    man.outputs = {"metrics.csv", "summary.csv", "sensed_bands.csv", "sensed_stopbands.csv"};
    for (int step = 1; step <= 4; ++step) {
        const std::string name = "step" + std::to_string(step) + "_metrics.csv";
        io::save_step_metrics_csv(join_path(out_dir, name), rep.rows, step);
        man.outputs.push_back(name);
    }
    if (rep.map_random) {
        io::save_map_csv(join_path(out_dir, "map_random.csv"), *rep.map_random);
        man.outputs.push_back("map_random.csv");
    }
    if (rep.map_optimized) {
        io::save_map_csv(join_path(out_dir, "map_optimized.csv"), *rep.map_optimized);
        man.outputs.push_back("map_optimized.csv");
    }
    io::save_manifest(join_path(out_dir, "run_manifest.json"), man);

    if (rep.sensing_degenerate) {
        std::fprintf(stderr,
                     "error: sensing left no usable passband; see sensed_bands.csv "
                     "(optimized steps reused the random waveforms)\n");
        return 1;
    }
    return 0;
} catch (const std::exception& e) {
    return fail(e);
}

int cmd_sense(const io::json& config, const std::string& out_dir) try {
    const io::SenseConfig cfg = io::sense_config_from_json(config);
    ensure_dir(out_dir);

    cvec signal;
    if (!cfg.signal_csv.empty())
        signal = io::load_signal_csv(cfg.signal_csv);
    else
        signal = sim::gen_interference(cfg.interference, cfg.n_samples, cfg.sample_rate_hz,
                                       {cfg.seed, cfg.stream});

    const std::vector<sim::Band> bands =
        sim::energy_detect(signal, cfg.sample_rate_hz, cfg.bin_hz, cfg.threshold_db);
    io::save_bands_csv(join_path(out_dir, "bands.csv"), bands);

    const double bw = cfg.radar_bandwidth_hz > 0.0 ? cfg.radar_bandwidth_hz : cfg.sample_rate_hz;
    int code = 0;
    std::uint64_t hash = 0;
    std::vector<std::string> outputs = {"bands.csv"};
    try {
        const SpectralMask mask = sim::sense_to_mask(bands, cfg.radar_center_hz, bw, cfg.mask_bins);
        save_mask_file(mask.stopbands, join_path(out_dir, "mask.json"));
        hash = io::mask_hash(mask);
        outputs.push_back("mask.json");
    } catch (const DegenerateMaskError& e) {
        std::fprintf(stderr, "warning: %s\n", e.what());
        code = 2;
    }

    io::RunManifest man;
    man.command = "sense";
    man.config = io::sense_config_to_json(cfg);
    man.version = kVersion;
    man.mask_hash = hash;
    man.outputs = outputs;
    io::save_manifest(join_path(out_dir, "run_manifest.json"), man);
    return code;
} catch (const std::exception& e) {
    return fail(e);
}

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir) try {
    const io::RunManifest m = io::load_manifest(manifest_path);
    if (m.command == "design") return cmd_design(m.config, out_dir);
    if (m.command == "evaluate") return cmd_evaluate(m.config, out_dir);
    if (m.command == "simulate") return cmd_simulate(m.config, out_dir);
    if (m.command == "sense") return cmd_sense(m.config, out_dir);
    throw ParamError("manifest: unknown command \"" + m.command + "\"");
} catch (const std::exception& e) {
    return fail(e);
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Constant-modulus sequence-set design with spectral notches, plus a "
                 "radar/communications coexistence harness"};
    app.require_subcommand(1);

    // design
    std::string d_config, d_out;
    int d_nseq = 0, d_nsamp = 0, d_levels = 0, d_max = 0, d_grid = 0;
    double d_theta = 0.0, d_zeta = 0.0;
    std::uint64_t d_seed = 0, d_stream = 0;
    std::vector<std::string> d_stop;
    auto* d = app.add_subcommand("design", "Run cyclic coordinate descent from a random init");
    d->add_option("--config", d_config, "JSON config file");
    d->add_option("--out", d_out, "output directory")->required();
    d->add_option("--n-seq", d_nseq, "number of sequences M");
    d->add_option("--n-samples", d_nsamp, "sequence length N");
    d->add_option("--theta", d_theta, "objective weight in [0,1]; 1 = spectrum only");
    d->add_option("--levels", d_levels, "phase levels L; 0 = continuous phases");
    d->add_option("--stopband", d_stop, "normalized stopband lo:hi (repeatable)");
    d->add_option("--zeta", d_zeta, "Frobenius-change stop threshold");
    d->add_option("--max-sweeps", d_max, "sweep cap");
    d->add_option("--grid-points", d_grid, "continuous-phase search grid size");
    d->add_option("--seed", d_seed, "RNG seed");
    d->add_option("--stream", d_stream, "RNG stream id");

    // evaluate
    std::string e_config, e_out, e_seq, e_mask;
    int e_nfft = 0, e_levels = 0;
    auto* e = app.add_subcommand("evaluate", "Report spectral/correlation metrics for a set");
    e->add_option("--config", e_config, "JSON config file");
    e->add_option("--out", e_out, "output directory")->required();
    e->add_option("--sequences", e_seq, "sequence CSV to evaluate");
    e->add_option("--mask", e_mask, "stopband mask JSON");
    e->add_option("--psd-nfft", e_nfft, "PSD FFT size");
    e->add_option("--levels", e_levels, "expected discrete levels; 0 = infer");

    // simulate
    std::string s_config, s_out;
    int s_trials = 0, s_max = 0;
    double s_theta = 0.0;
    std::uint64_t s_seed = 0;
    std::vector<double> s_powers;
    auto* s = app.add_subcommand("simulate", "Run the four-step coexistence protocol");
    s->add_option("--config", s_config, "scenario JSON (defaults to the built-in scenario)");
    s->add_option("--out", s_out, "output directory")->required();
    s->add_option("--trials", s_trials, "Monte-Carlo trials per power");
    s->add_option("--seed", s_seed, "scenario RNG seed");
    s->add_option("--power", s_powers, "interference power sweep, dB (repeatable)");
    s->add_option("--design-theta", s_theta, "objective weight for the redesign step");
    s->add_option("--design-max-sweeps", s_max, "sweep cap for the redesign step");

    // sense
    std::string n_config, n_out, n_signal, n_alloc;
    int n_samples = 0, n_bins = 0;
    double n_fs = 0.0, n_bin = 0.0, n_thr = 0.0, n_pow = 0.0;
    std::uint64_t n_seed = 0;
    auto* sn = app.add_subcommand("sense", "Detect occupied bands and emit a design mask");
    sn->add_option("--config", n_config, "JSON config file");
    sn->add_option("--out", n_out, "output directory")->required();
    sn->add_option("--signal", n_signal, "re,im CSV of captured samples");
    sn->add_option("--sample-rate-hz", n_fs, "capture sample rate");
    sn->add_option("--n-samples", n_samples, "synthesized capture length");
    sn->add_option("--allocation", n_alloc, "synthesized allocation bitmap (0/1 string)");
    sn->add_option("--power-dbm", n_pow, "synthesized interference power");
    sn->add_option("--bin-hz", n_bin, "detector bin width");
    sn->add_option("--threshold-db", n_thr, "detection threshold over the median floor");
    sn->add_option("--mask-bins", n_bins, "design grid size N for the mask");
    sn->add_option("--seed", n_seed, "RNG seed for the synthesized capture");

    // rerun
    std::string r_manifest, r_out;
    auto* rr = app.add_subcommand("rerun", "Re-execute a command from its run manifest");
    rr->add_option("manifest", r_manifest, "run_manifest.json path")->required();
    rr->add_option("--out", r_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& pe) {
        const int r = app.exit(pe);
        return r == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(d)) {
            io::json cfg = d_config.empty() ? io::json::object() : io::parse_json_file(d_config);
            if (d->count("--n-seq")) cfg["n_seq"] = d_nseq;
            if (d->count("--n-samples")) cfg["n_samples"] = d_nsamp;
            if (d->count("--theta")) cfg["theta"] = d_theta;
            if (d->count("--levels")) {
                if (d_levels > 0)
                    cfg["alphabet"] = io::json{{"kind", "discrete"}, {"levels", d_levels}};
                else
                    cfg["alphabet"] = io::json{{"kind", "continuous"}};
            }
            if (d->count("--stopband")) {
                io::json arr = io::json::array();
                for (const auto& sb : d_stop) {
                    double lo = 0.0, hi = 0.0;
                    if (std::sscanf(sb.c_str(), "%lf:%lf", &lo, &hi) != 2)
                        throw ParamError("--stopband expects lo:hi, got \"" + sb + "\"");
                    arr.push_back(io::json::array({lo, hi}));
                }
                cfg["stopbands"] = arr;
            }
            if (d->count("--zeta")) cfg["zeta"] = d_zeta;
            if (d->count("--max-sweeps")) cfg["max_sweeps"] = d_max;
            if (d->count("--grid-points")) cfg["grid_points"] = d_grid;
            if (d->count("--seed")) cfg["seed"] = d_seed;
            if (d->count("--stream")) cfg["stream"] = d_stream;
            return cmd_design(cfg, d_out);
        }
        if (app.got_subcommand(e)) {
            io::json cfg = e_config.empty() ? io::json::object() : io::parse_json_file(e_config);
            if (e->count("--sequences")) cfg["sequences_csv"] = e_seq;
            if (e->count("--mask")) cfg["mask_file"] = e_mask;
            if (e->count("--psd-nfft")) cfg["psd_nfft"] = e_nfft;
            if (e->count("--levels")) cfg["expected_levels"] = e_levels;
            return cmd_evaluate(cfg, e_out);
        }
        if (app.got_subcommand(s)) {
            io::json cfg = s_config.empty() ? io::json::object() : io::parse_json_file(s_config);
            if (s->count("--trials")) cfg["n_trials"] = s_trials;
            if (s->count("--seed")) cfg["seed"] = s_seed;
            if (s->count("--power")) cfg["interference_power_dbm"] = s_powers;
            if (s->count("--design-theta")) cfg["design_theta"] = s_theta;
            if (s->count("--design-max-sweeps")) cfg["design_max_sweeps"] = s_max;
            return cmd_simulate(cfg, s_out);
        }
        if (app.got_subcommand(sn)) {
            io::json cfg = n_config.empty() ? io::json::object() : io::parse_json_file(n_config);
            if (sn->count("--signal")) cfg["signal_csv"] = n_signal;
            if (sn->count("--sample-rate-hz")) cfg["sample_rate_hz"] = n_fs;
            if (sn->count("--n-samples")) cfg["n_samples"] = n_samples;
            if (sn->count("--allocation")) cfg["interference"]["allocation"] = n_alloc;
            if (sn->count("--power-dbm")) cfg["interference"]["power_dbm"] = n_pow;
            if (sn->count("--bin-hz")) cfg["bin_hz"] = n_bin;
            if (sn->count("--threshold-db")) cfg["threshold_db"] = n_thr;
            if (sn->count("--mask-bins")) cfg["mask_bins"] = n_bins;
            if (sn->count("--seed")) cfg["seed"] = n_seed;
            return cmd_sense(cfg, n_out);
        }
        return cmd_rerun(r_manifest, r_out);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}

}  // namespace notchset::cli
