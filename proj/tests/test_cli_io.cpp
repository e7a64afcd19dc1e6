#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "notchset/cli.hpp"
#include "notchset/correlation.hpp"
#include "notchset/io.hpp"
#include "notchset/optimizer.hpp"

using namespace notchset;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) : path(fs::temp_directory_path() / tag) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
    std::string file(const char* name) const { return (path / name).string(); }
};

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

// summary.csv lookup: interference_power_dbm,step,metric,mean
double summary_mean(const std::string& path, int step, const std::string& metric) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string power, st, name, mean;
        std::getline(ss, power, ',');
        std::getline(ss, st, ',');
        std::getline(ss, name, ',');
        std::getline(ss, mean, ',');
        if (std::stoi(st) == step && name == metric) return std::stod(mean);
    }
    throw std::runtime_error("metric not found: " + metric);
}

}  // namespace

TEST_CASE("fnv1a known vectors and mask hashing") {
    CHECK(io::fnv1a("") == 14695981039346656037ull);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(io::fnv1a("hello") != io::fnv1a("hellp"));

    CHECK(io::mask_hash(band_to_bins({}, 64)) == 0);
    const auto m1 = band_to_bins({{0.1, 0.2}}, 64);
    const auto m2 = band_to_bins({{0.1, 0.2}}, 64);
    const auto m3 = band_to_bins({{0.1, 0.2}}, 128);
    CHECK(io::mask_hash(m1) == io::mask_hash(m2));
    CHECK(io::mask_hash(m1) != io::mask_hash(m3));
}

TEST_CASE("design config errors name the offending field") {
    CHECK_THROWS_WITH_AS(io::design_config_from_json({{"theta", 1.5}}),
                         doctest::Contains("$.theta"), ParamError);
    CHECK_THROWS_WITH_AS(io::design_config_from_json({{"bogus", 1}}),
                         doctest::Contains("$.bogus"), ParamError);
    CHECK_THROWS_WITH_AS(io::design_config_from_json({{"n_seq", "two"}}),
                         doctest::Contains("$.n_seq"), ParamError);
    CHECK_THROWS_WITH_AS(
        io::design_config_from_json({{"alphabet", {{"kind", "octal"}}}}),
        doctest::Contains("$.alphabet.kind"), ParamError);
    CHECK_THROWS_WITH_AS(
        io::design_config_from_json({{"stopbands", {{0.1}}}}),
        doctest::Contains("$.stopbands[0]"), ParamError);

    // defaults materialize on an empty config
    const auto cfg = io::design_config_from_json(io::json::object());
    CHECK(cfg.n_seq == 2);
    CHECK(cfg.n_samples == 64);
    CHECK(cfg.theta == 1.0);
    CHECK(cfg.max_sweeps == 1000);
}

TEST_CASE("design config round trips through json") {
    io::DesignConfig cfg;
    cfg.n_seq = 3;
    cfg.n_samples = 128;
    cfg.alphabet = PhaseAlphabet::discrete(8);
    cfg.theta = 0.25;
    cfg.stopbands = {{0.1, 0.2}, {0.5, 0.6}};
    cfg.seed = 42;
    const auto back = io::design_config_from_json(io::design_config_to_json(cfg));
    CHECK(back.n_seq == 3);
    CHECK(back.alphabet.levels == 8);
    CHECK(back.theta == 0.25);
    CHECK(back.stopbands.size() == 2);
    CHECK(back.stopbands[1].hi == 0.6);
    CHECK(back.seed == 42);
}

TEST_CASE("scenario config errors and round trip") {
    CHECK_THROWS_WITH_AS(io::scenario_from_json({{"design_theta", -0.1}}),
                         doctest::Contains("$.design_theta"), ParamError);
    CHECK_THROWS_WITH_AS(io::scenario_from_json({{"radar", {{"n_tx", 1.5}}}}),
                         doctest::Contains("$.radar.n_tx"), ParamError);
    CHECK_THROWS_WITH_AS(io::scenario_from_json({{"targets", 7}}),
                         doctest::Contains("$.targets"), ParamError);

    const auto sc = io::scenario_from_json(io::json::object());
    CHECK(sc.targets.size() == 2);  // built-in two-target scenario
    CHECK(sc.radar.code_length == 400);
    const auto back = io::scenario_from_json(io::scenario_to_json(sc));
    CHECK(back.targets.size() == sc.targets.size());
    CHECK(back.interference.allocation == sc.interference.allocation);
    CHECK(back.interference_power_dbm == sc.interference_power_dbm);
}

TEST_CASE("manifest json round trip") {
    io::RunManifest m;
    m.command = "design";
    m.config = io::json{{"n_seq", 2}};
    m.version = "9.9.9";
    m.mask_hash = 1234567890123ull;
    m.outputs = {"a.csv", "b.csv"};
    const auto back = io::manifest_from_json(io::manifest_to_json(m));
    CHECK(back.command == m.command);
    CHECK(back.version == m.version);
    CHECK(back.mask_hash == m.mask_hash);
    CHECK(back.outputs == m.outputs);
    CHECK(back.config == m.config);

    CHECK_THROWS_AS(io::manifest_from_json(io::json{{"command", "design"}}), ParamError);
}

TEST_CASE("signal csv round trip") {
    TempDir dir("notchset_t_signal");
    cvec x = {cplx(1.5, -2.25), cplx(0.0, 1e-17), cplx(-3.125, 4.0)};
    io::save_signal_csv(dir.file("sig.csv"), x);
    const cvec back = io::load_signal_csv(dir.file("sig.csv"));
    REQUIRE(back.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == x[i]);
}

TEST_CASE("design command emits consistent artifacts") {
    TempDir dir("notchset_t_design");
    io::json cfg;
    cfg["n_seq"] = 2;
    cfg["n_samples"] = 32;
    cfg["theta"] = 0.8;
    cfg["stopbands"] = io::json::array({io::json::array({0.2, 0.35})});
    cfg["max_sweeps"] = 400;
    cfg["seed"] = 5;
    // full artifacts are written whether or not the run converged
    const int rc = cli::cmd_design(cfg, dir.str());
    REQUIRE((rc == 0 || rc == 2));

    CHECK(first_line(dir.file("trace.csv")) == "sweep,g,g_s,g_c,delta_fro");

    // the saved set reproduces the reported objective
    const auto set = load_sequences_csv(dir.file("sequences.csv"));
    const auto mask = band_to_bins({{0.2, 0.35}}, 32);
    const auto obj = objective(set, mask, 0.8);

    const auto man = io::load_manifest(dir.file("run_manifest.json"));
    CHECK(man.command == "design");
    CHECK(man.mask_hash == io::mask_hash(mask));
    CHECK(man.outputs.size() == 2);
    CHECK(man.config.at("theta").get<double>() == 0.8);

    // evaluate against the same mask and cross-check the report numbers
    TempDir ev("notchset_t_eval");
    save_mask_file({{0.2, 0.35}}, ev.file("mask.json"));
    io::json ecfg;
    ecfg["sequences_csv"] = dir.file("sequences.csv");
    ecfg["mask_file"] = ev.file("mask.json");
    REQUIRE(cli::cmd_evaluate(ecfg, ev.str()) == 0);
    const auto rep = io::parse_json_file(ev.file("report.json"));
    CHECK(rep.at("n_seq").get<int>() == 2);
    CHECK(rep.at("g_s").get<double>() == doctest::Approx(obj.g_s).epsilon(1e-9));
    CHECK(rep.at("g_c").get<double>() == doctest::Approx(obj.g_c).epsilon(1e-9));
    CHECK(rep.at("islr_db").get<double>() ==
          doctest::Approx(islr_db(set)).epsilon(1e-9));
    CHECK(fs::exists(ev.file("psd_seq0.csv")));
    CHECK(fs::exists(ev.file("psd_seq1.csv")));
}

TEST_CASE("sweep cap produces the warning exit code") {
    TempDir dir("notchset_t_cap");
    io::json cfg;
    cfg["n_samples"] = 32;
    cfg["stopbands"] = io::json::array({io::json::array({0.2, 0.4})});
    cfg["max_sweeps"] = 1;
    cfg["zeta"] = 1e-12;
    CHECK(cli::cmd_design(cfg, dir.str()) == 2);
    CHECK(fs::exists(dir.file("sequences.csv")));  // artifacts still written
}

TEST_CASE("rerun reproduces design outputs byte for byte") {
    TempDir a("notchset_t_rerun_a"), b("notchset_t_rerun_b");
    io::json cfg;
    cfg["n_samples"] = 48;
    cfg["n_seq"] = 2;
    cfg["theta"] = 0.6;
    cfg["stopbands"] = io::json::array({io::json::array({0.3, 0.45})});
    cfg["max_sweeps"] = 40;
    cfg["seed"] = 11;
    const int rc = cli::cmd_design(cfg, a.str());
    REQUIRE((rc == 0 || rc == 2));  // capped runs still leave full artifacts
    REQUIRE(cli::cmd_rerun(a.file("run_manifest.json"), b.str()) == rc);
    CHECK(io::read_text_file(a.file("sequences.csv")) ==
          io::read_text_file(b.file("sequences.csv")));
    CHECK(io::read_text_file(a.file("trace.csv")) == io::read_text_file(b.file("trace.csv")));
    CHECK(io::read_text_file(a.file("run_manifest.json")) ==
          io::read_text_file(b.file("run_manifest.json")));
}

TEST_CASE("sense detects a synthetic allocation and its mask feeds design") {
    TempDir dir("notchset_t_sense");
    io::json cfg;
    cfg["n_samples"] = 32768;
    cfg["bin_hz"] = 1e6;
    cfg["mask_bins"] = 64;
    cfg["interference"] = io::json{{"power_dbm", 10.0}};
    REQUIRE(cli::cmd_sense(cfg, dir.str()) == 0);

    REQUIRE(fs::exists(dir.file("mask.json")));
    const auto stop = load_mask_file(dir.file("mask.json"));
    REQUIRE_FALSE(stop.empty());
    const auto mask = band_to_bins(stop, 64);
    CHECK_FALSE(mask.degenerate());
    CHECK_FALSE(mask.undesired.empty());

    const auto man = io::load_manifest(dir.file("run_manifest.json"));
    CHECK(man.command == "sense");
    CHECK(man.mask_hash == io::mask_hash(mask));

    // rerun is byte-stable here too
    TempDir b("notchset_t_sense_b");
    REQUIRE(cli::cmd_rerun(dir.file("run_manifest.json"), b.str()) == 0);
    CHECK(io::read_text_file(dir.file("bands.csv")) == io::read_text_file(b.file("bands.csv")));
    CHECK(io::read_text_file(dir.file("mask.json")) == io::read_text_file(b.file("mask.json")));
}

TEST_CASE("sense on silence emits an empty mask and succeeds") {
    TempDir dir("notchset_t_silence");
    io::json cfg;
    cfg["n_samples"] = 4096;
    cfg["interference"] = io::json{{"allocation", "0"}};
    REQUIRE(cli::cmd_sense(cfg, dir.str()) == 0);
    CHECK(first_line(dir.file("bands.csv")) == "lo_hz,hi_hz");
    CHECK(load_mask_file(dir.file("mask.json")).empty());
    const auto man = io::load_manifest(dir.file("run_manifest.json"));
    CHECK(man.mask_hash == 0);
}

TEST_CASE("sense reports full-band occupancy as a warning") {
    // narrow radar band sitting wholly inside the detected allocation
    TempDir dir("notchset_t_full");
    io::json cfg;
    cfg["n_samples"] = 32768;
    cfg["interference"] = io::json{{"power_dbm", 10.0}};
    cfg["radar_center_hz"] = -5e6;
    cfg["radar_bandwidth_hz"] = 2e6;
    cfg["mask_bins"] = 64;
    CHECK(cli::cmd_sense(cfg, dir.str()) == 2);
    CHECK(fs::exists(dir.file("bands.csv")));        // detections still recorded
    CHECK_FALSE(fs::exists(dir.file("mask.json")));  // but no usable mask
}

TEST_CASE("simulate writes the metric files and honors a comms-free scenario") {
    TempDir dir("notchset_t_sim");
    io::json radar;
    radar["n_tx"] = 1;
    radar["n_rx"] = 1;
    radar["code_length"] = 32;
    radar["pri_s"] = 16e-6;
    radar["n_pulses"] = 8;
    radar["sample_rate_hz"] = 4e6;
    radar["noise_power_db"] = -8.0;
    io::json cfg;
    cfg["radar"] = radar;
    cfg["targets"] = io::json::array(
        {io::json{{"delay_s", 2e-6}, {"normalized_doppler", 0.25}, {"attenuation_db", 5.0}}});
    cfg["interference"] = io::json{{"allocation", "0"}};
    cfg["interference_power_dbm"] = io::json::array({0.0});
    cfg["n_trials"] = 4;
    cfg["design_max_sweeps"] = 3;
    cfg["seed"] = 9;
    REQUIRE(cli::cmd_simulate(cfg, dir.str()) == 0);

    CHECK(first_line(dir.file("metrics.csv")) == "step,interference_power_dbm,trial,metric,value");
    CHECK(first_line(dir.file("step1_metrics.csv")) ==
          "interference_power_dbm,trial,metric,value_db");
    CHECK(fs::exists(dir.file("map_random.csv")));
    CHECK(fs::exists(dir.file("map_optimized.csv")));
    CHECK(first_line(dir.file("map_random.csv")) == "range_cell,doppler_bin,mag_db");

    // with the comms side disabled, step 3 only differs from step 1 by the
    // noise draw, so the mean SINRs track each other closely
    const std::string summary = dir.file("summary.csv");
    const double s1 = summary_mean(summary, 1, "sinr_target1_db");
    const double s3 = summary_mean(summary, 3, "sinr_target1_db");
    CHECK(std::abs(s1 - s3) < 1.5);
    // and no comms metrics exist anywhere
    CHECK_THROWS(summary_mean(summary, 2, "evm_qpsk"));

    // rerun reproduces the numeric outputs byte for byte
    TempDir b("notchset_t_sim_b");
    REQUIRE(cli::cmd_rerun(dir.file("run_manifest.json"), b.str()) == 0);
    CHECK(io::read_text_file(dir.file("metrics.csv")) ==
          io::read_text_file(b.file("metrics.csv")));
    CHECK(io::read_text_file(dir.file("summary.csv")) ==
          io::read_text_file(b.file("summary.csv")));
    CHECK(io::read_text_file(dir.file("map_optimized.csv")) ==
          io::read_text_file(b.file("map_optimized.csv")));
}

TEST_CASE("argv front end drives a design run") {
    TempDir dir("notchset_t_argv");
    const std::string out = dir.str();
    const char* argv[] = {"notchset", "design",       "--out",    out.c_str(),
                          "--n-seq",  "2",            "--n-samples", "24",
                          "--theta",  "1.0",          "--stopband",  "0.25:0.4",
                          "--seed",   "3",            "--max-sweeps", "400"};
    const int rc = cli::run(static_cast<int>(std::size(argv)), argv);
    CHECK(rc == 0);
    CHECK(fs::exists(dir.file("sequences.csv")));
    const auto man = io::load_manifest(dir.file("run_manifest.json"));
    CHECK(man.config.at("n_samples").get<int>() == 24);
    CHECK(man.config.at("stopbands")[0][1].get<double>() == 0.4);

    const char* bad[] = {"notchset", "design", "--out", out.c_str(), "--theta", "2.0"};
    CHECK(cli::run(static_cast<int>(std::size(bad)), bad) == 1);

    const char* nosub[] = {"notchset"};
    CHECK(cli::run(1, nosub) == 1);
}
