#include "notchset/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "notchset/fft.hpp"
#include "notchset/kernels.hpp"
#include "notchset/optimizer.hpp"

namespace notchset::sim {

namespace {

double db_to_power(double db) { return std::pow(10.0, db / 10.0); }
double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }

void add_awgn(cvec& x, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (auto& v : x) {
        const auto [re, im] = rng.gaussian_pair();
        v += sigma * cplx(re, im);
    }
}

double mean_power(const cvec& x) {
    double p = 0.0;
    for (const auto& v : x) p += std::norm(v);
    return x.empty() ? 0.0 : p / x.size();
}

}  // namespace

double RangeDopplerMap::power(int bin, int cell) const {
    double p = 0.0;
    const std::size_t i = static_cast<std::size_t>(bin) * n_cells + cell;
    for (const auto& ch : mag) p += ch[i] * ch[i];
    return p;
}

double InterferenceGrid::freq_norm(int j) const {
    return static_cast<double>(j - n_subcarriers / 2) / symbol_samples + offset_norm;
}

InterferenceGrid resolve_grid(const InterferenceSpec& spec, double sample_rate_hz) {
    if (spec.allocation.empty()) throw ParamError("interference: empty allocation");
    if (spec.prb_per_bit < 1 || spec.subcarriers_per_prb < 1)
        throw ParamError("interference: resource-block counts must be positive");
    if (spec.subcarrier_spacing_hz <= 0.0 || sample_rate_hz <= 0.0)
        throw ParamError("interference: rates must be positive");

    InterferenceGrid g;
    g.symbol_samples =
        static_cast<int>(std::lround(sample_rate_hz / spec.subcarrier_spacing_hz));
    if (g.symbol_samples < 2) throw ParamError("interference: spacing too coarse for sample rate");
    g.spacing_hz = sample_rate_hz / g.symbol_samples;
    g.offset_norm = spec.center_offset_hz / sample_rate_hz;

    const int sc_per_bit = spec.prb_per_bit * spec.subcarriers_per_prb;
    g.n_subcarriers = static_cast<int>(spec.allocation.size()) * sc_per_bit;
    if (g.n_subcarriers * g.spacing_hz > spec.bandwidth_hz)
        throw ParamError("interference: subcarrier span exceeds the configured bandwidth");
    const double half_span = 0.5 * g.n_subcarriers * g.spacing_hz + std::abs(spec.center_offset_hz);
    if (half_span > 0.5 * sample_rate_hz)
        throw ParamError("interference: span exceeds Nyquist of the sample rate");

    for (std::size_t b = 0; b < spec.allocation.size(); ++b) {
        const char bit = spec.allocation[b];
        if (bit != '0' && bit != '1')
            throw ParamError("interference: allocation must be a 0/1 string");
        if (bit == '1')
            for (int j = 0; j < sc_per_bit; ++j)
                g.occupied.push_back(static_cast<int>(b) * sc_per_bit + j);
    }
    return g;
}

cvec synth_symbols(const InterferenceGrid& grid, const std::vector<cvec>& symbols,
                   int n_samples) {
    if (n_samples < 0) throw ParamError("synth_symbols: negative sample count");
    const int w = grid.symbol_samples;
    const int n_sym = (n_samples + w - 1) / w;
    if (static_cast<int>(symbols.size()) < n_sym)
        throw ParamError("synth_symbols: not enough symbol vectors for the requested span");

    cvec out(n_samples, cplx(0.0, 0.0));
    cvec spec(w);
    for (int s = 0; s < n_sym; ++s) {
        if (symbols[s].size() != grid.occupied.size())
            throw ParamError("synth_symbols: symbol vector does not match the occupied grid");
        std::fill(spec.begin(), spec.end(), cplx(0.0, 0.0));
        for (std::size_t k = 0; k < grid.occupied.size(); ++k) {
            int bin = (grid.occupied[k] - grid.n_subcarriers / 2) % w;
            if (bin < 0) bin += w;
            // inverse FFT divides by w; pre-scale so each subcarrier carries
            // the symbol with unit amplitude
            spec[bin] = symbols[s][k] * static_cast<double>(w);
        }
        fft_inverse(spec);
        const int len = std::min(w, n_samples - s * w);
        std::copy(spec.begin(), spec.begin() + len, out.begin() + static_cast<std::size_t>(s) * w);
    }
    if (grid.offset_norm != 0.0)
        for (int t = 0; t < n_samples; ++t)
            out[t] *= std::polar(1.0, kTwoPi * grid.offset_norm * t);
    return out;
}

cvec gen_interference(const InterferenceSpec& spec, int n_samples, double sample_rate_hz,
                      RngSpec rng_spec) {
    const InterferenceGrid grid = resolve_grid(spec, sample_rate_hz);
    if (grid.occupied.empty()) return cvec(n_samples, cplx(0.0, 0.0));

    Rng rng(rng_spec);
    const cvec pts = constellation_points(Constellation::Qpsk);
    const int n_sym = (n_samples + grid.symbol_samples - 1) / grid.symbol_samples;
    std::vector<cvec> symbols(n_sym, cvec(grid.occupied.size()));
    for (auto& row : symbols)
        for (auto& s : row) s = pts[rng.uniform_below(pts.size())];

    cvec x = synth_symbols(grid, symbols, n_samples);
    const double have = mean_power(x);
    const double want = db_to_power(spec.power_dbm);
    const double scale = have > 0.0 ? std::sqrt(want / have) : 0.0;
    for (auto& v : x) v *= scale;
    return x;
}

RxCube gen_echo(const SequenceSet& waveforms, const std::vector<Target>& targets,
                const RadarParams& params, const cvec* interference, RngSpec rng_spec) {
    if (params.n_tx < 1 || params.n_rx < 1 || params.n_pulses < 1)
        throw ParamError("gen_echo: counts must be positive");
    if (params.sample_rate_hz <= 0.0 || params.pri_s <= 0.0)
        throw ParamError("gen_echo: rates must be positive");
    const int w = params.window();
    const int n = params.code_length;
    if (n < 1 || n > w) throw ParamError("gen_echo: code length does not fit in the PRI");
    if (waveforms.n_seq() != params.n_tx || waveforms.n_samples() != n)
        throw ParamError("gen_echo: waveform set does not match the radar parameters");
    const std::size_t total = static_cast<std::size_t>(params.n_pulses) * w;
    if (interference && interference->size() < total)
        throw ParamError("gen_echo: interference vector shorter than the coherent interval");

    RxCube cube;
    cube.n_rx = params.n_rx;
    cube.n_pulses = params.n_pulses;
    cube.w = w;
    cube.sample_rate_hz = params.sample_rate_hz;
    cube.data.assign(static_cast<std::size_t>(params.n_rx) * total, cplx(0.0, 0.0));

    // all tx waveforms superpose at a common delay, so sum them once
    cvec txsum(n, cplx(0.0, 0.0));
    for (int m = 0; m < params.n_tx; ++m)
        for (int k = 0; k < n; ++k) txsum[k] += waveforms.at(m, k);

    for (const auto& tgt : targets) {
        const int cell = static_cast<int>(std::lround(tgt.delay_s * params.sample_rate_hz));
        if (cell < 0 || cell + n > w)
            throw ParamError("gen_echo: target delay outside the receive window");
        if (tgt.normalized_doppler <= -0.5 || tgt.normalized_doppler > 0.5)
            throw ParamError("gen_echo: normalized Doppler outside (-0.5, 0.5]");
        const double amp = db_to_amp(-tgt.attenuation_db);
        const double sin_a = std::sin(tgt.angle_deg * kPi / 180.0);
        for (int r = 0; r < params.n_rx; ++r) {
            const cplx steer = std::polar(amp, kPi * r * sin_a);
            for (int p = 0; p < params.n_pulses; ++p) {
                const cplx coef = steer * std::polar(1.0, kTwoPi * tgt.normalized_doppler * p);
                for (int k = 0; k < n; ++k) cube.at(r, p, cell + k) += coef * txsum[k];
            }
        }
    }

    const double sigma = std::sqrt(db_to_power(params.noise_power_db));
    if (sigma > 0.0) {
        Rng rng(rng_spec);
        add_awgn(cube.data, sigma, rng);
    }
    if (interference)
        for (int r = 0; r < params.n_rx; ++r)
            for (std::size_t i = 0; i < total; ++i)
                cube.data[static_cast<std::size_t>(r) * total + i] += (*interference)[i];
    return cube;
}

MfOutput matched_filter(const RxCube& cube, const SequenceSet& waveforms) {
    const int n = waveforms.n_samples();
    if (n > cube.w) throw ParamError("matched_filter: waveform longer than the fast-time window");
    const int n_streams = cube.n_rx * cube.n_pulses;
    const int m = waveforms.n_seq();

    cvec out(static_cast<std::size_t>(n_streams) * m * cube.w);
    kernels::matched_filter_bank(cube.data.data(), n_streams, cube.w,
                                 waveforms.entries().data(), m, n, out.data());

    MfOutput mf;
    mf.n_tx = m;
    mf.n_rx = cube.n_rx;
    mf.n_pulses = cube.n_pulses;
    mf.w = cube.w;
    mf.sample_rate_hz = cube.sample_rate_hz;
    mf.channel.assign(static_cast<std::size_t>(m) * cube.n_rx,
                      cvec(static_cast<std::size_t>(cube.n_pulses) * cube.w));
    for (int r = 0; r < cube.n_rx; ++r)
        for (int p = 0; p < cube.n_pulses; ++p)
            for (int f = 0; f < m; ++f) {
                const cplx* src =
                    out.data() +
                    ((static_cast<std::size_t>(r) * cube.n_pulses + p) * m + f) * cube.w;
                std::copy(src, src + cube.w,
                          mf.channel[static_cast<std::size_t>(f) * cube.n_rx + r].begin() +
                              static_cast<std::size_t>(p) * cube.w);
            }
    return mf;
}

RangeDopplerMap range_doppler(const MfOutput& mf, Window slow_time_window) {
    if (mf.n_pulses < 2) throw ParamError("range_doppler: need at least 2 pulses");
    const dvec win = make_window(slow_time_window, mf.n_pulses);

    RangeDopplerMap map;
    map.n_tx = mf.n_tx;
    map.n_rx = mf.n_rx;
    map.n_cells = mf.w;
    map.n_pulses = mf.n_pulses;
    map.sample_rate_hz = mf.sample_rate_hz;
    map.mag.assign(mf.channel.size(), dvec(static_cast<std::size_t>(mf.n_pulses) * mf.w));

    cvec spec(static_cast<std::size_t>(mf.n_pulses) * mf.w);
    for (std::size_t c = 0; c < mf.channel.size(); ++c) {
        kernels::slow_time_dft(mf.channel[c].data(), mf.n_pulses, mf.w, win.data(), spec.data());
        for (std::size_t i = 0; i < spec.size(); ++i) map.mag[c][i] = std::abs(spec[i]);
    }
    return map;
}

double measure_sinr(const RangeDopplerMap& map, CellIndex cell, int guard, int training) {
    if (guard < 0 || training < 1) throw ParamError("measure_sinr: bad ring sizes");
    if (cell.range_cell < 0 || cell.range_cell >= map.n_cells || cell.doppler_bin < 0 ||
        cell.doppler_bin >= map.n_pulses)
        throw ParamError("measure_sinr: cell outside the map");

    // peak within +-1 cell of the nominal location
    double peak = -1.0;
    int pc = cell.range_cell, pb = cell.doppler_bin;
    for (int db = -1; db <= 1; ++db) {
        const int b = ((cell.doppler_bin + db) % map.n_pulses + map.n_pulses) % map.n_pulses;
        for (int dc = -1; dc <= 1; ++dc) {
            const int c = cell.range_cell + dc;
            if (c < 0 || c >= map.n_cells) continue;
            const double p = map.power(b, c);
            if (p > peak) {
                peak = p;
                pc = c;
                pb = b;
            }
        }
    }

    double floor_sum = 0.0;
    int floor_count = 0;
    const int reach = guard + training;
    for (int db = -reach; db <= reach; ++db) {
        for (int dc = -reach; dc <= reach; ++dc) {
            const int cheb = std::max(std::abs(db), std::abs(dc));
            if (cheb <= guard) continue;
            const int c = pc + dc;
            if (c < 0 || c >= map.n_cells) continue;
            const int b = ((pb + db) % map.n_pulses + map.n_pulses) % map.n_pulses;
            floor_sum += map.power(b, c);
            ++floor_count;
        }
    }
    if (floor_count == 0) throw ParamError("measure_sinr: training ring empty");
    const double floor = floor_sum / floor_count;
    if (floor <= 0.0) return peak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return db10(peak / floor);
}

std::vector<Band> energy_detect(const cvec& signal, double sample_rate_hz, double bin_hz,
                                double threshold_db_over_floor) {
    if (bin_hz <= 0.0 || bin_hz > 0.5 * sample_rate_hz)
        throw ParamError("energy_detect: bin width must lie in (0, sample_rate/2]");
    std::size_t nseg = 1024;
    while (nseg > signal.size()) nseg /= 2;
    if (nseg < 32) throw ParamError("energy_detect: signal too short");

    const dvec win = make_window(Window::Hann, static_cast<int>(nseg));
    dvec psd_acc(nseg, 0.0);
    int n_segments = 0;
    cvec seg(nseg);
    for (std::size_t pos = 0; pos + nseg <= signal.size(); pos += nseg / 2) {
        for (std::size_t i = 0; i < nseg; ++i) seg[i] = win[i] * signal[pos + i];
        fft_forward(seg);
        for (std::size_t i = 0; i < nseg; ++i) psd_acc[i] += std::norm(seg[i]);
        ++n_segments;
    }
    for (auto& p : psd_acc) p /= n_segments;

    // aggregate FFT bins into coarse bin_hz cells indexed by signed multiples
    const int k_max = static_cast<int>(std::floor(0.5 * sample_rate_hz / bin_hz + 0.5));
    const int n_coarse = 2 * k_max + 1;
    dvec coarse(n_coarse, 0.0);
    std::vector<int> counts(n_coarse, 0);
    for (std::size_t i = 0; i < nseg; ++i) {
        double f = static_cast<double>(i) / nseg;
        if (f > 0.5) f -= 1.0;
        const int ci = static_cast<int>(std::lround(f * sample_rate_hz / bin_hz));
        if (ci < -k_max || ci > k_max) continue;
        coarse[ci + k_max] += psd_acc[i];
        counts[ci + k_max] += 1;
    }
    for (int i = 0; i < n_coarse; ++i)
        if (counts[i] > 0) coarse[i] /= counts[i];

    dvec sorted = coarse;
    std::nth_element(sorted.begin(), sorted.begin() + n_coarse / 2, sorted.end());
    const double floor = sorted[n_coarse / 2];
    const double thresh = floor * db_to_power(threshold_db_over_floor);

    std::vector<Band> bands;
    int run_start = 0;
    bool in_run = false;
    for (int i = 0; i <= n_coarse; ++i) {
        const bool hot = i < n_coarse && counts[i] > 0 && coarse[i] > thresh && coarse[i] > 0.0;
        if (hot && !in_run) {
            in_run = true;
            run_start = i;
        } else if (!hot && in_run) {
            in_run = false;
            bands.push_back({(run_start - k_max - 0.5) * bin_hz, (i - 1 - k_max + 0.5) * bin_hz});
        }
    }
    return bands;
}

SpectralMask sense_to_mask(const std::vector<Band>& bands, double radar_center_hz,
                           double radar_bandwidth_hz, int n_bins) {
    if (radar_bandwidth_hz <= 0.0) throw ParamError("sense_to_mask: bandwidth must be positive");
    const double half = 0.5 * radar_bandwidth_hz;

    std::vector<Stopband> raw;
    for (const auto& band : bands) {
        if (!(band.lo_hz < band.hi_hz)) throw ParamError("sense_to_mask: empty band");
        const double lo = std::max(band.lo_hz, radar_center_hz - half) - radar_center_hz;
        const double hi = std::min(band.hi_hz, radar_center_hz + half) - radar_center_hz;
        if (lo >= hi) continue;  // outside the radar band
        // normalized design frequency: f >= 0 -> f/bw, f < 0 -> 1 + f/bw
        if (lo >= 0.0) {
            raw.push_back({lo / radar_bandwidth_hz, hi / radar_bandwidth_hz});
        } else if (hi <= 0.0) {
            raw.push_back({1.0 + lo / radar_bandwidth_hz, 1.0 + hi / radar_bandwidth_hz});
        } else {
            raw.push_back({0.0, hi / radar_bandwidth_hz});
            raw.push_back({1.0 + lo / radar_bandwidth_hz, 1.0});
        }
    }
    // coalesce overlaps so rounding to bins sees disjoint intervals
    std::sort(raw.begin(), raw.end(), [](const Stopband& a, const Stopband& b) {
        return a.lo < b.lo;
    });
    std::vector<Stopband> merged;
    for (const auto& s : raw) {
        if (s.hi <= s.lo) continue;
        if (!merged.empty() && s.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }

    SpectralMask mask = band_to_bins(merged, n_bins);
    if (mask.degenerate())
        throw DegenerateMaskError("sense_to_mask: occupied bands leave no usable passband");
    return mask;
}

cvec constellation_points(Constellation c) {
    cvec pts;
    auto square = [&](int half_levels, double norm) {
        for (int a = -half_levels; a <= half_levels; a += 2)
            for (int b = -half_levels; b <= half_levels; b += 2)
                pts.push_back(cplx(a, b) / norm);
    };
    switch (c) {
        case Constellation::Qpsk: square(1, std::sqrt(2.0)); break;
        case Constellation::Qam16: square(3, std::sqrt(10.0)); break;
        case Constellation::Qam64: square(7, std::sqrt(42.0)); break;
    }
    return pts;
}

const char* constellation_name(Constellation c) {
    switch (c) {
        case Constellation::Qpsk: return "qpsk";
        case Constellation::Qam16: return "16qam";
        case Constellation::Qam64: return "64qam";
    }
    return "?";
}

CommsLinkResult demod_comms(const cvec& rx, const InterferenceGrid& grid,
                            const std::vector<cvec>& symbols, double amp, Constellation c) {
    if (grid.occupied.empty()) throw ParamError("demod_comms: no occupied subcarriers");
    if (amp <= 0.0) throw ParamError("demod_comms: reference amplitude must be positive");
    const int w = grid.symbol_samples;
    const int n_sym = std::min(static_cast<int>(symbols.size()), static_cast<int>(rx.size()) / w);
    if (n_sym < 1) throw ParamError("demod_comms: input shorter than one symbol");

    const cvec pts = constellation_points(c);
    cvec buf(w);
    double err_acc = 0.0, ref_acc = 0.0;
    long n_err = 0, n_tot = 0;
    for (int s = 0; s < n_sym; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * w;
        if (grid.offset_norm == 0.0) {
            std::copy(rx.begin() + base, rx.begin() + base + w, buf.begin());
        } else {
            for (int t = 0; t < w; ++t)
                buf[t] = rx[base + t] *
                         std::polar(1.0, -kTwoPi * grid.offset_norm * static_cast<double>(base + t));
        }
        fft_forward(buf);
        for (std::size_t k = 0; k < grid.occupied.size(); ++k) {
            int bin = (grid.occupied[k] - grid.n_subcarriers / 2) % w;
            if (bin < 0) bin += w;
            const cplx est = buf[bin] / static_cast<double>(w);
            const cplx ref = amp * symbols[s][k];
            err_acc += std::norm(est - ref);
            ref_acc += std::norm(ref);

            const cplx soft = est / amp;
            std::size_t best = 0;
            double best_d = std::norm(soft - pts[0]);
            for (std::size_t i = 1; i < pts.size(); ++i) {
                const double d = std::norm(soft - pts[i]);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            if (pts[best] != symbols[s][k]) ++n_err;
            ++n_tot;
        }
    }
    CommsLinkResult out;
    out.evm = ref_acc > 0.0 ? std::sqrt(err_acc / ref_acc) : 0.0;
    out.ser = n_tot > 0 ? static_cast<double>(n_err) / n_tot : 0.0;
    return out;
}

Scenario default_scenario() {
    Scenario sc;
    sc.targets = {{2.0e-6, 0.2, 25.0, 30.0}, {2.6e-6, -0.25, 15.0, 35.0}};
    return sc;
}

double mean_db(const std::vector<double>& values_db) {
    if (values_db.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values_db) acc += db_to_power(v);
    return db10(acc / values_db.size());
}

namespace {

constexpr std::uint64_t kRoleWaveformInit = 0, kRoleSymbolsQpsk = 1, kRoleNoiseStep1 = 2,
                        kRoleNoiseStep3 = 3, kRoleNoiseStep4 = 4, kRoleCommsNoise2 = 5,
                        kRoleCommsNoise3 = 6, kRoleCommsNoise4 = 7, kRoleSenseNoise = 8,
                        kRoleSymbols16 = 9, kRoleSymbols64 = 10;

std::uint64_t stream_id(int power_index, int trial, std::uint64_t role) {
    return (static_cast<std::uint64_t>(power_index) << 32) |
           (static_cast<std::uint64_t>(trial) << 8) | role;
}

std::vector<cvec> draw_symbols(const InterferenceGrid& grid, int n_samples, Constellation c,
                               Rng& rng) {
    const cvec pts = constellation_points(c);
    const int n_sym = (n_samples + grid.symbol_samples - 1) / grid.symbol_samples;
    std::vector<cvec> out(n_sym, cvec(grid.occupied.size()));
    for (auto& row : out)
        for (auto& s : row) s = pts[rng.uniform_below(pts.size())];
    return out;
}

std::vector<double> target_sinrs(const RangeDopplerMap& map, const std::vector<Target>& targets,
                                 const RadarParams& rp) {
    std::vector<double> out;
    for (const auto& t : targets) {
        CellIndex cell;
        cell.range_cell = static_cast<int>(std::lround(t.delay_s * rp.sample_rate_hz));
        const int b = static_cast<int>(std::lround(t.normalized_doppler * rp.n_pulses));
        cell.doppler_bin = ((b % rp.n_pulses) + rp.n_pulses) % rp.n_pulses;
        out.push_back(measure_sinr(map, cell));
    }
    return out;
}

// Transmit-sum leakage waveform: each PRI carries sum_m x_m for the first N
// samples, zeros for the rest of the window.
cvec tx_leak_signal(const SequenceSet& wf, const RadarParams& rp) {
    const int w = rp.window();
    const int n = rp.code_length;
    cvec out(static_cast<std::size_t>(rp.n_pulses) * w, cplx(0.0, 0.0));
    for (int p = 0; p < rp.n_pulses; ++p)
        for (int k = 0; k < n; ++k)
            for (int m = 0; m < wf.n_seq(); ++m)
                out[static_cast<std::size_t>(p) * w + k] += wf.at(m, k);
    return out;
}

struct CommsEval {
    std::vector<double> evm;
    std::vector<double> ser;
};

// Evaluates the comms link per constellation: own signal + optional radar
// leakage + receiver noise (one noise stream, drawn sequentially).
CommsEval eval_comms(const std::vector<std::vector<cvec>>& symbol_sets,
                     const std::vector<cvec>& signals, const std::vector<double>& amps,
                     const InterferenceGrid& grid, const cvec* leak, double kappa,
                     double comms_sigma, Rng& noise_rng) {
    static const Constellation kAll[] = {Constellation::Qpsk, Constellation::Qam16,
                                         Constellation::Qam64};
    CommsEval ev;
    for (int ci = 0; ci < 3; ++ci) {
        cvec rx = signals[ci];
        if (leak)
            for (std::size_t t = 0; t < rx.size(); ++t) rx[t] += kappa * (*leak)[t];
        add_awgn(rx, comms_sigma, noise_rng);
        const CommsLinkResult res = demod_comms(rx, grid, symbol_sets[ci], amps[ci], kAll[ci]);
        ev.evm.push_back(res.evm);
        ev.ser.push_back(res.ser);
    }
    return ev;
}

}  // namespace

CoexistReport run_scenario(const Scenario& sc) {
    if (sc.targets.empty()) throw ParamError("scenario: need at least one target");
    if (sc.n_trials < 1) throw ParamError("scenario: need at least one trial");
    if (sc.interference_power_dbm.empty())
        throw ParamError("scenario: need at least one interference power");

    const RadarParams& rp = sc.radar;
    const int w = rp.window();
    const int total = rp.n_pulses * w;
    const InterferenceGrid grid = resolve_grid(sc.interference, rp.sample_rate_hz);
    const bool comms_active = !grid.occupied.empty();
    const double kappa = db_to_amp(sc.radar_to_comms_coupling_db);
    const double comms_sigma = std::sqrt(db_to_power(sc.comms_noise_db));

    CoexistReport report;
    for (std::size_t pi = 0; pi < sc.interference_power_dbm.size(); ++pi) {
        const double power = sc.interference_power_dbm[pi];
        InterferenceSpec spec_p = sc.interference;
        spec_p.power_dbm = power;

        for (int trial = 0; trial < sc.n_trials; ++trial) {
            auto stream = [&](std::uint64_t role) {
                return RngSpec{sc.seed, stream_id(static_cast<int>(pi), trial, role)};
            };

            const SequenceSet wf_rand = random_phase_set(
                rp.n_tx, rp.code_length, PhaseAlphabet::continuous(), stream(kRoleWaveformInit));

            // one QPSK stream feeds the radar-side interference, the sensing
            // capture and the comms-side reference (at different scales)
            std::vector<std::vector<cvec>> symbol_sets(3);
            std::vector<cvec> comms_signals(3);
            std::vector<double> comms_amps(3, 1.0);
            cvec interf_radar;
            if (comms_active) {
                Rng rq(stream(kRoleSymbolsQpsk));
                symbol_sets[0] = draw_symbols(grid, total, Constellation::Qpsk, rq);
                Rng r16(stream(kRoleSymbols16));
                symbol_sets[1] = draw_symbols(grid, total, Constellation::Qam16, r16);
                Rng r64(stream(kRoleSymbols64));
                symbol_sets[2] = draw_symbols(grid, total, Constellation::Qam64, r64);

                const cvec base = synth_symbols(grid, symbol_sets[0], total);
                const double have = mean_power(base);
                const double scale_r = have > 0.0 ? std::sqrt(db_to_power(power) / have) : 0.0;
                interf_radar.resize(total);
                for (int t = 0; t < total; ++t) interf_radar[t] = base[t] * scale_r;

                for (int ci = 0; ci < 3; ++ci) {
                    cvec sig = ci == 0 ? base : synth_symbols(grid, symbol_sets[ci], total);
                    const double p = ci == 0 ? have : mean_power(sig);
                    const double scale_c = p > 0.0 ? std::sqrt(1.0 / p) : 0.0;
                    for (auto& v : sig) v *= scale_c;
                    comms_signals[ci] = std::move(sig);
                    comms_amps[ci] = scale_c;  // unit symbols -> per-subcarrier amp
                }
            }

            // step 1: radar alone
            {
                const RxCube cube =
                    gen_echo(wf_rand, sc.targets, rp, nullptr, stream(kRoleNoiseStep1));
                const RangeDopplerMap rd =
                    range_doppler(matched_filter(cube, wf_rand), Window::Hann);
                StepMetrics m;
                m.step = 1;
                m.interference_power_dbm = power;
                m.trial = trial;
                m.sinr_db = target_sinrs(rd, sc.targets, rp);
                report.rows.push_back(std::move(m));
            }

            // step 2: comms alone
            if (comms_active) {
                Rng noise(stream(kRoleCommsNoise2));
                const CommsEval ev = eval_comms(symbol_sets, comms_signals, comms_amps, grid,
                                                nullptr, 0.0, comms_sigma, noise);
                StepMetrics m;
                m.step = 2;
                m.interference_power_dbm = power;
                m.trial = trial;
                m.evm = ev.evm;
                m.ser = ev.ser;
                report.rows.push_back(std::move(m));
            }

            // step 3: both, random-phase radar
            const cvec leak_rand = tx_leak_signal(wf_rand, rp);
            {
                const RxCube cube = gen_echo(wf_rand, sc.targets, rp,
                                             comms_active ? &interf_radar : nullptr,
                                             stream(kRoleNoiseStep3));
                const RangeDopplerMap rd =
                    range_doppler(matched_filter(cube, wf_rand), Window::Hann);
                StepMetrics m;
                m.step = 3;
                m.interference_power_dbm = power;
                m.trial = trial;
                m.sinr_db = target_sinrs(rd, sc.targets, rp);
                if (comms_active) {
                    Rng noise(stream(kRoleCommsNoise3));
                    const CommsEval ev = eval_comms(symbol_sets, comms_signals, comms_amps, grid,
                                                    &leak_rand, kappa, comms_sigma, noise);
                    m.evm = ev.evm;
                    m.ser = ev.ser;
                }
                const bool last =
                    pi + 1 == sc.interference_power_dbm.size() && trial + 1 == sc.n_trials;
                if (last) report.map_random = rd;
                report.rows.push_back(std::move(m));
            }

            // step 4: sense, redesign, both again
            {
                cvec capture(total, cplx(0.0, 0.0));
                if (comms_active) capture = interf_radar;
                Rng cap_noise(stream(kRoleSenseNoise));
                add_awgn(capture, std::sqrt(db_to_power(rp.noise_power_db)), cap_noise);
                const std::vector<Band> bands =
                    energy_detect(capture, rp.sample_rate_hz, sc.sense_bin_hz,
                                  sc.sense_threshold_db);

                SequenceSet wf_opt = wf_rand;
                std::vector<Stopband> sensed;
                try {
                    const SpectralMask mask = sense_to_mask(bands, 0.0, rp.sample_rate_hz,
                                                            rp.code_length);
                    sensed = mask.stopbands;
                    CdConfig cfg;
                    cfg.theta = sc.design_theta;
                    cfg.alphabet = PhaseAlphabet::continuous();
                    cfg.max_sweeps = sc.design_max_sweeps;
                    wf_opt = cd_design(wf_rand, mask, cfg).final;
                } catch (const DegenerateMaskError&) {
                    report.sensing_degenerate = true;
                    report.sensed_bands_hz = bands;
                    // keep the random waveforms; the step still runs
                }

                const RxCube cube = gen_echo(wf_opt, sc.targets, rp,
                                             comms_active ? &interf_radar : nullptr,
                                             stream(kRoleNoiseStep4));
                const RangeDopplerMap rd =
                    range_doppler(matched_filter(cube, wf_opt), Window::Hann);
                StepMetrics m;
                m.step = 4;
                m.interference_power_dbm = power;
                m.trial = trial;
                m.sinr_db = target_sinrs(rd, sc.targets, rp);
                if (comms_active) {
                    const cvec leak_opt = tx_leak_signal(wf_opt, rp);
                    Rng noise(stream(kRoleCommsNoise4));
                    const CommsEval ev = eval_comms(symbol_sets, comms_signals, comms_amps, grid,
                                                    &leak_opt, kappa, comms_sigma, noise);
                    m.evm = ev.evm;
                    m.ser = ev.ser;
                }
                const bool last =
                    pi + 1 == sc.interference_power_dbm.size() && trial + 1 == sc.n_trials;
                if (last) {
                    report.map_optimized = rd;
                    report.sensed_stopbands = sensed;
                    if (!report.sensing_degenerate) report.sensed_bands_hz = bands;
                }
                report.rows.push_back(std::move(m));
            }
        }
    }
    return report;
}

}  // namespace notchset::sim
