#pragma once

// Experiment harness: each subcommand-level operation takes a Scenario and
// returns a pure ExperimentReport (tables + scalar metrics). File layout,
// manifests, and SVG rendering are the caller's concern, which keeps every
// experiment unit-testable without touching the filesystem.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "discriminator.hpp"
#include "edges.hpp"
#include "filtering.hpp"
#include "histogram.hpp"
#include "jitter.hpp"
#include "laser_link.hpp"
#include "modulator.hpp"
#include "noise.hpp"
#include "report.hpp"
#include "scenario.hpp"
#include "snspd.hpp"
#include "snspd_array.hpp"
#include "spectrum.hpp"
#include "sweep_engine.hpp"

namespace cryochain {

namespace detail {

inline constexpr double kLightSpeed = 299792458.0;  // m/s

// Subseed stream ids, one block per experiment so adding draws to one
// experiment never shifts another's random sequence.
enum SeedStream : std::uint64_t {
    seed_bias_counts = 100,    // + point index (cryo), +1000 for conventional
    seed_bias_dark = 3000,     // + point index (cryo), +1000 for conventional
    seed_bias_verify = 5000,
    seed_pnr_photons = 6000,
    seed_pnr_noise = 6001,
    seed_sweep_photons = 7000,
    seed_sweep_events = 7001,
    seed_sweep_noise = 7002,
    seed_laser_trial = 8000,   // + trial index
    seed_laser_jitter = 9000,  // +0/1/2 per chain
    seed_simulate_event = 9500,
    seed_simulate_noise = 9501,
};

inline std::vector<BandPassStage> sweep_stage_list(const Scenario& sc) {
    std::vector<BandPassStage> v;
    for (long i = 0; i < sc.chain_stage_count; ++i)
        v.push_back(sc.chain_stages[static_cast<std::size_t>(i)]);
    return v;
}

// The photon-number path: cold front end followed by the wideband room-
// temperature amplifier (slot 4).
inline std::vector<BandPassStage> pnr_stage_list(const Scenario& sc) {
    return {sc.chain_stages[0], sc.chain_stages[3]};
}

inline Waveform apply_stages_clean(Waveform w, const std::vector<BandPassStage>& stages) {
    for (const auto& st : stages) w = apply_linear_stage(w, st);
    return w;
}

// Noise enters at each stage output, so earlier stages' noise is reshaped by
// everything downstream — the order matters for the spectra.
inline Waveform apply_stages_noisy(Waveform w, const std::vector<BandPassStage>& stages,
                                   Rng& rng) {
    for (const auto& st : stages) {
        w = apply_linear_stage(w, st);
        if (st.added_noise_sigma_v > 0.0) w = add_gaussian_noise(w, st.added_noise_sigma_v, rng);
    }
    return w;
}

struct FlatRun {
    std::size_t first = 0;
    std::size_t last = 0;
    double mean = 0.0;
};

// Maximal (greedy, left-to-right) runs of strictly positive values whose
// spread stays within rel_tol of the run mean. Used for both the bias-scan
// plateau and the threshold-staircase plateaus.
inline std::vector<FlatRun> find_flat_runs(const std::vector<double>& v, double rel_tol,
                                           std::size_t min_len) {
    std::vector<FlatRun> runs;
    std::size_t i = 0;
    while (i < v.size()) {
        if (!(v[i] > 0.0)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double mn = v[i], mx = v[i], sum = v[i];
        while (j + 1 < v.size() && v[j + 1] > 0.0) {
            const double nmn = std::min(mn, v[j + 1]);
            const double nmx = std::max(mx, v[j + 1]);
            const double nsum = sum + v[j + 1];
            const double nmean = nsum / static_cast<double>(j + 2 - i);
            if ((nmx - nmn) / nmean > rel_tol) break;
            mn = nmn;
            mx = nmx;
            sum = nsum;
            ++j;
        }
        if (j - i + 1 >= min_len) runs.push_back({i, j, sum / static_cast<double>(j - i + 1)});
        i = j + 1;
    }
    return runs;
}

inline std::vector<double> linspace(double lo, double hi, long n) {
    if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline Table trace_table(std::string name, const Waveform& w, std::size_t stride = 1) {
    Table t;
    t.name = std::move(name);
    t.columns = {"time_s", "value_v"};
    t.plot = PlotKind::trace;
    if (stride == 0) stride = 1;
    for (std::size_t i = 0; i < w.size(); i += stride) t.rows.push_back({w.time_at(i), w.samples[i]});
    return t;
}

inline Table spectrum_table(std::string name, const Spectrum& s, double f_max_hz) {
    Table t;
    t.name = std::move(name);
    t.columns = {"freq_hz", "amplitude_v"};
    t.plot = PlotKind::trace;
    for (std::size_t k = 0; k < s.freqs_hz.size(); ++k) {
        if (s.freqs_hz[k] > f_max_hz) break;
        t.rows.push_back({s.freqs_hz[k], s.magnitude[k]});
    }
    return t;
}

inline Table digital_table(std::string name, const DigitalWaveform& d, double t_start,
                           double t_end) {
    Table t;
    t.name = std::move(name);
    t.columns = {"time_s", "level"};
    t.plot = PlotKind::digital;
    double level = 0.0;
    std::size_t i = 0;
    while (i < d.transitions.size() && !std::isfinite(d.transitions[i].time_s)) {
        level = d.transitions[i].level == Level::high ? 1.0 : 0.0;
        ++i;
    }
    t.rows.push_back({t_start, level});
    for (; i < d.transitions.size(); ++i) {
        const double tt = d.transitions[i].time_s;
        if (tt > t_end) break;
        const double next = d.transitions[i].level == Level::high ? 1.0 : 0.0;
        t.rows.push_back({tt, level});
        t.rows.push_back({tt, next});
        level = next;
    }
    t.rows.push_back({t_end, level});
    return t;
}

// Peak gain of a stage list on the single-photon pulse shape, with output
// polarity. Used to refer chain-output amplitudes back to the detector plane.
struct ChainCalibration {
    double peak_gain = 0.0;  // |output peak| / |input peak| for the n=1 shape
    bool inverted = false;
    double unit_output_peak_v = 0.0;  // |output peak| of the bare n=1 pulse
};

inline ChainCalibration calibrate_chain(const SnspdModel& m,
                                        const std::vector<BandPassStage>& stages,
                                        double sample_rate_hz) {
    // Enough record for the slowest corner to settle around a mid-window pulse.
    const double t0 = 200e-9;
    const double duration = 1e-6;
    const Waveform unit = pulse_waveform(m, 1, t0, duration, sample_rate_hz);
    const Waveform out = apply_stages_clean(unit, stages);
    ChainCalibration cal;
    const double p = peak_value(out);
    cal.inverted = p < 0.0;
    cal.unit_output_peak_v = std::abs(p);
    cal.peak_gain = std::abs(p) / max_value(unit);
    if (!(cal.peak_gain > 0.0)) throw std::runtime_error("calibrate_chain: chain output is flat");
    return cal;
}

inline double round_to(double x, double quantum) { return std::round(x / quantum) * quantum; }

} // namespace detail

// ---------------------------------------------------------------------------
// Bias scan: count and dark-count rates versus bias current for the two
// detector configurations, plateau/latch detection, and an end-to-end check
// that the analog chain plus trigger preserves event counts.
// ---------------------------------------------------------------------------
inline ExperimentReport run_bias_scan(const Scenario& sc) {
    const BiasScanConfig& bc = sc.bias_scan;
    if (!(bc.bias_max_a > bc.bias_min_a))
        throw std::invalid_argument("bias scan: bias_max_a must exceed bias_min_a");
    if (bc.pulses_per_point < 100)
        throw std::invalid_argument("bias scan: need at least 100 pulses per point");

    ExperimentReport rep;
    rep.name = "bias-scan";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    const std::vector<double> biases = detail::linspace(bc.bias_min_a, bc.bias_max_a, bc.points);
    const double window_s = static_cast<double>(bc.pulses_per_point) / bc.rep_rate_hz;

    struct ScanResult {
        std::vector<double> rates;
        std::vector<double> dark_rates;
        double onset_a = 0.0, end_a = 0.0, latch_a = 0.0, extent_a = 0.0;
    };

    auto scan_config = [&](const SnspdModel& base, std::uint64_t stream_offset,
                           const std::string& label) {
        ScanResult r;
        for (std::size_t i = 0; i < biases.size(); ++i) {
            SnspdModel m = base;
            m.i_bias_a = biases[i];
            const PhotonSource lit{bc.rep_rate_hz, bc.mean_photons};
            const PhotonSource dark_only{bc.rep_rate_hz, 0.0};
            const auto events = sample_detections(
                m, lit, window_s,
                Rng::derive_subseed(sc.master_seed, detail::seed_bias_counts + stream_offset + i));
            const auto darks = sample_detections(
                m, dark_only, window_s,
                Rng::derive_subseed(sc.master_seed, detail::seed_bias_dark + stream_offset + i));
            r.rates.push_back(static_cast<double>(events.size()) / window_s);
            r.dark_rates.push_back(static_cast<double>(darks.size()) / window_s);
        }
        const auto runs = detail::find_flat_runs(r.rates, 0.02, 3);
        if (runs.empty())
            throw std::runtime_error("bias scan: no count-rate plateau found for " + label +
                                     " configuration");
        const auto plateau = *std::max_element(
            runs.begin(), runs.end(), [](const detail::FlatRun& a, const detail::FlatRun& b) {
                return (a.last - a.first) < (b.last - b.first);
            });
        r.onset_a = biases[plateau.first];
        r.end_a = biases[plateau.last];
        r.extent_a = r.end_a - r.onset_a;
        r.latch_a = -1.0;
        for (std::size_t i = plateau.last + 1; i < biases.size(); ++i) {
            if (r.rates[i] == 0.0) {
                r.latch_a = biases[i];
                break;
            }
        }
        if (r.latch_a < 0.0)
            throw std::runtime_error("bias scan: " + label +
                                     " configuration never latched inside the scanned range");

        Table t;
        t.name = "counts_" + label;
        t.columns = {"bias_a", "count_rate_hz", "dark_rate_hz"};
        t.plot = PlotKind::trace;
        for (std::size_t i = 0; i < biases.size(); ++i)
            t.rows.push_back({biases[i], r.rates[i], r.dark_rates[i]});
        rep.tables.push_back(std::move(t));
        return r;
    };

    const ScanResult cryo = scan_config(sc.detector, 0, "cryo");
    const ScanResult conv = scan_config(sc.detector_conventional, 1000, "conventional");

    // The configured relationship, verified end to end on measured counts:
    // the cryo-readout detector must hold its plateau over a strict superset
    // of the conventional one's and latch later.
    if (!(cryo.extent_a > conv.extent_a))
        throw std::runtime_error("bias scan: cryo plateau is not wider than the conventional one");
    if (!(cryo.latch_a > conv.latch_a))
        throw std::runtime_error("bias scan: cryo configuration did not latch later");
    if (!(cryo.onset_a <= conv.onset_a && cryo.end_a >= conv.end_a))
        throw std::runtime_error("bias scan: conventional plateau is not inside the cryo plateau");

    // End-to-end transparency: at a plateau bias, every detector event must
    // come out of the trigger as exactly one digital pulse.
    SnspdModel vm = sc.detector;
    vm.i_bias_a = 0.5 * (sc.detector.plateau_onset_a + sc.detector.plateau_end_a);
    vm.dark_rate_hz = 0.0;  // darks are uninteresting here and could collide with pulses
    const long verify_pulses = 50;
    const double vwindow = static_cast<double>(verify_pulses) / bc.rep_rate_hz;
    const auto events = sample_detections(
        vm, PhotonSource{bc.rep_rate_hz, bc.mean_photons}, vwindow,
        Rng::derive_subseed(sc.master_seed, detail::seed_bias_verify));
    if (events.empty()) throw std::runtime_error("bias scan: verification window saw no events");

    const auto stages = detail::sweep_stage_list(sc);
    const double duration = vwindow + 100e-9;  // room for the last pulse tail
    Waveform sum = make_waveform(duration, sc.sample_rate_hz);
    for (const auto& ev : events)
        add_in_place(sum, pulse_waveform(vm, ev.n_photons, ev.t0_s, duration, sc.sample_rate_hz));

    const auto cal = detail::calibrate_chain(vm, stages, sc.sample_rate_hz);
    Rng noise_rng = Rng::substream(sc.master_seed, detail::seed_bias_verify + 1);
    Waveform out = detail::apply_stages_noisy(sum, stages, noise_rng);
    if (cal.inverted) out = negated(out);

    SchmittTrigger vt = sc.trigger_lower;
    vt.threshold_v = 0.5 * cal.unit_output_peak_v;
    const int strobes = trigger_response(vt, out).pulse_count();
    if (strobes != static_cast<int>(events.size()))
        throw std::runtime_error("bias scan: chain+trigger pulse count (" +
                                 std::to_string(strobes) + ") does not match event count (" +
                                 std::to_string(events.size()) + ")");

    rep.scalar_metrics = {
        {"cryo_plateau_onset_a", "A", cryo.onset_a},
        {"cryo_plateau_end_a", "A", cryo.end_a},
        {"cryo_plateau_extent_a", "A", cryo.extent_a},
        {"cryo_latch_a", "A", cryo.latch_a},
        {"conventional_plateau_onset_a", "A", conv.onset_a},
        {"conventional_plateau_end_a", "A", conv.end_a},
        {"conventional_plateau_extent_a", "A", conv.extent_a},
        {"conventional_latch_a", "A", conv.latch_a},
        {"chain_verify_events", "", static_cast<double>(events.size())},
        {"chain_verify_strobes", "", static_cast<double>(strobes)},
        {"chain_count_match", "", 1.0},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Photon-number resolution: per-pulse rising/falling threshold-crossing
// delays, their 2D histogram, a 1D projection, valley-based class boundaries,
// and classification accuracy against the true detected photon number.
// ---------------------------------------------------------------------------
inline ExperimentReport run_pnr_experiment(const Scenario& sc) {
    const PnrConfig& p = sc.pnr;
    if (!(p.mu > 0.0)) throw std::invalid_argument("pnr: mean photon number must be positive");
    if (p.pulses < 10) throw std::invalid_argument("pnr: need at least 10 pulses");
    if (!(p.pulse_t0_s > 0.0 && p.pulse_t0_s < p.window_s))
        throw std::invalid_argument("pnr: pulse_t0 must sit inside the window");

    ExperimentReport rep;
    rep.name = "pnr";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    const auto stages = detail::pnr_stage_list(sc);
    const SnspdModel& m = sc.detector;
    const double eta = efficiency_at_bias(m, m.i_bias_a).efficiency;
    const double mu_eff = p.mu * eta;

    // Noiseless references define the threshold and document the clean
    // per-photon-number timing.
    std::vector<Waveform> clean;
    for (int n = 1; n <= 4; ++n) {
        Waveform w = detail::apply_stages_clean(
            pulse_waveform(m, n, p.pulse_t0_s, p.window_s, sc.sample_rate_hz), stages);
        clean.push_back(std::move(w));
    }
    const bool inverted = peak_value(clean[0]) < 0.0;
    if (inverted)
        for (auto& w : clean) w = negated(w);
    const double level = p.threshold_fraction * max_value(clean[0]);
    if (!(level > 0.0)) throw std::runtime_error("pnr: threshold level collapsed to zero");

    Table noiseless;
    noiseless.name = "noiseless_delays";
    noiseless.columns = {"n", "rise_delay_s", "fall_delay_s", "peak_v", "raw_peak_v"};
    for (int n = 1; n <= 4; ++n) {
        const Waveform& w = clean[static_cast<std::size_t>(n - 1)];
        const double rise = first_crossing_time(w, level, EdgeDirection::rising);
        const auto falls = threshold_crossings(w, level, EdgeDirection::falling);
        const double fall = falls.empty() ? -1.0 : falls.back().time_s;
        noiseless.rows.push_back({static_cast<double>(n), rise - p.pulse_t0_s,
                                  fall - p.pulse_t0_s, max_value(w), m.peak_voltage(n)});
    }
    rep.tables.push_back(std::move(noiseless));

    const double angle = p.projection_angle_deg * std::acos(-1.0) / 180.0;
    const double ca = std::cos(angle), sa = std::sin(angle);

    struct Sample {
        int n;
        double rise, fall, proj;
    };
    std::vector<Sample> samples;
    Rng photon_rng = Rng::substream(sc.master_seed, detail::seed_pnr_photons);
    Rng noise_rng = Rng::substream(sc.master_seed, detail::seed_pnr_noise);
    long zero_detections = 0, missed = 0, out_of_window = 0;

    for (long k = 0; k < p.pulses; ++k) {
        const long n = photon_rng.poisson(mu_eff);
        if (n < 1) {
            ++zero_detections;
            continue;
        }
        Waveform w = detail::apply_stages_noisy(
            pulse_waveform(m, static_cast<int>(n), p.pulse_t0_s, p.window_s, sc.sample_rate_hz),
            stages, noise_rng);
        if (inverted) w = negated(w);
        const double rise_t = first_crossing_time(w, level, EdgeDirection::rising);
        const auto falls = threshold_crossings(w, level, EdgeDirection::falling);
        if (rise_t < 0.0 || falls.empty()) {
            ++missed;
            continue;
        }
        const double rise = rise_t - p.pulse_t0_s;
        const double fall = falls.back().time_s - p.pulse_t0_s;
        if (rise < 0.0 || rise >= p.rise_max_s || fall < 0.0 || fall >= p.fall_max_s) {
            ++out_of_window;
            continue;
        }
        samples.push_back({static_cast<int>(n), rise, fall, ca * rise + sa * fall});
    }
    if (samples.empty()) throw std::runtime_error("pnr: no pulse produced a usable crossing pair");

    // Bin grids are fitted to the observed delay spread (the configured maxima
    // only bound the acceptance window above). The delay scale after the
    // amplifier chain is set by the chain's upper corner, orders of magnitude
    // below the window, so fixed full-window grids would put every event in
    // one bin and valley detection would be blind.
    auto fitted = [](double lo, double hi) {
        double span = hi - lo;
        if (span < 1e-12) span = 1e-12;
        return std::pair<double, double>{lo - 0.05 * span, hi + 0.05 * span};
    };
    double r_lo = samples.front().rise, r_hi = r_lo;
    double f_lo = samples.front().fall, f_hi = f_lo;
    double q_lo = samples.front().proj, q_hi = q_lo;
    for (const auto& s : samples) {
        r_lo = std::min(r_lo, s.rise);
        r_hi = std::max(r_hi, s.rise);
        f_lo = std::min(f_lo, s.fall);
        f_hi = std::max(f_hi, s.fall);
        q_lo = std::min(q_lo, s.proj);
        q_hi = std::max(q_hi, s.proj);
    }
    const auto [rx_lo, rx_hi] = fitted(r_lo, r_hi);
    const auto [fx_lo, fx_hi] = fitted(f_lo, f_hi);
    const auto [qx_lo, qx_hi] = fitted(q_lo, q_hi);
    Histogram2D h2 = Histogram2D::uniform(rx_lo, rx_hi, static_cast<std::size_t>(p.rise_bins),
                                          fx_lo, fx_hi, static_cast<std::size_t>(p.fall_bins));
    Histogram1D h1 = Histogram1D::uniform(qx_lo, qx_hi, static_cast<std::size_t>(p.projection_bins));
    for (const auto& s : samples) {
        h2.fill(s.rise, s.fall);
        h1.fill(s.proj);
    }

    // Valleys in the projection define the class boundaries. Photon number
    // grows toward smaller projection values (higher n rises faster), so a
    // sample below a boundary belongs to a higher class.
    const std::vector<std::size_t> valleys = find_valleys(h1.counts);
    std::vector<double> boundaries;
    for (std::size_t v : valleys) boundaries.push_back(h1.center(v));
    const int n_classes = static_cast<int>(boundaries.size()) + 1;

    auto classify = [&](double proj) {
        int c = 1;
        for (double b : boundaries)
            if (proj < b) ++c;
        return c;
    };

    // Per-class centroids and the confusion matrix against the true count.
    std::map<int, std::vector<const Sample*>> by_class;
    std::map<std::pair<int, int>, long> confusion;
    long correct = 0, total_123 = 0;
    for (const auto& s : samples) {
        const int c = classify(s.proj);
        by_class[c].push_back(&s);
        const int true_n = std::min(s.n, 6);
        ++confusion[{true_n, c}];
        if (true_n >= 1 && true_n <= 3) {
            ++total_123;
            if (c == true_n) ++correct;
        }
    }
    const double accuracy =
        total_123 > 0 ? static_cast<double>(correct) / static_cast<double>(total_123) : 0.0;

    // Separation oracle: classify by nearest true-class projection centroid.
    std::map<int, std::pair<double, long>> true_centroids;
    for (const auto& s : samples) {
        if (s.n < 1 || s.n > 3) continue;
        auto& [sum, cnt] = true_centroids[s.n];
        sum += s.proj;
        ++cnt;
    }
    long oracle_correct = 0, oracle_total = 0;
    if (true_centroids.size() == 3) {
        for (const auto& s : samples) {
            if (s.n < 1 || s.n > 3) continue;
            int best = 0;
            double best_d = 0.0;
            for (const auto& [n, acc] : true_centroids) {
                const double c = acc.first / static_cast<double>(acc.second);
                const double dd = std::abs(s.proj - c);
                if (best == 0 || dd < best_d) {
                    best = n;
                    best_d = dd;
                }
            }
            ++oracle_total;
            if (best == s.n) ++oracle_correct;
        }
    }
    const double oracle_accuracy =
        oracle_total > 0 ? static_cast<double>(oracle_correct) / static_cast<double>(oracle_total)
                         : 0.0;

    Table t2;
    t2.name = "delay_histogram";
    t2.columns = {"rise_delay_s", "fall_delay_s", "count"};
    t2.plot = PlotKind::heatmap;
    for (std::size_t iy = 0; iy < h2.counts.size() / (h2.x_edges.size() - 1); ++iy) {
        for (std::size_t ix = 0; ix < h2.x_edges.size() - 1; ++ix) {
            const long c = h2.counts[iy * (h2.x_edges.size() - 1) + ix];
            if (c == 0) continue;
            t2.rows.push_back({0.5 * (h2.x_edges[ix] + h2.x_edges[ix + 1]),
                               0.5 * (h2.y_edges[iy] + h2.y_edges[iy + 1]),
                               static_cast<double>(c)});
        }
    }
    rep.tables.push_back(std::move(t2));

    Table t1;
    t1.name = "projection";
    t1.columns = {"projection_s", "count"};
    t1.plot = PlotKind::histogram;
    for (std::size_t i = 0; i < h1.counts.size(); ++i)
        t1.rows.push_back({h1.center(i), static_cast<double>(h1.counts[i])});
    rep.tables.push_back(std::move(t1));

    Table tc;
    tc.name = "centroids";
    tc.columns = {"class", "rise_mean_s", "fall_mean_s", "projection_mean_s", "members"};
    for (const auto& [c, members] : by_class) {
        double rs = 0.0, fs = 0.0, ps = 0.0;
        for (const Sample* s : members) {
            rs += s->rise;
            fs += s->fall;
            ps += s->proj;
        }
        const double n = static_cast<double>(members.size());
        tc.rows.push_back({static_cast<double>(c), rs / n, fs / n, ps / n, n});
    }
    rep.tables.push_back(std::move(tc));

    Table tf;
    tf.name = "confusion";
    tf.columns = {"true_n", "assigned_class", "count"};
    for (const auto& [key, cnt] : confusion)
        tf.rows.push_back(
            {static_cast<double>(key.first), static_cast<double>(key.second),
             static_cast<double>(cnt)});
    rep.tables.push_back(std::move(tf));

    const double* row1 = rep.tables[0].rows[0].data();  // noiseless n=1 row
    const double* row2 = rep.tables[0].rows[1].data();
    rep.scalar_metrics = {
        {"mu_effective", "", mu_eff},
        {"threshold_v", "V", level},
        {"parity", "", inverted ? -1.0 : 1.0},
        {"n_valleys", "", static_cast<double>(valleys.size())},
        {"n_classes", "", static_cast<double>(n_classes)},
        {"accuracy", "", accuracy},
        {"accuracy_oracle", "", oracle_accuracy},
        {"filtered_peak_ratio_21", "", row2[3] / row1[3]},
        {"raw_peak_ratio_21", "", m.peak_voltage(2) / m.peak_voltage(1)},
        {"zero_detection_fraction", "",
         static_cast<double>(zero_detections) / static_cast<double>(p.pulses)},
        {"missed_fraction", "", static_cast<double>(missed) / static_cast<double>(p.pulses)},
        {"histogram_overflow", "", static_cast<double>(out_of_window)},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// 2D threshold sweep over the window discriminator, driven by one shared
// event pool and the staircase engine.
// ---------------------------------------------------------------------------
inline ExperimentReport run_threshold_sweep(const Scenario& sc) {
    const SweepConfig& sw = sc.sweep;
    const double ladder_top =
        static_cast<double>(sc.array.n_pixels) * sc.array.unit_amplitude_v;
    if (!(sw.threshold_min_v < sc.array.unit_amplitude_v))
        throw std::invalid_argument(
            "sweep.threshold_min_v must sit below the single-pixel amplitude");
    if (!(sw.threshold_max_v > ladder_top))
        throw std::invalid_argument("sweep.threshold_max_v must sit above the full-array level");
    if (sw.pulses < 10) throw std::invalid_argument("sweep: need at least 10 pulses");

    ExperimentReport rep;
    rep.name = "sweep";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    const auto stages = detail::sweep_stage_list(sc);
    const auto cal = detail::calibrate_chain(sc.detector, stages, sc.sample_rate_hz);
    const double scale = 1.0 / cal.peak_gain;  // refer amplitudes to the detector plane

    Rng photon_rng = Rng::substream(sc.master_seed, detail::seed_sweep_photons);
    Rng event_rng = Rng::substream(sc.master_seed, detail::seed_sweep_events);
    Rng noise_rng = Rng::substream(sc.master_seed, detail::seed_sweep_noise);

    std::vector<EventEnvelope> pool;
    long zero_events = 0, switch_overs = 0;
    for (long k = 0; k < sw.pulses; ++k) {
        const long n_inc = photon_rng.poisson(sw.mean_photons);
        const DetectionEvent ev =
            array_event(sc.array, static_cast<int>(n_inc), event_rng, sw.pulse_t0_s);
        if (ev.pixel_count < 1) {
            ++zero_events;
            continue;
        }
        if (ev.switch_over) ++switch_overs;
        Waveform w = array_waveform(sc.array, ev, sc.detector, sw.window_s, sc.sample_rate_hz,
                                    scale);
        w = detail::apply_stages_noisy(w, stages, noise_rng);
        if (cal.inverted) w = negated(w);
        pool.push_back(build_envelope(w, ev.pixel_count, ev.switch_over));
    }
    if (pool.empty()) throw std::runtime_error("sweep: event pool is empty");

    const double margin = discriminator_margin(sc.gates, sc.trigger_lower, sc.trigger_upper);
    const SweepEngine engine(std::move(pool), margin);

    const std::vector<double> grid =
        detail::linspace(sw.threshold_min_v, sw.threshold_max_v, sw.grid_points);
    const double to_rate = sw.rep_rate_hz / static_cast<double>(sw.pulses);

    std::vector<long> single(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) single[i] = engine.count_above(grid[i]);

    Table trig_trace;
    trig_trace.name = "trigger_trace";
    trig_trace.columns = {"threshold_v", "count_rate_hz"};
    trig_trace.plot = PlotKind::trace;
    for (std::size_t i = 0; i < grid.size(); ++i)
        trig_trace.rows.push_back({grid[i], static_cast<double>(single[i]) * to_rate});
    rep.tables.push_back(std::move(trig_trace));

    Table lower_map, upper_map, driver_map, predicted_map, diff_map;
    for (Table* t : {&lower_map, &upper_map, &driver_map, &predicted_map, &diff_map}) {
        t->columns = {"threshold_lower_v", "threshold_upper_v", "count_rate_hz"};
        t->plot = PlotKind::heatmap;
    }
    lower_map.name = "lower_monitor_map";
    upper_map.name = "upper_monitor_map";
    driver_map.name = "driver_map";
    predicted_map.name = "predicted_map";
    diff_map.name = "difference_map";

    long max_abs_dev = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const long l = single[i];
            const long u = single[j];
            const long d = engine.count_strobes(grid[i], grid[j]);
            const long pred = std::max<long>(0, l - u);
            const long dev = d - pred;
            max_abs_dev = std::max(max_abs_dev, dev < 0 ? -dev : dev);
            lower_map.rows.push_back({grid[i], grid[j], static_cast<double>(l) * to_rate});
            upper_map.rows.push_back({grid[i], grid[j], static_cast<double>(u) * to_rate});
            driver_map.rows.push_back({grid[i], grid[j], static_cast<double>(d) * to_rate});
            predicted_map.rows.push_back({grid[i], grid[j], static_cast<double>(pred) * to_rate});
            diff_map.rows.push_back({grid[i], grid[j], static_cast<double>(d - pred) * to_rate});
        }
    }
    rep.tables.push_back(std::move(lower_map));
    rep.tables.push_back(std::move(upper_map));
    rep.tables.push_back(std::move(driver_map));
    rep.tables.push_back(std::move(predicted_map));
    rep.tables.push_back(std::move(diff_map));

    // Plateau structure of the single-trigger staircase: one flat run per
    // resolvable occupancy level. In ascending threshold order, run r
    // (1-based) sits below the r-th amplitude rung and counts events with at
    // least r fired pixels.
    std::vector<double> single_d(single.begin(), single.end());
    const auto runs = detail::find_flat_runs(single_d, 0.02, 3);

    Table plateau_table;
    plateau_table.name = "plateau_runs";
    plateau_table.columns = {"min_pixels", "threshold_lo_v", "threshold_hi_v", "count_rate_hz"};
    for (std::size_t r = 0; r < runs.size(); ++r)
        plateau_table.rows.push_back({static_cast<double>(r + 1), grid[runs[r].first],
                                      grid[runs[r].last], runs[r].mean * to_rate});
    rep.tables.push_back(std::move(plateau_table));

    // Photon-number-selective windows: lower threshold from run k's middle,
    // upper from run k+1's (the top class is open-ended).
    Table regions;
    regions.name = "regions";
    regions.columns = {"pixels", "window_lower_v", "window_upper_v", "count_rate_hz"};
    long window_sum = 0;
    double first_mid = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const double lo_mid = 0.5 * (grid[runs[r].first] + grid[runs[r].last]);
        if (r == 0) first_mid = lo_mid;
        double hi_mid = sw.threshold_max_v;
        long cnt;
        if (r + 1 < runs.size()) {
            hi_mid = 0.5 * (grid[runs[r + 1].first] + grid[runs[r + 1].last]);
            cnt = engine.count_strobes(lo_mid, hi_mid);
        } else {
            cnt = engine.count_above(lo_mid);  // open-ended top window
        }
        window_sum += cnt;
        regions.rows.push_back(
            {static_cast<double>(r + 1), lo_mid, hi_mid, static_cast<double>(cnt) * to_rate});
    }
    rep.tables.push_back(std::move(regions));
    const long total_above_first = runs.empty() ? 0 : engine.count_above(first_mid);

    rep.scalar_metrics = {
        {"pool_events", "", static_cast<double>(engine.size())},
        {"zero_event_fraction", "",
         static_cast<double>(zero_events) / static_cast<double>(sw.pulses)},
        {"switch_over_events", "", static_cast<double>(switch_overs)},
        {"chain_peak_gain", "", cal.peak_gain},
        {"gate_margin_s", "s", margin},
        {"n_plateaus", "", static_cast<double>(runs.size())},
        {"driver_predicted_max_dev", "", static_cast<double>(max_abs_dev)},
        {"window_count_sum", "", static_cast<double>(window_sum)},
        {"single_trigger_count", "", static_cast<double>(total_above_first)},
        {"window_count_conservation_dev", "",
         static_cast<double>(window_sum - total_above_first)},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Laser readout: one transduced record with spectra, the edge-detection
// success rate, and the timing-jitter comparison across the three chains.
// ---------------------------------------------------------------------------
inline ExperimentReport run_laser_readout(const Scenario& sc) {
    const LaserReadoutConfig& lc = sc.laser;
    if (lc.edge_trials < 2 || lc.jitter_trials < 2)
        throw std::invalid_argument("laser: need at least 2 trials");

    ExperimentReport rep;
    rep.name = "laser";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    const BandPassStage front = sc.chain_stages[0];
    const Waveform pulse =
        pulse_waveform(sc.detector, 1, lc.pulse_t0_s, lc.window_s, sc.sample_rate_hz);
    const Waveform drive = apply_linear_stage(pulse, front);

    LaserLink quiet = sc.link;
    quiet.link_noise_sigma_v = 0.0;
    const TransducedSignal clean = transduce_optical(quiet, drive, 0);
    const bool inverted = peak_value(clean.waveform) < 0.0;
    const Waveform clean_pos = inverted ? negated(clean.waveform) : clean.waveform;
    const double level = lc.threshold_fraction * max_value(clean_pos);
    const double t_ref = first_crossing_time(clean_pos, level, EdgeDirection::rising);
    if (t_ref < 0.0) throw std::runtime_error("laser: clean transduced record never crosses");

    // Edge-detection trials: detector pulse -> noisy front end -> noisy link.
    const double success_window_s = 15e-9;  // acceptance gate around the reference edge
    long successes = 0;
    std::vector<double> edge_times;
    for (long trial = 0; trial < lc.edge_trials; ++trial) {
        const std::uint64_t sub = Rng::derive_subseed(
            sc.master_seed, detail::seed_laser_trial + static_cast<std::uint64_t>(trial));
        Rng rng(sub);
        Waveform noisy_front = add_gaussian_noise(drive, front.added_noise_sigma_v, rng);
        const TransducedSignal sig =
            transduce_optical(sc.link, noisy_front, Rng::derive_subseed(sub, 1));
        const Waveform post = inverted ? negated(sig.waveform) : sig.waveform;
        double t_edge = 0.0;
        if (detail::nearest_crossing(post, level, t_ref, t_edge) &&
            std::abs(t_edge - t_ref) <= success_window_s) {
            ++successes;
            edge_times.push_back(t_edge);
        }
    }
    const double edge_rate =
        static_cast<double>(successes) / static_cast<double>(lc.edge_trials);

    // Representative noisy record for the trace/spectrum tables.
    Rng trace_rng(Rng::derive_subseed(sc.master_seed, detail::seed_laser_trial));
    const Waveform trace_front =
        add_gaussian_noise(drive, front.added_noise_sigma_v, trace_rng);
    const TransducedSignal noisy = transduce_optical(
        sc.link, trace_front, Rng::derive_subseed(sc.master_seed, detail::seed_laser_trial + 1));

    rep.tables.push_back(detail::trace_table("drive_trace", drive));
    rep.tables.push_back(detail::trace_table("pre_filter_trace", noisy.pre_filter));
    rep.tables.push_back(detail::trace_table("post_filter_trace", noisy.waveform));
    rep.tables.push_back(detail::trace_table("clean_trace", clean.waveform));
    rep.tables.push_back(
        detail::spectrum_table("pre_filter_spectrum", spectrum_of(noisy.pre_filter), 1.5e9));
    rep.tables.push_back(
        detail::spectrum_table("post_filter_spectrum", spectrum_of(noisy.waveform), 1.5e9));

    // Noise concentration: dominant spectral bin above the signal band.
    const Spectrum pre_spec = spectrum_of(noisy.pre_filter);
    const std::size_t dom = dominant_bin(pre_spec, 300e6);
    const double dominant_noise_hz = pre_spec.freqs_hz[dom];

    // Undershoot of the clean transduced pulse (relaxation-oscillation ring).
    const double overswing = -min_value(clean_pos) / max_value(clean_pos);

    // Jitter comparison across the three readout chains.
    JitterStudyConfig jc;
    jc.detector = sc.detector;
    jc.link = sc.link;
    jc.sample_rate_hz = sc.sample_rate_hz;
    jc.window_s = lc.window_s;
    jc.pulse_t0_s = lc.pulse_t0_s;
    jc.threshold_fraction = lc.threshold_fraction;
    jc.timing_floor_sigma_s = lc.timing_floor_sigma_s;
    jc.conventional_gain_db = lc.conventional_gain_db;
    jc.conventional_f_low_hz = lc.conventional_f_low_hz;
    jc.conventional_f_high_hz = lc.conventional_f_high_hz;
    jc.conventional_noise_sigma_v = lc.conventional_noise_sigma_v;

    const double j_cryo =
        readout_jitter(ReadoutChain::cryo, static_cast<int>(lc.jitter_trials),
                       Rng::derive_subseed(sc.master_seed, detail::seed_laser_jitter), jc);
    const double j_conv =
        readout_jitter(ReadoutChain::conventional, static_cast<int>(lc.jitter_trials),
                       Rng::derive_subseed(sc.master_seed, detail::seed_laser_jitter + 1), jc);
    const double j_laser =
        readout_jitter(ReadoutChain::laser, static_cast<int>(lc.jitter_trials),
                       Rng::derive_subseed(sc.master_seed, detail::seed_laser_jitter + 2), jc);

    rep.scalar_metrics = {
        {"edge_detection_rate", "", edge_rate},
        {"edge_trials", "", static_cast<double>(lc.edge_trials)},
        {"threshold_v", "V", level},
        {"dominant_noise_freq_hz", "Hz", dominant_noise_hz},
        {"lowpass_cutoff_hz", "Hz", sc.link.lowpass_cutoff_hz},
        {"overswing_fraction", "", overswing},
        {"clipped", "", clean.clipped ? 1.0 : 0.0},
        {"jitter_cryo_s", "s", j_cryo},
        {"jitter_conventional_s", "s", j_conv},
        {"jitter_laser_s", "s", j_laser},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Latency budget: deterministic sum of signal-path delays with linearly
// added uncertainties, plus the room-temperature cable comparison.
// ---------------------------------------------------------------------------
inline ExperimentReport latency_budget(const Scenario& sc) {
    const LatencyConfig& lc = sc.latency;
    if (lc.trace_length_m < 0.0 || lc.room_cable_length_m < 0.0 || lc.trace_uncertainty_m < 0.0)
        throw std::invalid_argument("latency: lengths must be non-negative");

    const double v = 2.0 / 3.0 * detail::kLightSpeed;  // propagation in the dielectric
    const double trace_delay = lc.trace_length_m / v;
    const double trace_unc = lc.trace_uncertainty_m / v;

    const double rise_raw = step_risetime_10_90(sc.modulator);
    const double rise = detail::round_to(rise_raw, 0.1e-9);  // quoted at 0.1 ns resolution
    const double rise_unc = lc.modulator_risetime_uncertainty_s;

    const double digital = digital_path_delay(sc.gates, sc.trigger_lower);
    const double digital_unc = lc.digital_uncertainty_s;

    const double total = trace_delay + rise + digital;
    const double total_unc = trace_unc + rise_unc + digital_unc;

    const double room_delay = lc.room_cable_length_m / v;

    ExperimentReport rep;
    rep.name = "latency";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};
    rep.scalar_metrics = {
        {"trace_delay_ns", "ns", trace_delay * 1e9},
        {"trace_uncertainty_ns", "ns", trace_unc * 1e9},
        {"modulator_risetime_ns", "ns", rise * 1e9},
        {"modulator_risetime_raw_ns", "ns", rise_raw * 1e9},
        {"modulator_risetime_uncertainty_ns", "ns", rise_unc * 1e9},
        {"digital_delay_ns", "ns", digital * 1e9},
        {"digital_uncertainty_ns", "ns", digital_unc * 1e9},
        {"total_delay_ns", "ns", total * 1e9},
        {"total_uncertainty_ns", "ns", total_unc * 1e9},
        {"total_delay_rounded_ns", "ns", std::round(total * 1e9)},
        {"total_uncertainty_rounded_ns", "ns", std::round(total_unc * 1e9)},
        {"room_cable_delay_ns", "ns", room_delay * 1e9},
        {"feedforward_vs_room_cable", "", total / room_delay},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Heat budget: static dissipation of every cold component against the stage
// budgets, plus the modulator's dynamic switching term C * V^2 * rate.
// ---------------------------------------------------------------------------
inline ExperimentReport heat_budget(const Scenario& sc) {
    const HeatConfig& hc = sc.heat;
    const PowerMode mode = hc.first_stage_mode == "low" ? PowerMode::low : PowerMode::high;
    const double amp1_w = first_stage(mode).power_dissipation_w;

    const double vswing = sc.driver.v_high - sc.driver.v_low;
    const double dynamic_w = hc.modulator_capacitance_f * vswing * vswing * hc.switch_rate_hz;

    const double total_w = amp1_w + (hc.amp2_mw + hc.amp3_mw + hc.trigger_lower_mw +
                                     hc.trigger_upper_mw + hc.logic_mw + hc.driver_mw) *
                                        1e-3 +
                           dynamic_w;

    ExperimentReport rep;
    rep.name = "heat";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    Table t;
    t.name = "components";
    t.columns = {"component_index", "power_mw"};
    t.plot = PlotKind::histogram;
    const double comps[] = {amp1_w * 1e3,      hc.amp2_mw,  hc.amp3_mw, hc.trigger_lower_mw,
                            hc.trigger_upper_mw, hc.logic_mw, hc.driver_mw, dynamic_w * 1e3};
    for (std::size_t i = 0; i < 8; ++i)
        t.rows.push_back({static_cast<double>(i + 1), comps[i]});
    rep.tables.push_back(std::move(t));

    const double low_mode_w = first_stage(PowerMode::low).power_dissipation_w;
    rep.scalar_metrics = {
        {"amp1_mw", "mW", amp1_w * 1e3},
        {"amp2_mw", "mW", hc.amp2_mw},
        {"amp3_mw", "mW", hc.amp3_mw},
        {"trigger_lower_mw", "mW", hc.trigger_lower_mw},
        {"trigger_upper_mw", "mW", hc.trigger_upper_mw},
        {"logic_mw", "mW", hc.logic_mw},
        {"driver_mw", "mW", hc.driver_mw},
        {"modulator_dynamic_mw", "mW", dynamic_w * 1e3},
        {"total_mw", "mW", total_w * 1e3},
        {"budget_4k_mw", "mW", hc.budget_4k_w * 1e3},
        {"margin_4k_mw", "mW", (hc.budget_4k_w - total_w) * 1e3},
        {"within_4k_budget", "", total_w <= hc.budget_4k_w ? 1.0 : 0.0},
        {"budget_1k_mw", "mW", hc.budget_1k_w * 1e3},
        {"first_stage_low_mode_mw", "mW", low_mode_w * 1e3},
        {"first_stage_1k_compatible", "", low_mode_w <= hc.budget_1k_w ? 1.0 : 0.0},
    };
    return rep;
}

// ---------------------------------------------------------------------------
// Single-shot simulation: one optical pulse through the whole chain, with
// every intermediate trace recorded. n_photons = 0 exercises the quiescent
// (pure noise, no strobe) path.
// ---------------------------------------------------------------------------
inline ExperimentReport run_simulate(const Scenario& sc) {
    const SimulateConfig& sim = sc.simulate;
    if (sim.n_photons < 0) throw std::invalid_argument("simulate: negative photon count");
    if (!(sim.pulse_t0_s > 0.0 && sim.pulse_t0_s < sim.window_s))
        throw std::invalid_argument("simulate: pulse_t0 must sit inside the window");

    ExperimentReport rep;
    rep.name = "simulate";
    rep.seed = sc.master_seed;
    rep.parameters = {{"scenario", sc.name}};

    const auto stages = detail::sweep_stage_list(sc);
    const auto cal = detail::calibrate_chain(sc.detector, stages, sc.sample_rate_hz);
    const double scale = 1.0 / cal.peak_gain;

    Rng event_rng = Rng::substream(sc.master_seed, detail::seed_simulate_event);
    const DetectionEvent ev =
        array_event(sc.array, static_cast<int>(sim.n_photons), event_rng, sim.pulse_t0_s);

    Waveform detector_trace = make_waveform(sim.window_s, sc.sample_rate_hz);
    if (ev.pixel_count >= 1)
        detector_trace = array_waveform(sc.array, ev, sc.detector, sim.window_s,
                                        sc.sample_rate_hz, scale);

    Rng noise_rng = Rng::substream(sc.master_seed, detail::seed_simulate_noise);
    Waveform chain_out = detail::apply_stages_noisy(detector_trace, stages, noise_rng);
    if (cal.inverted) chain_out = negated(chain_out);

    const DiscriminatorOutcome disc =
        discriminate(sc.trigger_lower, sc.trigger_upper, sc.gates, chain_out);
    const Waveform drive =
        modulator_driver(disc.output, sim.window_s, sc.sample_rate_hz, sc.driver);
    const Waveform transmission = transmission_waveform(sc.modulator, drive);

    rep.tables.push_back(detail::trace_table("detector_trace", detector_trace));
    rep.tables.push_back(detail::trace_table("chain_trace", chain_out));
    rep.tables.push_back(
        detail::digital_table("lower_monitor", disc.lower_monitor, 0.0, sim.window_s));
    rep.tables.push_back(
        detail::digital_table("upper_monitor", disc.upper_monitor, 0.0, sim.window_s));
    rep.tables.push_back(detail::digital_table("strobe", disc.output, 0.0, sim.window_s));
    rep.tables.push_back(detail::trace_table("drive_trace", drive));
    rep.tables.push_back(detail::trace_table("transmission_trace", transmission));

    rep.scalar_metrics = {
        {"n_photons", "", static_cast<double>(sim.n_photons)},
        {"pixel_count", "", static_cast<double>(ev.pixel_count)},
        {"switch_over", "", ev.switch_over ? 1.0 : 0.0},
        {"chain_peak_v", "V", peak_value(chain_out)},
        {"lower_pulses", "", static_cast<double>(disc.lower_monitor.pulse_count())},
        {"upper_pulses", "", static_cast<double>(disc.upper_monitor.pulse_count())},
        {"strobe_pulses", "", static_cast<double>(disc.output.pulse_count())},
        {"drive_peak_v", "V", max_value(drive)},
        {"transmission_min", "", min_value(transmission)},
        {"transmission_max", "", max_value(transmission)},
    };
    return rep;
}

inline ExperimentReport run_subcommand(const Scenario& sc, const std::string& name) {
    if (name == "bias-scan") return run_bias_scan(sc);
    if (name == "pnr") return run_pnr_experiment(sc);
    if (name == "sweep") return run_threshold_sweep(sc);
    if (name == "laser") return run_laser_readout(sc);
    if (name == "latency") return latency_budget(sc);
    if (name == "heat") return heat_budget(sc);
    if (name == "simulate") return run_simulate(sc);
    throw std::invalid_argument("unknown subcommand '" + name + "'");
}

} // namespace cryochain
