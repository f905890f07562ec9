#pragma once

// Monte-Carlo timing-jitter estimates for the three readout configurations:
//   cryo          - cryogenic first stage + room-temperature commercial amp
//   conventional  - room-temperature amplification of the raw click only
//                   (band-limited by the long cable run + warm amplifier)
//   laser         - cryogenic first stage + laser-diode optical link
//
// Each trial adds fresh noise to the chain, finds the threshold crossing
// nearest the clean reference crossing (at a fixed fraction of the clean
// peak, polarity corrected), and adds a detector/TDC timing-floor draw.
// Because the chains are LTI, shifting the input shifts the output
// identically, so the floor is added to the crossing time directly instead
// of re-filtering a shifted pulse. The reported jitter is the sample
// standard deviation over trials.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandpass.hpp"
#include "edges.hpp"
#include "filtering.hpp"
#include "laser_link.hpp"
#include "noise.hpp"
#include "rng.hpp"
#include "snspd.hpp"

namespace cryochain {

enum class ReadoutChain { cryo, conventional, laser };

inline ReadoutChain readout_chain_from_string(const std::string& name) {
    if (name == "cryo") return ReadoutChain::cryo;
    if (name == "conventional") return ReadoutChain::conventional;
    if (name == "laser") return ReadoutChain::laser;
    throw std::invalid_argument("readout_jitter: unknown chain configuration '" + name + "'");
}

struct JitterStudyConfig {
    SnspdModel detector{};
    LaserLink link{};
    double sample_rate_hz = kDefaultSampleRate;
    double window_s = 400e-9;
    double pulse_t0_s = 100e-9;
    double threshold_fraction = 0.5;
    double timing_floor_sigma_s = 65e-12;  // detector + TDC intrinsic jitter

    // Conventional path: warm amplifier at the end of the coax run. The
    // effective bandwidth and input-referred noise are calibrated defaults;
    // only the resulting jitter is anchored.
    double conventional_gain_db = 20.0;
    double conventional_f_low_hz = 1e6;
    double conventional_f_high_hz = 80e6;
    double conventional_noise_sigma_v = 5.0e-4;  // input-referred, white
};

namespace detail {

inline double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

// Rising crossing nearest to a reference instant (TDC-style gating).
inline bool nearest_crossing(const Waveform& w, double level, double t_ref, double& t_out) {
    bool found = false;
    double best = 0.0;
    for (const auto& ev : threshold_crossings(w, level, EdgeDirection::rising)) {
        if (!found || std::abs(ev.time_s - t_ref) < std::abs(best - t_ref)) {
            best = ev.time_s;
            found = true;
        }
    }
    t_out = best;
    return found;
}

} // namespace detail

inline double readout_jitter(ReadoutChain chain, int n_trials, std::uint64_t seed,
                             const JitterStudyConfig& cfg = {}) {
    if (n_trials < 2) throw std::invalid_argument("readout_jitter: need at least 2 trials");
    validate_model(cfg.detector);

    const Waveform pulse =
        pulse_waveform(cfg.detector, 1, cfg.pulse_t0_s, cfg.window_s, cfg.sample_rate_hz);
    const BandPassStage cryo1 = first_stage(PowerMode::high);
    const BandPassStage room = commercial_stage();

    BandPassStage warm;  // conventional-path amplifier
    warm.gain_db = cfg.conventional_gain_db;
    warm.f_low_hz = cfg.conventional_f_low_hz;
    warm.f_high_hz = cfg.conventional_f_high_hz;

    // Clean chain output: defines threshold level and reference crossing.
    Waveform clean;
    Waveform intermediate;  // chain state the per-trial noise is injected into
    switch (chain) {
        case ReadoutChain::cryo:
            intermediate = apply_linear_stage(pulse, cryo1);
            clean = apply_linear_stage(intermediate, room);
            break;
        case ReadoutChain::conventional:
            intermediate = pulse;
            clean = apply_linear_stage(pulse, warm);
            break;
        case ReadoutChain::laser: {
            intermediate = apply_linear_stage(pulse, cryo1);
            LaserLink quiet = cfg.link;
            quiet.link_noise_sigma_v = 0.0;
            clean = transduce_optical(quiet, intermediate, 0).waveform;
            break;
        }
    }

    const bool inverted = peak_value(clean) < 0.0;
    const Waveform clean_pos = inverted ? negated(clean) : clean;
    const double level = cfg.threshold_fraction * max_value(clean_pos);
    const double t_ref = first_crossing_time(clean_pos, level, EdgeDirection::rising);
    if (t_ref < 0.0) throw std::runtime_error("readout_jitter: clean chain output never crosses");

    std::vector<double> crossings;
    crossings.reserve(static_cast<std::size_t>(n_trials));
    for (int trial = 0; trial < n_trials; ++trial) {
        const std::uint64_t sub = Rng::derive_subseed(seed, static_cast<std::uint64_t>(trial));
        Waveform noisy;
        switch (chain) {
            case ReadoutChain::cryo: {
                Rng rng(sub);
                Waveform stage1 = add_gaussian_noise(intermediate, cryo1.added_noise_sigma_v, rng);
                noisy = apply_linear_stage(stage1, room);
                noisy = add_gaussian_noise(noisy, room.added_noise_sigma_v, rng);
                break;
            }
            case ReadoutChain::conventional: {
                Rng rng(sub);
                Waveform in = add_gaussian_noise(pulse, cfg.conventional_noise_sigma_v, rng);
                noisy = apply_linear_stage(in, warm);
                break;
            }
            case ReadoutChain::laser:
                noisy = transduce_optical(cfg.link, intermediate, sub).waveform;
                break;
        }
        if (inverted) noisy = negated(noisy);
        double t = 0.0;
        if (!detail::nearest_crossing(noisy, level, t_ref, t)) continue;  // missed detection

        Rng floor_rng = Rng::substream(sub, 7);
        crossings.push_back(t + floor_rng.gaussian(0.0, cfg.timing_floor_sigma_s));
    }
    if (crossings.size() < static_cast<std::size_t>(n_trials) / 2 || crossings.size() < 2)
        throw std::runtime_error("readout_jitter: chain noise swamps the signal");
    return detail::sample_std(crossings);
}

inline double readout_jitter(const std::string& chain, int n_trials, std::uint64_t seed,
                             const JitterStudyConfig& cfg = {}) {
    return readout_jitter(readout_chain_from_string(chain), n_trials, seed, cfg);
}

} // namespace cryochain
