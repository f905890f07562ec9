#pragma once

// Threshold-crossing detection with sub-sample interpolation.

#include <stdexcept>
#include <vector>

#include "waveform.hpp"

namespace cryochain {

enum class EdgeDirection { rising, falling };

struct EdgeEvent {
    double time_s = 0.0;
    EdgeDirection direction = EdgeDirection::rising;
    double level_v = 0.0;
};

// All crossings of `level` in the given direction, times linearly
// interpolated between the bracketing samples. A rising crossing requires
// v[i-1] < level <= v[i]; falling mirrors it.
inline std::vector<EdgeEvent> threshold_crossings(const Waveform& w, double level_v,
                                                  EdgeDirection dir) {
    if (w.samples.empty()) throw std::invalid_argument("threshold_crossings: empty waveform");
    std::vector<EdgeEvent> events;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double a = w.samples[i - 1];
        const double b = w.samples[i];
        const bool crossed = dir == EdgeDirection::rising ? (a < level_v && b >= level_v)
                                                          : (a > level_v && b <= level_v);
        if (!crossed) continue;
        const double frac = (level_v - a) / (b - a);  // b != a whenever crossed
        events.push_back({w.time_at(i - 1) + frac * w.dt(), dir, level_v});
    }
    return events;
}

// First crossing, or a negative sentinel when none exists.
inline double first_crossing_time(const Waveform& w, double level_v, EdgeDirection dir,
                                  double not_found = -1.0) {
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double a = w.samples[i - 1];
        const double b = w.samples[i];
        const bool crossed = dir == EdgeDirection::rising ? (a < level_v && b >= level_v)
                                                          : (a > level_v && b <= level_v);
        if (!crossed) continue;
        const double frac = (level_v - a) / (b - a);
        return w.time_at(i - 1) + frac * w.dt();
    }
    return not_found;
}

} // namespace cryochain
