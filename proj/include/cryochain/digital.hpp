#pragma once

// Two-level digital signals as transition lists.
//
// A DigitalWaveform is the ordered list of (time, level) transitions with an
// implicit low level at t = -infinity. A signal that is high "from the
// start" carries a transition at -infinity. Times are strictly increasing
// and levels alternate.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cryochain {

enum class Level : int { low = 0, high = 1 };

struct Transition {
    double time_s = 0.0;
    Level level = Level::low;
};

struct DigitalWaveform {
    std::vector<Transition> transitions;

    Level initial_level() const {
        if (!transitions.empty() && transitions.front().time_s ==
                                        -std::numeric_limits<double>::infinity())
            return transitions.front().level;
        return Level::low;
    }

    Level level_at(double t) const {
        Level lvl = Level::low;
        for (const auto& tr : transitions) {
            if (tr.time_s > t) break;
            lvl = tr.level;
        }
        return lvl;
    }

    // Rising transitions at finite times, i.e. the number of emitted pulses.
    int pulse_count() const {
        int n = 0;
        for (const auto& tr : transitions)
            if (tr.level == Level::high && std::isfinite(tr.time_s)) ++n;
        return n;
    }
};

inline DigitalWaveform constant_level(Level lvl) {
    DigitalWaveform w;
    if (lvl == Level::high)
        w.transitions.push_back({-std::numeric_limits<double>::infinity(), Level::high});
    return w;
}

inline void validate_digital(const DigitalWaveform& w) {
    Level lvl = Level::low;
    double prev = -std::numeric_limits<double>::infinity();
    bool first = true;
    for (const auto& tr : w.transitions) {
        if (!first && !(tr.time_s > prev))
            throw std::invalid_argument("DigitalWaveform: transition times must strictly increase");
        if (tr.level == lvl)
            throw std::invalid_argument("DigitalWaveform: levels must alternate");
        prev = tr.time_s;
        lvl = tr.level;
        first = false;
    }
}

// Widths of all completed high intervals (finite rising edge to next fall).
inline std::vector<double> pulse_widths(const DigitalWaveform& w) {
    std::vector<double> widths;
    double rise = 0.0;
    bool open = false;
    for (const auto& tr : w.transitions) {
        if (tr.level == Level::high && std::isfinite(tr.time_s)) {
            rise = tr.time_s;
            open = true;
        } else if (tr.level == Level::low && open) {
            widths.push_back(tr.time_s - rise);
            open = false;
        }
    }
    return widths;
}

} // namespace cryochain
