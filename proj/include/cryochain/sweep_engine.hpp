#pragma once

// Fast threshold-sweep evaluation.
//
// A 2D threshold sweep asks the same question of the same waveform pool a
// few thousand times: "when does this record first exceed level x?". Running
// the full trigger + gate network per grid cell would redo identical work
// G*G times. Instead each record is reduced once to its running-maximum
// staircase — the ordered list of samples that set a new maximum, each kept
// with its predecessor sample. First-crossing times for ANY level then come
// from a binary search plus the same linear interpolation the trigger uses,
// so fast-path counts are exact, not approximate. An equivalence test pins
// this against the full gate-level path on sampled cells.
//
// Validity note: the emission rule below folds the gate network into a
// single crossing-gap margin. That reduction is exact while trigger output
// pulses are far longer than the crossing gap (single-event records; the
// feedback widths are >100 ns while gaps are a few ns), which the sweep
// experiment guarantees by construction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "discriminator.hpp"
#include "schmitt.hpp"
#include "waveform.hpp"

namespace cryochain {

struct StairStep {
    double t_prev = 0.0;
    double v_prev = 0.0;
    double t_this = 0.0;
    double v_this = 0.0;  // strictly increasing across steps
};

struct EventEnvelope {
    int pixel_count = 0;
    bool switch_over = false;
    double peak = 0.0;  // overall maximum of the record
    std::vector<StairStep> steps;
};

inline EventEnvelope build_envelope(const Waveform& w, int pixel_count = 0,
                                    bool switch_over = false) {
    if (w.samples.empty()) throw std::invalid_argument("build_envelope: empty waveform");
    EventEnvelope ev;
    ev.pixel_count = pixel_count;
    ev.switch_over = switch_over;
    // Sentinel for sample 0: the trigger fires at t=0 without interpolation
    // when the very first sample already exceeds the threshold.
    ev.steps.push_back({0.0, w.samples[0], 0.0, w.samples[0]});
    double running_max = w.samples[0];
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (w.samples[i] > running_max) {
            ev.steps.push_back({w.time_at(i - 1), w.samples[i - 1], w.time_at(i), w.samples[i]});
            running_max = w.samples[i];
        }
    }
    ev.peak = running_max;
    return ev;
}

// First time the record rises above `level`, interpolated exactly as
// trigger_response interpolates; NaN when the record never exceeds it.
inline double first_crossing(const EventEnvelope& ev, double level) {
    const auto it = std::upper_bound(
        ev.steps.begin(), ev.steps.end(), level,
        [](double lv, const StairStep& st) { return lv < st.v_this; });
    if (it == ev.steps.end()) return std::numeric_limits<double>::quiet_NaN();
    if (!(it->v_this > it->v_prev)) return it->t_this;  // sentinel first-sample firing
    return it->t_prev + (level - it->v_prev) / (it->v_this - it->v_prev) * (it->t_this - it->t_prev);
}

// Minimum gap between the lower- and upper-threshold crossing instants for
// which the gate network still emits a strobe. Derived from the network
// shape: the NAND's low glitch spans (upper crossing + comparator + one
// inverter) minus (lower crossing + comparator + two inverters), and every
// downstream gate drops pulses shorter than its own propagation delay.
inline double discriminator_margin(const DiscriminatorGates& g, const SchmittTrigger& lower,
                                   const SchmittTrigger& upper) {
    const double gate_floor =
        std::max({g.nand_gate.propagation_delay_s, g.inverter.propagation_delay_s,
                  g.output_buffer.propagation_delay_s});
    return g.inverter.propagation_delay_s + gate_floor + lower.comparator_delay_s -
           upper.comparator_delay_s;
}

class SweepEngine {
  public:
    SweepEngine(std::vector<EventEnvelope> events, double margin_s)
        : events_(std::move(events)), margin_s_(margin_s) {
        std::sort(events_.begin(), events_.end(),
                  [](const EventEnvelope& a, const EventEnvelope& b) { return a.peak < b.peak; });
        peaks_.reserve(events_.size());
        for (const auto& e : events_) peaks_.push_back(e.peak);
    }

    std::size_t size() const { return events_.size(); }
    double margin_s() const { return margin_s_; }
    const std::vector<EventEnvelope>& events() const { return events_; }

    // Events whose peak strictly exceeds `level` — a single trigger's count.
    long count_above(double level) const {
        const auto it = std::upper_bound(peaks_.begin(), peaks_.end(), level);
        return static_cast<long>(peaks_.end() - it);
    }

    // Events for which the full window network would emit a strobe: the
    // lower trigger fires, and the upper either never fires or fires so
    // late that the strobe has already cleared the gate inertia. An upper
    // firing within the margin yields only a sub-inertial glitch, which the
    // gates drop.
    long count_strobes(double lower_threshold, double upper_threshold) const {
        const auto it = std::upper_bound(peaks_.begin(), peaks_.end(), lower_threshold);
        long n = 0;
        for (std::size_t i = static_cast<std::size_t>(it - peaks_.begin()); i < events_.size();
             ++i) {
            const EventEnvelope& ev = events_[i];
            if (!(ev.peak > upper_threshold)) {
                ++n;  // upper trigger never fires: in-window event
                continue;
            }
            const double x1 = first_crossing(ev, lower_threshold);
            const double x2 = first_crossing(ev, upper_threshold);
            if (x2 - x1 >= margin_s_) ++n;  // veto arrives late enough to pass the gates
        }
        return n;
    }

  private:
    std::vector<EventEnvelope> events_;
    std::vector<double> peaks_;
    double margin_s_ = 0.0;
};

} // namespace cryochain
