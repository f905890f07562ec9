#pragma once

// Event-driven logic gates with inertial propagation delay: output pulses
// shorter than the propagation delay are suppressed, not merely delayed.
// This is load-bearing for the discriminator, whose race safety relies on
// a fast rising edge's transit through the window being swallowed.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "digital.hpp"

namespace cryochain {

enum class GateKind { not_gate, nand_gate, buffer_gate };

struct GateModel {
    GateKind kind = GateKind::not_gate;
    double propagation_delay_s = 3e-9;
    double output_high_v = 1.0;
};

inline int gate_arity(GateKind k) { return k == GateKind::nand_gate ? 2 : 1; }

inline bool gate_function(GateKind k, const std::vector<bool>& in) {
    switch (k) {
        case GateKind::not_gate: return !in[0];
        case GateKind::buffer_gate: return in[0];
        case GateKind::nand_gate: return !(in[0] && in[1]);
    }
    return false;
}

inline DigitalWaveform gate_eval(const GateModel& g, const std::vector<DigitalWaveform>& inputs) {
    if (!(g.propagation_delay_s >= 0.0))
        throw std::invalid_argument("gate_eval: negative propagation delay");
    if (static_cast<int>(inputs.size()) != gate_arity(g.kind))
        throw std::invalid_argument("gate_eval: arity mismatch");
    for (const auto& in : inputs) validate_digital(in);

    // Merge input transitions into a single time-ordered event sweep.
    std::vector<bool> levels(inputs.size());
    std::vector<std::size_t> cursor(inputs.size(), 0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        levels[i] = inputs[i].initial_level() == Level::high;
        // Skip the -infinity transition that encodes the initial level.
        if (!inputs[i].transitions.empty() &&
            !std::isfinite(inputs[i].transitions.front().time_s))
            cursor[i] = 1;
    }

    // Ideal (zero-delay) output transitions.
    std::vector<Transition> ideal;
    bool out_level = gate_function(g.kind, levels);
    if (out_level)
        ideal.push_back({-std::numeric_limits<double>::infinity(), Level::high});

    for (;;) {
        double next = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < inputs.size(); ++i)
            if (cursor[i] < inputs[i].transitions.size())
                next = std::min(next, inputs[i].transitions[cursor[i]].time_s);
        if (!std::isfinite(next)) break;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            while (cursor[i] < inputs[i].transitions.size() &&
                   inputs[i].transitions[cursor[i]].time_s == next) {
                levels[i] = inputs[i].transitions[cursor[i]].level == Level::high;
                ++cursor[i];
            }
        const bool value = gate_function(g.kind, levels);
        if (value != out_level) {
            out_level = value;
            ideal.push_back({next, value ? Level::high : Level::low});
        }
    }

    // Inertial filtering: a new output value must persist for at least the
    // propagation delay before it is committed; shorter-lived values
    // annihilate with the transition that reverts them.
    std::vector<Transition> kept;
    bool have_pending = false;
    Transition pending{};
    for (const auto& tr : ideal) {
        if (!std::isfinite(tr.time_s)) {
            kept.push_back(tr);  // initial level, persisted forever
            continue;
        }
        if (have_pending && tr.time_s - pending.time_s < g.propagation_delay_s) {
            have_pending = false;  // pending value did not persist
        } else {
            if (have_pending) kept.push_back(pending);
            pending = tr;
            have_pending = true;
        }
    }
    if (have_pending) kept.push_back(pending);

    DigitalWaveform out;
    out.transitions.reserve(kept.size());
    for (const auto& tr : kept)
        out.transitions.push_back({tr.time_s + g.propagation_delay_s, tr.level});
    // -infinity + delay stays -infinity, preserving the initial level.
    validate_digital(out);
    return out;
}

} // namespace cryochain
