#pragma once

// Scenario configuration: a flat, human-editable `key = value` text format
// with '#' comments. Chosen over nested formats so parse errors carry line
// numbers and configs diff cleanly. Unknown keys are errors by default
// (silent typos in threshold names would invalidate results); lax mode
// downgrades them to warnings. serialize_scenario emits every key sorted,
// so parse(serialize(s)) round-trips exactly.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandpass.hpp"
#include "csv.hpp"
#include "discriminator.hpp"
#include "laser_link.hpp"
#include "modulator.hpp"
#include "schmitt.hpp"
#include "snspd.hpp"
#include "snspd_array.hpp"

namespace cryochain {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct ValidationError : std::runtime_error {
    std::string field;
    ValidationError(std::string field_name, const std::string& msg)
        : std::runtime_error("field '" + field_name + "': " + msg), field(std::move(field_name)) {}
};

struct BiasScanConfig {
    double bias_min_a = 1e-6;  // strictly positive: the detector model rejects zero bias
    double bias_max_a = 24e-6;
    long points = 47;          // 0.5 uA steps from 1 to 24 uA
    long pulses_per_point = 200000;
    double rep_rate_hz = 1e6;
    double mean_photons = 0.5;  // attenuated illumination
};

struct PnrConfig {
    double mu = 2.0;
    long pulses = 10000;
    double projection_angle_deg = 70.0;
    double threshold_fraction = 0.4;
    double window_s = 200e-9;
    double pulse_t0_s = 20e-9;
    double rise_max_s = 10e-9;
    double fall_max_s = 40e-9;
    long rise_bins = 100;
    long fall_bins = 160;
    long projection_bins = 140;
};

struct SweepConfig {
    double threshold_min_v = 10e-3;
    double threshold_max_v = 115e-3;
    long grid_points = 50;
    long pulses = 10000;
    double mean_photons = 2.0;
    double rep_rate_hz = 1e6;  // rate normalization for reported counts
    double window_s = 200e-9;
    double pulse_t0_s = 40e-9;
};

struct LaserReadoutConfig {
    long jitter_trials = 300;
    long edge_trials = 200;
    double window_s = 400e-9;
    double pulse_t0_s = 100e-9;
    double threshold_fraction = 0.5;
    double timing_floor_sigma_s = 65e-12;
    double conventional_gain_db = 20.0;
    double conventional_f_low_hz = 1e6;
    double conventional_f_high_hz = 80e6;
    double conventional_noise_sigma_v = 5.0e-4;
};

struct LatencyConfig {
    double trace_length_m = 0.25;
    double trace_uncertainty_m = 0.05;
    double room_cable_length_m = 4.0;
    double digital_uncertainty_s = 2e-9;
    double modulator_risetime_uncertainty_s = 0.5e-9;
};

struct HeatConfig {
    std::string first_stage_mode = "high";  // "high" or "low"
    double amp2_mw = 1.3;
    double amp3_mw = 1.3;
    double trigger_lower_mw = 4.3;
    double trigger_upper_mw = 4.3;
    double logic_mw = 1.5;
    double driver_mw = 9.0;
    double budget_4k_w = 1.0;
    double budget_1k_w = 500e-6;
    double modulator_capacitance_f = 30e-12;
    double switch_rate_hz = 0.0;
};

struct SimulateConfig {
    long n_photons = 1;
    double window_s = 400e-9;
    double pulse_t0_s = 100e-9;
};

struct Scenario {
    std::string name = "default";
    std::uint64_t master_seed = 0;
    std::string out_dir;
    double sample_rate_hz = kDefaultSampleRate;

    SnspdModel detector{};
    SnspdModel detector_conventional{};
    MultiplexedArray array{};
    LaserLink link{};
    SchmittTrigger trigger_lower{};
    SchmittTrigger trigger_upper{};
    DiscriminatorGates gates{};
    ModulatorDriver driver{};
    EoModulator modulator{};

    long chain_stage_count = 3;
    BandPassStage chain_stages[4] = {first_stage(PowerMode::high), first_stage(PowerMode::high),
                                     first_stage(PowerMode::high), commercial_stage()};

    BiasScanConfig bias_scan{};
    PnrConfig pnr{};
    SweepConfig sweep{};
    LaserReadoutConfig laser{};
    LatencyConfig latency{};
    HeatConfig heat{};
    SimulateConfig simulate{};

    Scenario() {
        // The conventional-readout detector: shorter plateau, earlier latch,
        // busier dark counts than the cryo-readout configuration.
        detector_conventional.plateau_onset_a = 12.5e-6;
        detector_conventional.plateau_end_a = 15e-6;
        detector_conventional.latch_current_a = 17e-6;
        detector_conventional.dark_rate_hz = 200.0;

        trigger_lower.threshold_v = 12.5e-3;
        trigger_lower.feedback_tau_s = 60e-9;   // the 30 pF feedback capacitor
        trigger_upper.threshold_v = 37.5e-3;
        trigger_upper.feedback_tau_s = 164e-9;  // the 82 pF feedback capacitor
    }
};

namespace detail {

struct KeyDef {
    std::string key;
    std::function<void(Scenario&, const std::string&, int)> set;  // raw value, line no
    std::function<std::string(const Scenario&)> get;
};

inline double parse_double_value(const std::string& raw, const std::string& key, int line) {
    const char* begin = raw.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError(line, "key '" + key + "' expects a number, got '" + raw + "'");
    return v;
}

inline long parse_long_value(const std::string& raw, const std::string& key, int line) {
    const char* begin = raw.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw ParseError(line, "key '" + key + "' expects an integer, got '" + raw + "'");
    return v;
}

inline std::uint64_t parse_uint_value(const std::string& raw, const std::string& key, int line) {
    const char* begin = raw.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || raw.front() == '-')
        throw ParseError(line, "key '" + key + "' expects an unsigned integer, got '" + raw + "'");
    return v;
}

inline bool parse_bool_value(const std::string& raw, const std::string& key, int line) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ParseError(line, "key '" + key + "' expects true/false, got '" + raw + "'");
}

template <typename Acc>
void add_double_key(std::vector<KeyDef>& defs, const std::string& key, Acc acc) {
    defs.push_back(
        {key,
         [acc, key](Scenario& s, const std::string& raw, int line) {
             acc(s) = parse_double_value(raw, key, line);
         },
         [acc](const Scenario& s) { return format_double(acc(const_cast<Scenario&>(s))); }});
}

template <typename Acc>
void add_long_key(std::vector<KeyDef>& defs, const std::string& key, Acc acc) {
    defs.push_back(
        {key,
         [acc, key](Scenario& s, const std::string& raw, int line) {
             acc(s) = parse_long_value(raw, key, line);
         },
         [acc](const Scenario& s) { return std::to_string(acc(const_cast<Scenario&>(s))); }});
}

template <typename Acc>
void add_bool_key(std::vector<KeyDef>& defs, const std::string& key, Acc acc) {
    defs.push_back({key,
                    [acc, key](Scenario& s, const std::string& raw, int line) {
                        acc(s) = parse_bool_value(raw, key, line);
                    },
                    [acc](const Scenario& s) {
                        return acc(const_cast<Scenario&>(s)) ? std::string("true")
                                                             : std::string("false");
                    }});
}

template <typename Acc>
void add_string_key(std::vector<KeyDef>& defs, const std::string& key, Acc acc) {
    defs.push_back({key,
                    [acc](Scenario& s, const std::string& raw, int) { acc(s) = raw; },
                    [acc](const Scenario& s) { return acc(const_cast<Scenario&>(s)); }});
}

template <typename Acc>
void add_uint_key(std::vector<KeyDef>& defs, const std::string& key, Acc acc) {
    defs.push_back(
        {key,
         [acc, key](Scenario& s, const std::string& raw, int line) {
             acc(s) = parse_uint_value(raw, key, line);
         },
         [acc](const Scenario& s) { return std::to_string(acc(const_cast<Scenario&>(s))); }});
}

inline void add_detector_keys(std::vector<KeyDef>& defs, const std::string& prefix,
                              SnspdModel Scenario::*member) {
    auto f = [member](auto field) {
        return [member, field](Scenario& s) -> double& { return s.*member.*field; };
    };
    add_double_key(defs, prefix + ".i_bias_a", f(&SnspdModel::i_bias_a));
    add_double_key(defs, prefix + ".kinetic_inductance_h", f(&SnspdModel::kinetic_inductance_h));
    add_double_key(defs, prefix + ".hotspot_resistance_ohm",
                   f(&SnspdModel::hotspot_resistance_ohm));
    add_double_key(defs, prefix + ".load_impedance_ohm", f(&SnspdModel::load_impedance_ohm));
    add_double_key(defs, prefix + ".latch_current_a", f(&SnspdModel::latch_current_a));
    add_double_key(defs, prefix + ".dark_rate_hz", f(&SnspdModel::dark_rate_hz));
    add_double_key(defs, prefix + ".dark_scale_a", f(&SnspdModel::dark_scale_a));
    add_double_key(defs, prefix + ".efficiency_mid", f(&SnspdModel::efficiency_mid));
    add_double_key(defs, prefix + ".plateau_onset_a", f(&SnspdModel::plateau_onset_a));
    add_double_key(defs, prefix + ".plateau_end_a", f(&SnspdModel::plateau_end_a));
}

inline void add_trigger_keys(std::vector<KeyDef>& defs, const std::string& prefix,
                             SchmittTrigger Scenario::*member) {
    auto f = [member](auto field) {
        return [member, field](Scenario& s) -> double& { return s.*member.*field; };
    };
    add_double_key(defs, prefix + ".threshold_v", f(&SchmittTrigger::threshold_v));
    add_double_key(defs, prefix + ".feedback_fraction", f(&SchmittTrigger::feedback_fraction));
    add_double_key(defs, prefix + ".feedback_tau_s", f(&SchmittTrigger::feedback_tau_s));
    add_double_key(defs, prefix + ".output_high_v", f(&SchmittTrigger::output_high_v));
    add_double_key(defs, prefix + ".output_low_v", f(&SchmittTrigger::output_low_v));
    add_double_key(defs, prefix + ".comparator_delay_s", f(&SchmittTrigger::comparator_delay_s));
}

inline void add_stage_keys(std::vector<KeyDef>& defs, const std::string& prefix, int index) {
    auto f = [index](auto field) {
        return [index, field](Scenario& s) -> double& { return s.chain_stages[index].*field; };
    };
    add_double_key(defs, prefix + ".gain_db", f(&BandPassStage::gain_db));
    add_double_key(defs, prefix + ".f_low_hz", f(&BandPassStage::f_low_hz));
    add_double_key(defs, prefix + ".f_high_hz", f(&BandPassStage::f_high_hz));
    add_bool_key(defs, prefix + ".inverting", [index](Scenario& s) -> bool& {
        return s.chain_stages[index].inverting;
    });
    add_double_key(defs, prefix + ".power_dissipation_w", f(&BandPassStage::power_dissipation_w));
    add_double_key(defs, prefix + ".added_noise_sigma_v", f(&BandPassStage::added_noise_sigma_v));
}

inline const std::vector<KeyDef>& scenario_keys() {
    static const std::vector<KeyDef> defs = [] {
        std::vector<KeyDef> d;
        add_string_key(d, "name", [](Scenario& s) -> std::string& { return s.name; });
        add_uint_key(d, "master_seed", [](Scenario& s) -> std::uint64_t& { return s.master_seed; });
        add_string_key(d, "out_dir", [](Scenario& s) -> std::string& { return s.out_dir; });
        add_double_key(d, "sample_rate_hz",
                       [](Scenario& s) -> double& { return s.sample_rate_hz; });

        add_detector_keys(d, "detector", &Scenario::detector);
        add_detector_keys(d, "detector_conventional", &Scenario::detector_conventional);

        add_long_key(d, "array.n_pixels", [](Scenario& s) -> int& { return s.array.n_pixels; });
        add_double_key(d, "array.unit_amplitude_v",
                       [](Scenario& s) -> double& { return s.array.unit_amplitude_v; });
        add_double_key(d, "array.crosstalk_prob",
                       [](Scenario& s) -> double& { return s.array.crosstalk_prob; });
        add_double_key(d, "array.switch_over_prob",
                       [](Scenario& s) -> double& { return s.array.switch_over_prob; });
        add_double_key(d, "array.switch_over_delay_s",
                       [](Scenario& s) -> double& { return s.array.switch_over_delay_s; });

        add_double_key(d, "link.bias_current_a",
                       [](Scenario& s) -> double& { return s.link.bias_current_a; });
        add_double_key(d, "link.threshold_current_a",
                       [](Scenario& s) -> double& { return s.link.threshold_current_a; });
        add_double_key(d, "link.bias_impedance_ohm",
                       [](Scenario& s) -> double& { return s.link.bias_impedance_ohm; });
        add_double_key(d, "link.slope_efficiency_w_per_v",
                       [](Scenario& s) -> double& { return s.link.slope_efficiency_w_per_v; });
        add_double_key(d, "link.link_noise_sigma_v",
                       [](Scenario& s) -> double& { return s.link.link_noise_sigma_v; });
        add_double_key(d, "link.noise_center_hz",
                       [](Scenario& s) -> double& { return s.link.noise_center_hz; });
        add_double_key(d, "link.noise_bandwidth_hz",
                       [](Scenario& s) -> double& { return s.link.noise_bandwidth_hz; });
        add_double_key(d, "link.photodiode_gain_v_per_w",
                       [](Scenario& s) -> double& { return s.link.photodiode_gain_v_per_w; });
        add_double_key(d, "link.lowpass_cutoff_hz",
                       [](Scenario& s) -> double& { return s.link.lowpass_cutoff_hz; });
        add_double_key(d, "link.ring_f0_hz",
                       [](Scenario& s) -> double& { return s.link.ring_f0_hz; });
        add_double_key(d, "link.ring_zeta",
                       [](Scenario& s) -> double& { return s.link.ring_zeta; });

        add_trigger_keys(d, "trigger.lower", &Scenario::trigger_lower);
        add_trigger_keys(d, "trigger.upper", &Scenario::trigger_upper);

        add_double_key(d, "gates.inverter_delay_s", [](Scenario& s) -> double& {
            return s.gates.inverter.propagation_delay_s;
        });
        add_double_key(d, "gates.nand_delay_s", [](Scenario& s) -> double& {
            return s.gates.nand_gate.propagation_delay_s;
        });
        add_double_key(d, "gates.buffer_delay_s", [](Scenario& s) -> double& {
            return s.gates.output_buffer.propagation_delay_s;
        });

        add_double_key(d, "driver.v_high", [](Scenario& s) -> double& { return s.driver.v_high; });
        add_double_key(d, "driver.v_low", [](Scenario& s) -> double& { return s.driver.v_low; });
        add_double_key(d, "driver.slew_10_90_s",
                       [](Scenario& s) -> double& { return s.driver.slew_10_90_s; });

        add_double_key(d, "modulator.v_pi", [](Scenario& s) -> double& { return s.modulator.v_pi; });
        add_double_key(d, "modulator.bandwidth_hz",
                       [](Scenario& s) -> double& { return s.modulator.bandwidth_hz; });
        add_double_key(d, "modulator.insertion_loss_db",
                       [](Scenario& s) -> double& { return s.modulator.insertion_loss_db; });
        add_double_key(d, "modulator.bias_point_v",
                       [](Scenario& s) -> double& { return s.modulator.bias_point_v; });

        add_long_key(d, "chain.stage_count",
                     [](Scenario& s) -> long& { return s.chain_stage_count; });
        add_stage_keys(d, "chain.stage1", 0);
        add_stage_keys(d, "chain.stage2", 1);
        add_stage_keys(d, "chain.stage3", 2);
        add_stage_keys(d, "chain.stage4", 3);

        add_double_key(d, "bias_scan.bias_min_a",
                       [](Scenario& s) -> double& { return s.bias_scan.bias_min_a; });
        add_double_key(d, "bias_scan.bias_max_a",
                       [](Scenario& s) -> double& { return s.bias_scan.bias_max_a; });
        add_long_key(d, "bias_scan.points",
                     [](Scenario& s) -> long& { return s.bias_scan.points; });
        add_long_key(d, "bias_scan.pulses_per_point",
                     [](Scenario& s) -> long& { return s.bias_scan.pulses_per_point; });
        add_double_key(d, "bias_scan.rep_rate_hz",
                       [](Scenario& s) -> double& { return s.bias_scan.rep_rate_hz; });
        add_double_key(d, "bias_scan.mean_photons",
                       [](Scenario& s) -> double& { return s.bias_scan.mean_photons; });

        add_double_key(d, "pnr.mu", [](Scenario& s) -> double& { return s.pnr.mu; });
        add_long_key(d, "pnr.pulses", [](Scenario& s) -> long& { return s.pnr.pulses; });
        add_double_key(d, "pnr.projection_angle_deg",
                       [](Scenario& s) -> double& { return s.pnr.projection_angle_deg; });
        add_double_key(d, "pnr.threshold_fraction",
                       [](Scenario& s) -> double& { return s.pnr.threshold_fraction; });
        add_double_key(d, "pnr.window_s", [](Scenario& s) -> double& { return s.pnr.window_s; });
        add_double_key(d, "pnr.pulse_t0_s",
                       [](Scenario& s) -> double& { return s.pnr.pulse_t0_s; });
        add_double_key(d, "pnr.rise_max_s",
                       [](Scenario& s) -> double& { return s.pnr.rise_max_s; });
        add_double_key(d, "pnr.fall_max_s",
                       [](Scenario& s) -> double& { return s.pnr.fall_max_s; });
        add_long_key(d, "pnr.rise_bins", [](Scenario& s) -> long& { return s.pnr.rise_bins; });
        add_long_key(d, "pnr.fall_bins", [](Scenario& s) -> long& { return s.pnr.fall_bins; });
        add_long_key(d, "pnr.projection_bins",
                     [](Scenario& s) -> long& { return s.pnr.projection_bins; });

        add_double_key(d, "sweep.threshold_min_v",
                       [](Scenario& s) -> double& { return s.sweep.threshold_min_v; });
        add_double_key(d, "sweep.threshold_max_v",
                       [](Scenario& s) -> double& { return s.sweep.threshold_max_v; });
        add_long_key(d, "sweep.grid_points",
                     [](Scenario& s) -> long& { return s.sweep.grid_points; });
        add_long_key(d, "sweep.pulses", [](Scenario& s) -> long& { return s.sweep.pulses; });
        add_double_key(d, "sweep.mean_photons",
                       [](Scenario& s) -> double& { return s.sweep.mean_photons; });
        add_double_key(d, "sweep.rep_rate_hz",
                       [](Scenario& s) -> double& { return s.sweep.rep_rate_hz; });
        add_double_key(d, "sweep.window_s",
                       [](Scenario& s) -> double& { return s.sweep.window_s; });
        add_double_key(d, "sweep.pulse_t0_s",
                       [](Scenario& s) -> double& { return s.sweep.pulse_t0_s; });

        add_long_key(d, "laser.jitter_trials",
                     [](Scenario& s) -> long& { return s.laser.jitter_trials; });
        add_long_key(d, "laser.edge_trials",
                     [](Scenario& s) -> long& { return s.laser.edge_trials; });
        add_double_key(d, "laser.window_s",
                       [](Scenario& s) -> double& { return s.laser.window_s; });
        add_double_key(d, "laser.pulse_t0_s",
                       [](Scenario& s) -> double& { return s.laser.pulse_t0_s; });
        add_double_key(d, "laser.threshold_fraction",
                       [](Scenario& s) -> double& { return s.laser.threshold_fraction; });
        add_double_key(d, "laser.timing_floor_sigma_s",
                       [](Scenario& s) -> double& { return s.laser.timing_floor_sigma_s; });
        add_double_key(d, "laser.conventional_gain_db",
                       [](Scenario& s) -> double& { return s.laser.conventional_gain_db; });
        add_double_key(d, "laser.conventional_f_low_hz",
                       [](Scenario& s) -> double& { return s.laser.conventional_f_low_hz; });
        add_double_key(d, "laser.conventional_f_high_hz",
                       [](Scenario& s) -> double& { return s.laser.conventional_f_high_hz; });
        add_double_key(d, "laser.conventional_noise_sigma_v",
                       [](Scenario& s) -> double& { return s.laser.conventional_noise_sigma_v; });

        add_double_key(d, "latency.trace_length_m",
                       [](Scenario& s) -> double& { return s.latency.trace_length_m; });
        add_double_key(d, "latency.trace_uncertainty_m",
                       [](Scenario& s) -> double& { return s.latency.trace_uncertainty_m; });
        add_double_key(d, "latency.room_cable_length_m",
                       [](Scenario& s) -> double& { return s.latency.room_cable_length_m; });
        add_double_key(d, "latency.digital_uncertainty_s",
                       [](Scenario& s) -> double& { return s.latency.digital_uncertainty_s; });
        add_double_key(d, "latency.modulator_risetime_uncertainty_s", [](Scenario& s) -> double& {
            return s.latency.modulator_risetime_uncertainty_s;
        });

        add_string_key(d, "heat.first_stage_mode",
                       [](Scenario& s) -> std::string& { return s.heat.first_stage_mode; });
        add_double_key(d, "heat.amp2_mw", [](Scenario& s) -> double& { return s.heat.amp2_mw; });
        add_double_key(d, "heat.amp3_mw", [](Scenario& s) -> double& { return s.heat.amp3_mw; });
        add_double_key(d, "heat.trigger_lower_mw",
                       [](Scenario& s) -> double& { return s.heat.trigger_lower_mw; });
        add_double_key(d, "heat.trigger_upper_mw",
                       [](Scenario& s) -> double& { return s.heat.trigger_upper_mw; });
        add_double_key(d, "heat.logic_mw", [](Scenario& s) -> double& { return s.heat.logic_mw; });
        add_double_key(d, "heat.driver_mw",
                       [](Scenario& s) -> double& { return s.heat.driver_mw; });
        add_double_key(d, "heat.budget_4k_w",
                       [](Scenario& s) -> double& { return s.heat.budget_4k_w; });
        add_double_key(d, "heat.budget_1k_w",
                       [](Scenario& s) -> double& { return s.heat.budget_1k_w; });
        add_double_key(d, "heat.modulator_capacitance_f",
                       [](Scenario& s) -> double& { return s.heat.modulator_capacitance_f; });
        add_double_key(d, "heat.switch_rate_hz",
                       [](Scenario& s) -> double& { return s.heat.switch_rate_hz; });

        add_long_key(d, "simulate.n_photons",
                     [](Scenario& s) -> long& { return s.simulate.n_photons; });
        add_double_key(d, "simulate.window_s",
                       [](Scenario& s) -> double& { return s.simulate.window_s; });
        add_double_key(d, "simulate.pulse_t0_s",
                       [](Scenario& s) -> double& { return s.simulate.pulse_t0_s; });
        return d;
    }();
    return defs;
}

inline const std::map<std::string, const KeyDef*>& scenario_key_index() {
    static const std::map<std::string, const KeyDef*> index = [] {
        std::map<std::string, const KeyDef*> m;
        for (const auto& def : scenario_keys()) m.emplace(def.key, &def);
        return m;
    }();
    return index;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace detail

// Semantic validation. Throws ValidationError naming the offending field(s).
inline void validate_scenario(const Scenario& s) {
    auto check = [](const std::string& field, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw ValidationError(field, e.what());
        }
    };
    check("detector", [&] { validate_model(s.detector); });
    check("detector_conventional", [&] { validate_model(s.detector_conventional); });
    check("array", [&] { validate_array(s.array); });
    check("link", [&] { validate_link(s.link); });
    check("trigger.lower", [&] { validate_trigger(s.trigger_lower); });
    check("trigger.upper", [&] { validate_trigger(s.trigger_upper); });
    check("modulator", [&] { validate_modulator(s.modulator); });

    if (!(s.trigger_lower.threshold_v < s.trigger_upper.threshold_v))
        throw ValidationError("trigger.lower.threshold_v, trigger.upper.threshold_v",
                              "lower threshold must be below upper threshold");
    if (!(s.trigger_upper.feedback_tau_s > s.trigger_lower.feedback_tau_s))
        throw ValidationError("trigger.lower.feedback_tau_s, trigger.upper.feedback_tau_s",
                              "upper trigger needs the longer feedback time constant");
    if (!(s.sample_rate_hz > 0.0))
        throw ValidationError("sample_rate_hz", "sample rate must be positive");
    if (s.chain_stage_count < 1 || s.chain_stage_count > 4)
        throw ValidationError("chain.stage_count", "stage count must lie in [1,4]");
    for (long i = 0; i < s.chain_stage_count; ++i) {
        const std::string field = "chain.stage" + std::to_string(i + 1);
        check(field, [&] { validate_stage(s.chain_stages[i]); });
    }
    if (s.heat.first_stage_mode != "high" && s.heat.first_stage_mode != "low")
        throw ValidationError("heat.first_stage_mode", "must be 'high' or 'low'");
    if (s.bias_scan.points < 2) throw ValidationError("bias_scan.points", "need at least 2 points");
    if (s.sweep.grid_points < 2)
        throw ValidationError("sweep.grid_points", "need at least 2 grid points");
    if (!(s.pnr.mu > 0.0)) throw ValidationError("pnr.mu", "mean photon number must be positive");
    if (s.simulate.n_photons < 0)
        throw ValidationError("simulate.n_photons", "photon count must be non-negative");
}

// Parse the key = value text. Unknown keys are ParseErrors in strict mode;
// in lax mode they are appended to `warnings` (if provided) and skipped.
inline Scenario parse_scenario(const std::string& text, bool lax = false,
                               std::vector<std::string>* warnings = nullptr) {
    Scenario s;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line =
            eol == std::string::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "missing key before '='");

        const auto& index = detail::scenario_key_index();
        const auto it = index.find(key);
        if (it == index.end()) {
            if (lax) {
                if (warnings)
                    warnings->push_back("line " + std::to_string(line_no) + ": unknown key '" +
                                        key + "' ignored");
                continue;
            }
            throw ParseError(line_no, "unknown key '" + key + "'");
        }
        it->second->set(s, value, line_no);
    }
    validate_scenario(s);
    return s;
}

// Every key, sorted, one per line. parse(serialize(s)) == s.
inline std::string serialize_scenario(const Scenario& s) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& def : detail::scenario_keys()) rows.emplace_back(def.key, def.get(s));
    std::sort(rows.begin(), rows.end());
    std::string out;
    for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
    return out;
}

inline bool scenario_equal(const Scenario& a, const Scenario& b) {
    return serialize_scenario(a) == serialize_scenario(b);
}

} // namespace cryochain
