// Sweep fast path: the running-max staircase must reproduce the full
// trigger + gate network exactly, cell by cell. Plus scenario text parsing,
// serialization round-trips, and validation diagnostics.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <cryochain/discriminator.hpp>
#include <cryochain/noise.hpp>
#include <cryochain/scenario.hpp>
#include <cryochain/schmitt.hpp>
#include <cryochain/snspd_array.hpp>
#include <cryochain/sweep_engine.hpp>
#include <cryochain/waveform.hpp>

using namespace cryochain;
using Catch::Approx;

TEST_CASE("staircase first-crossing matches the trigger's interpolation", "[sweep]") {
    SnspdModel det;
    Waveform w = pulse_waveform(det, 2, 40e-9, 200e-9);
    Rng nrng(55);
    w = add_gaussian_noise(w, 0.02e-3, nrng);
    const EventEnvelope env = build_envelope(w, 1, false);
    CHECK(env.peak == Approx(max_value(w)));

    for (double level : {0.1e-3, 0.2e-3, 0.35e-3, 0.5e-3}) {
        SchmittTrigger trig;
        trig.threshold_v = level;
        trig.feedback_tau_s = 60e-9;
        const DigitalWaveform resp = trigger_response(trig, w);
        REQUIRE(resp.pulse_count() == 1);
        // The trigger stamps crossing + comparator delay; the envelope
        // reports the bare crossing instant.
        CHECK(first_crossing(env, level) ==
              Approx(resp.transitions[0].time_s - trig.comparator_delay_s).margin(1e-15));
    }

    // Above the record's peak: no crossing.
    CHECK(std::isnan(first_crossing(env, env.peak + 1e-6)));
    // A record that starts above the level fires at t = 0, like the trigger.
    Waveform hot = make_waveform(100e-9, 1e10, 1.0);
    CHECK(first_crossing(build_envelope(hot), 0.5) == 0.0);
}

TEST_CASE("gate-margin closed form", "[sweep]") {
    DiscriminatorGates gates;  // inverter 3 ns, nand 3 ns, buffer 4 ns
    SchmittTrigger lower, upper;
    upper.threshold_v = 0.15;
    upper.feedback_tau_s = 164e-9;
    CHECK(discriminator_margin(gates, lower, upper) == Approx(7e-9));

    // Asymmetric comparator delays shift the margin accordingly.
    SchmittTrigger slow_lower = lower;
    slow_lower.comparator_delay_s = 6e-9;
    CHECK(discriminator_margin(gates, slow_lower, upper) == Approx(9e-9));

    DiscriminatorGates fat = gates;
    fat.nand_gate.propagation_delay_s = 6e-9;
    CHECK(discriminator_margin(fat, lower, upper) == Approx(3e-9 + 6e-9));
}

namespace {

struct Pool {
    std::vector<Waveform> records;
    std::vector<EventEnvelope> envelopes;
};

// Noisy multiplexed-array records (fast edges, some switch-over events).
Pool array_pool(int count, std::uint64_t seed) {
    Pool p;
    MultiplexedArray arr;
    SnspdModel det;
    Rng ev_rng = Rng::substream(seed, 0);
    Rng noise_rng = Rng::substream(seed, 1);
    Rng photon_rng = Rng::substream(seed, 2);
    for (int i = 0; i < count; ++i) {
        const int n = 1 + static_cast<int>(photon_rng.poisson(1.5));
        const DetectionEvent ev = array_event(arr, n, ev_rng, 40e-9);
        Waveform w = array_waveform(arr, ev, det, 200e-9);
        w = add_gaussian_noise(w, 1e-3, noise_rng);
        p.records.push_back(w);
        p.envelopes.push_back(build_envelope(w, ev.pixel_count, ev.switch_over));
    }
    return p;
}

// A slow linear ramp: threshold crossings spread far apart in time.
Waveform slow_ramp(double ramp_s, double height) {
    Waveform w = make_waveform(200e-9, 1e10);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double t = w.time_at(i);
        if (t < 40e-9) continue;
        w[i] = t < 40e-9 + ramp_s ? height * (t - 40e-9) / ramp_s : height;
    }
    return w;
}

} // namespace

TEST_CASE("fast path reproduces the full gate network cell by cell", "[sweep]") {
    Pool pool = array_pool(36, 2001);
    // Slow crossers that the gate network lets through (gap >= 7 ns), and a
    // fast one it suppresses. Ramp durations are chosen so that no
    // (threshold pair, ramp) combination below puts the crossing gap exactly
    // on the 7 ns race margin, where the engine's gap rule and the gate
    // network's inertial arithmetic could round an exact tie differently
    // (e.g. 120 ns would give 17.5 mV / (0.3 V / 120 ns) = 7.0 ns exactly).
    for (double ramp : {110e-9, 85e-9, 32e-9}) {
        pool.records.push_back(slow_ramp(ramp, 0.3));
        pool.envelopes.push_back(build_envelope(pool.records.back(), 2, false));
    }

    const DiscriminatorGates gates;
    SchmittTrigger lower_proto, upper_proto;
    upper_proto.feedback_tau_s = 164e-9;
    const SweepEngine engine(pool.envelopes,
                             discriminator_margin(gates, lower_proto, upper_proto));
    REQUIRE(engine.size() == pool.records.size());

    const std::vector<double> xs = {10e-3, 20e-3, 35e-3, 60e-3, 90e-3};
    const std::vector<double> ys = {15e-3, 37.5e-3, 80e-3, 110e-3};
    int cells = 0;
    for (double x : xs) {
        for (double y : ys) {
            if (!(x < y)) continue;
            ++cells;
            SchmittTrigger lo = lower_proto;
            lo.threshold_v = x;
            SchmittTrigger hi = upper_proto;
            hi.threshold_v = y;
            long full = 0, full_lower = 0, full_upper = 0;
            for (const Waveform& w : pool.records) {
                const DiscriminatorOutcome r = discriminate(lo, hi, gates, w);
                full += r.output.pulse_count();
                full_lower += r.lower_monitor.pulse_count();
                full_upper += r.upper_monitor.pulse_count();
            }
            INFO("cell x=" << x << " y=" << y);
            REQUIRE(engine.count_strobes(x, y) == full);
            REQUIRE(engine.count_above(x) == full_lower);
            REQUIRE(engine.count_above(y) == full_upper);
        }
    }
    CHECK(cells == 13);

    // The slow crossers actually exercise the emission branch somewhere.
    CHECK(engine.count_strobes(10e-3, 110e-3) >
          engine.count_above(10e-3) - engine.count_above(110e-3));
}

TEST_CASE("window counts telescope when every edge is fast", "[sweep]") {
    const Pool pool = array_pool(48, 2002);
    const DiscriminatorGates gates;
    SchmittTrigger lower_proto, upper_proto;
    upper_proto.feedback_tau_s = 164e-9;
    const SweepEngine engine(pool.envelopes,
                             discriminator_margin(gates, lower_proto, upper_proto));

    // Array pulses sweep the window in ~2 ns (switch-over: ~6 ns), always
    // under the 7 ns margin, so every above-window event is swallowed and
    // the window count is an exact difference of single-trigger counts.
    for (double x : {10e-3, 30e-3, 55e-3, 80e-3}) {
        for (double y : {37.5e-3, 70e-3, 105e-3}) {
            if (!(x < y)) continue;
            REQUIRE(engine.count_strobes(x, y) ==
                    engine.count_above(x) - engine.count_above(y));
        }
    }
}

TEST_CASE("scenario defaults and round-trip", "[scenario]") {
    const Scenario s = parse_scenario("");
    CHECK(s.trigger_lower.threshold_v == Approx(12.5e-3));
    CHECK(s.trigger_upper.threshold_v == Approx(37.5e-3));
    // Feedback capacitor ratio 30:82 sets the two output widths.
    CHECK(s.trigger_upper.feedback_tau_s / s.trigger_lower.feedback_tau_s ==
          Approx(82.0 / 30.0));
    CHECK(s.chain_stage_count == 3);
    CHECK(s.chain_stages[0].gain_db == 20.0);
    CHECK(s.chain_stages[3].f_low_hz == Approx(200e6));
    CHECK(s.detector.latch_current_a == Approx(21e-6));
    CHECK(s.detector_conventional.latch_current_a == Approx(17e-6));
    CHECK(s.detector_conventional.plateau_end_a < s.detector.plateau_end_a);
    CHECK(s.array.n_pixels == 4);
    CHECK(s.sweep.grid_points == 50);

    Scenario mod = s;
    mod.name = "tweaked";
    mod.master_seed = 99;
    mod.detector.i_bias_a = 13e-6;
    mod.chain_stages[0].inverting = false;
    mod.heat.first_stage_mode = "low";
    mod.sweep.threshold_max_v = 0.2;
    const std::string text = serialize_scenario(mod);
    const Scenario back = parse_scenario(text);
    CHECK(scenario_equal(mod, back));
    CHECK(back.name == "tweaked");
    CHECK(back.detector.i_bias_a == Approx(13e-6));
    CHECK_FALSE(back.chain_stages[0].inverting);
    CHECK_FALSE(scenario_equal(mod, s));
}

TEST_CASE("scenario parse diagnostics carry line numbers", "[scenario]") {
    const std::string txt =
        "# header comment\n"
        "detector.i_bias_a = 1.05e-5  # inline comment\n"
        "unknown.key = 3\n";
    try {
        parse_scenario(txt);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }

    // Lax mode skips the unknown key but records a warning.
    std::vector<std::string> warnings;
    const Scenario s = parse_scenario(txt, true, &warnings);
    CHECK(s.detector.i_bias_a == Approx(1.05e-5));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("line 3") != std::string::npos);

    try {
        parse_scenario("detector.i_bias_a = abc\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(std::string(e.what()).find("number") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario("no equals sign here\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("= 5\n"), ParseError);
}

TEST_CASE("scenario validation names the offending fields", "[scenario]") {
    try {
        parse_scenario("trigger.lower.threshold_v = 0.05\n");  // above the upper default
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "trigger.lower.threshold_v, trigger.upper.threshold_v");
    }
    try {
        parse_scenario("sample_rate_hz = -1\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "sample_rate_hz");
    }
    try {
        parse_scenario("heat.first_stage_mode = medium\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "heat.first_stage_mode");
    }
    try {
        parse_scenario("chain.stage_count = 5\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "chain.stage_count");
    }
    try {
        parse_scenario("detector.plateau_end_a = 1e-6\n");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field == "detector");
    }
}
