// cryochain CLI: run one experiment from a scenario file and write its
// report (CSV tables, metrics, manifest, optional SVG plots) to a directory.
//
// Exit codes: 0 success; 1 simulation/runtime failure; 2 usage or
// configuration error. Errors print a single machine-readable stderr line:
//   error: <usage|config|runtime>: <message>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <cryochain/experiments.hpp>
#include <cryochain/svg.hpp>

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

double metric_value(const cryochain::ExperimentReport& rep, const std::string& name) {
    for (const auto& m : rep.scalar_metrics)
        if (m.name == name) return m.value;
    throw std::runtime_error("missing metric '" + name + "'");
}

void print_summary(const cryochain::ExperimentReport& rep, const std::string& sub) {
    if (sub == "latency") {
        std::printf("total_delay_ns = %g \xc2\xb1 %g\n",
                    metric_value(rep, "total_delay_rounded_ns"),
                    metric_value(rep, "total_uncertainty_rounded_ns"));
        return;
    }
    if (sub == "heat") {
        std::printf("total_mw = %g\n", metric_value(rep, "total_mw"));
        return;
    }
    for (const auto& m : rep.scalar_metrics) {
        std::printf("%s = %g", m.name.c_str(), m.value);
        if (!m.unit.empty()) std::printf(" %s", m.unit.c_str());
        std::printf("\n");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cryochain: sampled-time simulator of a cryogenic single-photon "
                 "feed-forward readout chain"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool svg = false;
    bool lax = false;

    app.add_option("--scenario", scenario_path, "scenario key = value file (defaults when omitted)");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override the scenario master seed");
    app.add_option("--out", out_dir, "output directory (default: $CRYOCHAIN_OUT, then ./out)");
    app.add_flag("--svg", svg, "also render SVG plots of every table");
    app.add_flag("--lax", lax, "warn on unknown scenario keys instead of failing");

    app.add_subcommand("bias-scan", "count and dark rates versus bias for both detector configs");
    app.add_subcommand("pnr", "photon-number resolution from edge-timing histograms");
    app.add_subcommand("sweep", "2D threshold sweep of the window discriminator");
    app.add_subcommand("laser", "laser link readout: traces, spectra, edge rate, jitter");
    app.add_subcommand("latency", "feed-forward latency budget");
    app.add_subcommand("heat", "cold-stage heat budget");
    app.add_subcommand("simulate", "single-shot end-to-end trace dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        cryochain::Scenario sc;
        std::vector<std::string> warnings;
        if (!scenario_path.empty())
            sc = cryochain::parse_scenario(read_file(scenario_path), lax, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        if (seed_opt->count() > 0) sc.master_seed = seed;

        std::string out = out_dir;
        if (out.empty()) {
            if (const char* env = std::getenv("CRYOCHAIN_OUT")) out = env;
            if (out.empty()) out = "out";
        }
        if (!sc.out_dir.empty() && out_dir.empty()) out = sc.out_dir;

        const std::string sub = app.get_subcommands().front()->get_name();
        const cryochain::ExperimentReport rep = cryochain::run_subcommand(sc, sub);

        auto files = cryochain::render_report(rep);
        files.emplace_back("scenario.txt", cryochain::serialize_scenario(sc));
        if (svg) {
            auto plots = cryochain::render_report_svgs(rep);
            files.insert(files.end(), plots.begin(), plots.end());
        }
        cryochain::write_files(files, out);
        cryochain::write_manifest(files, out);

        print_summary(rep, sub);
        std::printf("report: %s (%zu files)\n", out.c_str(), files.size() + 1);
        return 0;
    } catch (const cryochain::ParseError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const cryochain::ValidationError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 1;
    }
}
