// Report rendering: byte-stable CSV output, FNV-1a checksum manifest,
// filesystem round-trip, and SVG generation.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <cryochain/csv.hpp>
#include <cryochain/report.hpp>
#include <cryochain/svg.hpp>

using namespace cryochain;
using Catch::Approx;

TEST_CASE("format_double is stable and round-trips", "[csv]") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-3.0) == "-3");
    // 17 significant digits: every double round-trips exactly.
    for (double v : {1.0 / 3.0, 2.5e-8, 1.3815510557964274e-07, -6.02e23, 1e-300}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(csv_row(std::vector<std::string>{"a", "b", "c"}) == "a,b,c\n");
    CHECK(csv_row(std::vector<double>{1.0, 0.25}) == "1,0.25\n");
}

TEST_CASE("fnv1a64 matches the reference vectors", "[csv]") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(to_hex16(0xcbf29ce484222325ull) == "cbf29ce484222325");
    CHECK(to_hex16(0x1ull) == "0000000000000001");
}

namespace {

ExperimentReport sample_report() {
    ExperimentReport r;
    r.name = "sample";
    r.seed = 42;
    r.parameters = {{"mode", "test"}, {"points", "3"}};
    Table t;
    t.name = "trace";
    t.columns = {"t_s", "v"};
    t.rows = {{0.0, 0.0}, {1e-9, 0.5}, {2e-9, 0.25}};
    t.plot = PlotKind::trace;
    r.tables.push_back(t);
    Table h;
    h.name = "hist";
    h.columns = {"bin", "count"};
    h.rows = {{0.0, 2.0}, {1.0, 5.0}, {2.0, 1.0}};
    h.plot = PlotKind::histogram;
    r.tables.push_back(h);
    r.scalar_metrics = {{"peak_v", "V", 0.5}, {"events", "count", 3.0}};
    return r;
}

} // namespace

TEST_CASE("render_report is pure and byte-identical across calls", "[report]") {
    const auto files1 = render_report(sample_report());
    const auto files2 = render_report(sample_report());
    REQUIRE(files1.size() == 4);  // metrics, parameters, 2 tables
    REQUIRE(files1.size() == files2.size());
    for (std::size_t i = 0; i < files1.size(); ++i) {
        CHECK(files1[i].first == files2[i].first);
        CHECK(files1[i].second == files2[i].second);
    }

    CHECK(files1[0].first == "sample/metrics.csv");
    CHECK(files1[0].second.find("peak_v,V,0.5") != std::string::npos);
    CHECK(files1[1].first == "sample/parameters.csv");
    CHECK(files1[1].second.find("seed,42") != std::string::npos);
    CHECK(files1[2].first == "sample/trace.csv");
    CHECK(files1[2].second.rfind("t_s,v\n", 0) == 0);

    Table bad;
    bad.name = "bad";
    bad.columns = {"a", "b"};
    bad.rows = {{1.0}};
    CHECK_THROWS_AS(render_table_csv(bad), std::invalid_argument);
}

TEST_CASE("manifest is sorted and keyed by content", "[report]") {
    const auto files = render_report(sample_report());
    const std::string m1 = render_manifest(files);
    const std::string m2 = render_manifest(files);
    CHECK(m1 == m2);
    CHECK(m1.rfind("path,fnv1a64\n", 0) == 0);

    // Sorted by path regardless of input order.
    auto shuffled = files;
    std::swap(shuffled.front(), shuffled.back());
    CHECK(render_manifest(shuffled) == m1);

    // Any content change moves the checksum.
    auto tweaked = files;
    tweaked[0].second += " ";
    CHECK(render_manifest(tweaked) != m1);

    // Every rendered file is listed.
    for (const auto& [rel, bytes] : files) CHECK(m1.find(rel + ",") != std::string::npos);
}

TEST_CASE("write_files and write_manifest round-trip through the filesystem", "[report]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cryochain_report_test";
    fs::remove_all(dir);

    const auto files = render_report(sample_report());
    write_files(files, dir);
    write_manifest(files, dir);

    for (const auto& [rel, bytes] : files) {
        std::ifstream f(dir / rel, std::ios::binary);
        REQUIRE(f.good());
        std::stringstream ss;
        ss << f.rdbuf();
        CHECK(ss.str() == bytes);
    }
    std::ifstream mf(dir / "manifest.csv", std::ios::binary);
    REQUIRE(mf.good());
    std::stringstream ms;
    ms << mf.rdbuf();
    CHECK(ms.str() == render_manifest(files));

    fs::remove_all(dir);
}

TEST_CASE("svg rendering emits well-formed plots per table kind", "[svg]") {
    const ExperimentReport r = sample_report();
    const std::string trace_svg = render_table_svg(r.tables[0]);
    CHECK(trace_svg.rfind("<svg", 0) == 0);
    CHECK(trace_svg.find("</svg>") != std::string::npos);
    CHECK(trace_svg.find("polyline") != std::string::npos);

    const std::string hist_svg = render_table_svg(r.tables[1]);
    CHECK(hist_svg.find("rect") != std::string::npos);

    // Deterministic bytes.
    CHECK(render_table_svg(r.tables[0]) == trace_svg);

    // Tables without a plot kind are skipped by the report-level renderer.
    ExperimentReport plain = r;
    plain.tables[0].plot = PlotKind::none;
    plain.tables[1].plot = PlotKind::none;
    CHECK(render_report_svgs(plain).empty());
    const auto svgs = render_report_svgs(r);
    REQUIRE(svgs.size() == 2);
    CHECK(svgs[0].first == "sample/trace.svg");
    CHECK(svgs[1].first == "sample/hist.svg");
}
