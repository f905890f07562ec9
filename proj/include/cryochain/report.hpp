#pragma once

// Experiment reports and their serialized form.
//
// Rendering is pure: render_report turns a report into (relative path,
// bytes) pairs, so byte-identity across runs can be tested without touching
// the filesystem. write_files + write_manifest do the IO; the manifest
// lists every emitted file with its FNV-1a 64 checksum.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"

namespace cryochain {

enum class PlotKind { none, trace, histogram, heatmap, digital };

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    PlotKind plot = PlotKind::none;
};

struct Metric {
    std::string name;
    std::string unit;
    double value = 0.0;
};

struct ExperimentReport {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<Table> tables;
    std::vector<Metric> scalar_metrics;
};

using RenderedFile = std::pair<std::string, std::string>;  // relative path, bytes

inline std::string render_table_csv(const Table& t) {
    std::string out = csv_row(t.columns);
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size())
            throw std::invalid_argument("render_table_csv: row width mismatch in " + t.name);
        out += csv_row(row);
    }
    return out;
}

inline std::vector<RenderedFile> render_report(const ExperimentReport& r) {
    std::vector<RenderedFile> files;

    std::string metrics = "metric,unit,value\n";
    for (const auto& m : r.scalar_metrics)
        metrics += csv_row(std::vector<std::string>{m.name, m.unit, format_double(m.value)});
    files.emplace_back(r.name + "/metrics.csv", std::move(metrics));

    std::string params = "key,value\n";
    params += csv_row(std::vector<std::string>{"seed", std::to_string(r.seed)});
    for (const auto& [k, v] : r.parameters)
        params += csv_row(std::vector<std::string>{k, v});
    files.emplace_back(r.name + "/parameters.csv", std::move(params));

    for (const auto& t : r.tables)
        files.emplace_back(r.name + "/" + t.name + ".csv", render_table_csv(t));
    return files;
}

inline void write_files(const std::vector<RenderedFile>& files,
                        const std::filesystem::path& out_dir) {
    for (const auto& [rel, bytes] : files) {
        const std::filesystem::path p = out_dir / rel;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("write_files: cannot open " + p.string());
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw std::runtime_error("write_files: short write to " + p.string());
    }
}

// Manifest over everything written in this run (the manifest itself is not
// listed). Rows are sorted by path for stable bytes.
inline std::string render_manifest(std::vector<RenderedFile> files) {
    std::sort(files.begin(), files.end(),
              [](const RenderedFile& a, const RenderedFile& b) { return a.first < b.first; });
    std::string out = "path,fnv1a64\n";
    for (const auto& [rel, bytes] : files)
        out += csv_row(std::vector<std::string>{rel, to_hex16(fnv1a64(bytes))});
    return out;
}

inline void write_manifest(const std::vector<RenderedFile>& files,
                           const std::filesystem::path& out_dir) {
    write_files({{"manifest.csv", render_manifest(files)}}, out_dir);
}

} // namespace cryochain
