#pragma once

// Minimal static SVG rendering of report tables. Plots are strictly derived
// from the CSV data (tables), never the other way around; the data path
// does not depend on this header.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "csv.hpp"
#include "report.hpp"

namespace cryochain {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
}

struct AxisMap {
    double lo = 0.0, hi = 1.0, px0 = 0.0, px1 = 1.0;
    double operator()(double v) const {
        if (hi == lo) return 0.5 * (px0 + px1);
        return px0 + (v - lo) / (hi - lo) * (px1 - px0);
    }
};

inline void data_range(const Table& t, std::size_t col, double& lo, double& hi) {
    lo = 0.0;
    hi = 1.0;
    bool first = true;
    for (const auto& row : t.rows) {
        const double v = row[col];
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    }
}

} // namespace detail

// Render a table to a simple SVG chart according to its plot hint.
// Returns an empty string for tables with no plot hint or no data.
inline std::string render_table_svg(const Table& t) {
    if (t.plot == PlotKind::none || t.rows.empty() || t.columns.size() < 2) return {};

    const double width = 720.0, height = 420.0;
    const double ml = 70.0, mr = 20.0, mt = 30.0, mb = 50.0;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
         "\" height=\"" + detail::svg_num(height) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + detail::svg_num(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         t.name + "</text>\n";

    double xlo, xhi, ylo, yhi;
    detail::data_range(t, 0, xlo, xhi);

    if (t.plot == PlotKind::heatmap && t.columns.size() >= 3) {
        detail::data_range(t, 1, ylo, yhi);
        double vlo, vhi;
        detail::data_range(t, 2, vlo, vhi);
        std::vector<double> xs, ys;
        for (const auto& r : t.rows) {
            xs.push_back(r[0]);
            ys.push_back(r[1]);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::sort(ys.begin(), ys.end());
        ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
        const double cw = (width - ml - mr) / static_cast<double>(xs.size());
        const double ch = (height - mt - mb) / static_cast<double>(ys.size());
        for (const auto& r : t.rows) {
            const auto ix = static_cast<double>(
                std::lower_bound(xs.begin(), xs.end(), r[0]) - xs.begin());
            const auto iy = static_cast<double>(
                std::lower_bound(ys.begin(), ys.end(), r[1]) - ys.begin());
            const double f = vhi > vlo ? (r[2] - vlo) / (vhi - vlo) : 0.0;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - f)));
            s += "<rect x=\"" + detail::svg_num(ml + ix * cw) + "\" y=\"" +
                 detail::svg_num(height - mb - (iy + 1.0) * ch) + "\" width=\"" +
                 detail::svg_num(cw + 0.5) + "\" height=\"" + detail::svg_num(ch + 0.5) +
                 "\" fill=\"rgb(" + std::to_string(shade) + "," + std::to_string(shade) +
                 ",255)\"/>\n";
        }
    } else if (t.plot == PlotKind::histogram) {
        detail::data_range(t, 1, ylo, yhi);
        ylo = std::min(ylo, 0.0);
        const detail::AxisMap mx{xlo, xhi, ml, width - mr};
        const detail::AxisMap my{ylo, yhi, height - mb, mt};
        const double bw = (width - ml - mr) / static_cast<double>(t.rows.size());
        for (const auto& r : t.rows) {
            const double y = my(r[1]);
            s += "<rect x=\"" + detail::svg_num(mx(r[0]) - bw * 0.45) + "\" y=\"" +
                 detail::svg_num(std::min(y, my(0.0))) + "\" width=\"" +
                 detail::svg_num(bw * 0.9) + "\" height=\"" +
                 detail::svg_num(std::abs(my(0.0) - y)) + "\" fill=\"steelblue\"/>\n";
        }
    } else {  // trace / digital: first column is x, the rest are series
        static const char* colors[] = {"steelblue", "crimson", "seagreen", "darkorange"};
        double lo = 0.0, hi = 1.0;
        bool first = true;
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
            double a, b;
            detail::data_range(t, c, a, b);
            lo = first ? a : std::min(lo, a);
            hi = first ? b : std::max(hi, b);
            first = false;
        }
        const detail::AxisMap mx{xlo, xhi, ml, width - mr};
        const detail::AxisMap my{lo, hi, height - mb, mt};
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
            std::string pts;
            for (const auto& r : t.rows)
                pts += detail::svg_num(mx(r[0])) + "," + detail::svg_num(my(r[c])) + " ";
            s += "<polyline fill=\"none\" stroke=\"";
            s += colors[(c - 1) % 4];
            s += "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
        }
    }

    // Axes.
    s += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(height - mb) +
         "\" x2=\"" + detail::svg_num(width - mr) + "\" y2=\"" + detail::svg_num(height - mb) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
         detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(height - mb) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + detail::svg_num(width / 2) + "\" y=\"" + detail::svg_num(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + t.columns[0] +
         "</text>\n";
    s += "</svg>\n";
    return s;
}

// SVG companions for every plottable table in a report.
inline std::vector<RenderedFile> render_report_svgs(const ExperimentReport& r) {
    std::vector<RenderedFile> files;
    for (const auto& t : r.tables) {
        std::string svg = render_table_svg(t);
        if (!svg.empty()) files.emplace_back(r.name + "/" + t.name + ".svg", std::move(svg));
    }
    return files;
}

} // namespace cryochain
