#pragma once

// 1D and 2D histograms with fixed uniform bin grids, plus the valley
// detection used to split a projected delay histogram into photon-number
// classes.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cryochain {

struct Histogram1D {
    std::vector<double> edges;   // n_bins + 1, strictly increasing
    std::vector<long> counts;    // n_bins
    long out_of_range = 0;

    static Histogram1D uniform(double lo, double hi, std::size_t n_bins) {
        if (!(hi > lo) || n_bins == 0)
            throw std::invalid_argument("Histogram1D: bad bin grid");
        Histogram1D h;
        h.edges.resize(n_bins + 1);
        for (std::size_t i = 0; i <= n_bins; ++i)
            h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
        h.counts.assign(n_bins, 0);
        return h;
    }

    void fill(double x) {
        if (x < edges.front() || x >= edges.back()) {
            ++out_of_range;
            return;
        }
        const double w = (edges.back() - edges.front()) / static_cast<double>(counts.size());
        auto i = static_cast<std::size_t>((x - edges.front()) / w);
        if (i >= counts.size()) i = counts.size() - 1;
        ++counts[i];
    }

    long total() const {
        long t = 0;
        for (long c : counts) t += c;
        return t;
    }
    double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
};

struct Histogram2D {
    std::vector<double> x_edges, y_edges;
    std::vector<long> counts;  // row-major: counts[iy * nx + ix]
    long out_of_range = 0;

    static Histogram2D uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi,
                               std::size_t ny) {
        if (!(x_hi > x_lo) || !(y_hi > y_lo) || nx == 0 || ny == 0)
            throw std::invalid_argument("Histogram2D: bad bin grid");
        Histogram2D h;
        h.x_edges.resize(nx + 1);
        h.y_edges.resize(ny + 1);
        for (std::size_t i = 0; i <= nx; ++i)
            h.x_edges[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx);
        for (std::size_t i = 0; i <= ny; ++i)
            h.y_edges[i] = y_lo + (y_hi - y_lo) * static_cast<double>(i) / static_cast<double>(ny);
        h.counts.assign(nx * ny, 0);
        return h;
    }

    std::size_t nx() const { return x_edges.size() - 1; }
    std::size_t ny() const { return y_edges.size() - 1; }

    void fill(double x, double y) {
        if (x < x_edges.front() || x >= x_edges.back() || y < y_edges.front() ||
            y >= y_edges.back()) {
            ++out_of_range;
            return;
        }
        const double wx = (x_edges.back() - x_edges.front()) / static_cast<double>(nx());
        const double wy = (y_edges.back() - y_edges.front()) / static_cast<double>(ny());
        auto ix = static_cast<std::size_t>((x - x_edges.front()) / wx);
        auto iy = static_cast<std::size_t>((y - y_edges.front()) / wy);
        if (ix >= nx()) ix = nx() - 1;
        if (iy >= ny()) iy = ny() - 1;
        ++counts[iy * nx() + ix];
    }

    long total() const {
        long t = 0;
        for (long c : counts) t += c;
        return t;
    }
};

// Valley detection on a (smoothed) count profile: peaks are local maxima
// above peak_fraction of the global maximum with at least min_separation
// bins between them; a valley is the minimum between consecutive peaks.
// Returns valley bin indices in ascending order.
inline std::vector<std::size_t> find_valleys(const std::vector<long>& counts,
                                             std::size_t smooth_halfwidth = 2,
                                             double peak_fraction = 0.05,
                                             std::size_t min_separation = 3) {
    const std::size_t n = counts.size();
    if (n < 3) return {};

    std::vector<double> smooth(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        std::size_t cnt = 0;
        const std::size_t lo = i >= smooth_halfwidth ? i - smooth_halfwidth : 0;
        const std::size_t hi = std::min(n - 1, i + smooth_halfwidth);
        for (std::size_t j = lo; j <= hi; ++j, ++cnt) acc += static_cast<double>(counts[j]);
        smooth[i] = acc / static_cast<double>(cnt);
    }

    double global_max = 0.0;
    for (double v : smooth) global_max = std::max(global_max, v);
    if (global_max <= 0.0) return {};
    const double floor = peak_fraction * global_max;

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (smooth[i] < floor) continue;
        if (smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1]) {
            if (!peaks.empty() && i - peaks.back() < min_separation) {
                if (smooth[i] > smooth[peaks.back()]) peaks.back() = i;  // keep the taller
                continue;
            }
            peaks.push_back(i);
        }
    }

    std::vector<std::size_t> valleys;
    for (std::size_t p = 1; p < peaks.size(); ++p) {
        std::size_t arg = peaks[p - 1];
        for (std::size_t i = peaks[p - 1]; i <= peaks[p]; ++i)
            if (smooth[i] < smooth[arg]) arg = i;
        valleys.push_back(arg);
    }
    return valleys;
}

} // namespace cryochain
