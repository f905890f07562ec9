#pragma once

// CSV emission helpers. All floating-point output goes through format_double
// (%.17g: shortest round-trippable form is not required, stability is), so
// identical data produces byte-identical files on every run and platform.
// fnv1a64 is the checksum recorded in run manifests.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace cryochain {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

inline std::string csv_row(const std::vector<double>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += format_double(cells[i]);
    }
    line += '\n';
    return line;
}

// FNV-1a, 64-bit. Tiny, dependency-free, stable across platforms; used only
// as an integrity fingerprint, not for security.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string to_hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

} // namespace cryochain
