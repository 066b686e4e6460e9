// Small text formatting helpers shared by reports and the CLI.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace idscap {

/// Shortest round-trippable 12-significant-digit rendering; all CSV output
/// goes through this so files are byte-stable across runs and thread counts.
inline std::string fmt_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_fixed9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

/// FNV-1a 64-bit hash, used to stamp reports with a configuration hash.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

inline constexpr const char* kVersion = "idscap 0.1.0";

} // namespace idscap
