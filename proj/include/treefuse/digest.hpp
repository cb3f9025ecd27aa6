#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace treefuse {

// FNV-1a 64-bit; plenty for corruption detection on checkpoints and for
// before/after comparisons of posterior state.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

inline std::string fnv1a64_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

class PosteriorTable;

// Canonical digest of all arm posteriors (alpha/beta/flags/history/window).
std::string posterior_digest(const PosteriorTable& table);

}  // namespace treefuse
