#include "treefuse/digest.hpp"

#include <cstdio>

#include "treefuse/bandit.hpp"

namespace treefuse {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf);
}

std::string posterior_digest(const PosteriorTable& table) {
    std::string blob;
    blob.reserve(table.size() * 48);
    char line[128];
    for (std::size_t i = 0; i < table.size(); ++i) {
        const ArmPosterior& a = table.arm(static_cast<DomainId>(i));
        std::snprintf(line, sizeof line, "%zu|%.17g|%.17g|%d|%lld|%lld|", i, a.alpha,
                      a.beta, a.deactivated ? 1 : 0,
                      static_cast<long long>(a.history_successes),
                      static_cast<long long>(a.history_count));
        blob += line;
        for (std::uint8_t r : a.window) blob.push_back(r ? '1' : '0');
        blob.push_back('\n');
    }
    return fnv1a64_hex(blob);
}

}  // namespace treefuse
