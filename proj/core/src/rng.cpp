#include "skdv/rng.hpp"

#include <cmath>
#include <numbers>

namespace skdv {

std::mt19937_64 CounterRng::engine(std::uint64_t step) const {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed_), hi(seed_), lo(path_), hi(path_), lo(step), hi(step)};
    return std::mt19937_64(seq);
}

void CounterRng::normals(std::uint64_t step, std::span<double> out) const {
    auto gen = engine(step);
    // Box-Muller on 53-bit uniforms in (0, 1]; explicit so the output does not
    // depend on the standard library's normal_distribution.
    constexpr double scale = 1.0 / 9007199254740992.0;
    std::size_t j = 0;
    while (j < out.size()) {
        const double u1 = (static_cast<double>(gen() >> 11) + 1.0) * scale;
        const double u2 = static_cast<double>(gen() >> 11) * scale;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        out[j++] = r * std::cos(a);
        if (j < out.size()) out[j++] = r * std::sin(a);
    }
}

}  // namespace skdv
