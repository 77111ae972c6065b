#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace skdv {

// Random stream addressed by (seed, path, step): any block can be regenerated
// without replaying earlier ones, so ensembles do not depend on scheduling.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t path() const noexcept { return path_; }

    std::mt19937_64 engine(std::uint64_t step) const;
    // Fills out with i.i.d. standard normals for the given step.
    void normals(std::uint64_t step, std::span<double> out) const;

private:
    std::uint64_t seed_;
    std::uint64_t path_;
};

}  // namespace skdv
