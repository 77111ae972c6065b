#pragma once

#include "skdv/grid.hpp"
#include "skdv/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skdv {

struct KernelNorms {
    double l2 = 0.0;    // |k|_{L2}
    double h1 = 0.0;    // (int k^2 + k'^2)^{1/2}
    double l1 = 0.0;    // int |k|
    double edge = 0.0;  // max |k| on the two boundary nodes
};

// Convolution kernel k of the noise W = k * (space-time white noise).
class Kernel {
public:
    enum class Shape { gaussian, sech, tabulated };

    // A exp(-x^2 / (2 l^2))
    static Kernel gaussian(double amplitude, double width);
    // A sech(x / w)
    static Kernel sech(double amplitude, double width);
    // Nodal values centred at x = 0 on their own grid.
    static Kernel tabulated(Field values);

    Shape shape() const noexcept { return shape_; }
    double amplitude() const noexcept { return amplitude_; }
    double width() const noexcept { return width_; }
    std::string describe() const;

    // Values on the grid; a tabulated kernel must already live on it.
    Field sample(const Grid& grid) const;
    KernelNorms norms(const Grid& grid) const;

private:
    Kernel() = default;
    Shape shape_ = Shape::gaussian;
    double amplitude_ = 1.0;
    double width_ = 1.0;
    Field table_;
};

// Correlation c(z) = int k(z + u) k(u) du of the periodized kernel.
double correlation(const Kernel& kernel, const Grid& grid, double z);
// c sampled at the grid nodes x_j, i.e. at lags x_j.
Field correlation_field(const Kernel& kernel, const Grid& grid);

// f(x) -> f(-x) on the node lattice.
Field reflect(const Field& f);
// Phi f = k * f
Field smoother(const Kernel& kernel, const Field& f);
// Phi* f = k~ * f with k~(x) = k(-x)
Field smoother_adjoint(const Kernel& kernel, const Field& f);
// sum_l (Phi e_l)^2 over the orthonormal nodal basis e_l.
Field parseval_density(const Kernel& kernel, const Grid& grid);

// Reproducible Wiener increments for one trajectory.
class NoiseState {
public:
    NoiseState(Kernel kernel, Grid grid, std::uint64_t seed, std::uint64_t path = 0);

    const Kernel& kernel() const noexcept { return kernel_; }
    const Grid& grid() const noexcept { return grid_; }
    std::uint64_t seed() const noexcept { return rng_.seed(); }
    std::uint64_t path() const noexcept { return rng_.path(); }
    double time() const noexcept { return t_; }
    // Number of fine white-noise blocks drawn so far.
    std::uint64_t block_index() const noexcept { return block_; }
    // c_L(0), the grid variance rate of the increment.
    double variance_rate() const noexcept { return c0_; }

    // Increment over dt, translated by shift (T_shift W), summing `substeps`
    // consecutive white-noise blocks so coarse and fine runs share a path.
    Field sample_increment(double dt, double shift = 0.0, unsigned substeps = 1);
    void sample_increment(double dt, double shift, unsigned substeps, double* out);

    // Skip ahead without drawing, e.g. after a restart.
    void advance(double dt, unsigned substeps = 1);

private:
    Kernel kernel_;
    Grid grid_;
    CounterRng rng_;
    std::vector<cplx> khat_;  // dx (-1)^j k_hat
    double c0_ = 0.0;
    double t_ = 0.0;
    std::uint64_t block_ = 0;
    std::vector<double> xi_, acc_;
    std::vector<cplx> spec_;
};

}  // namespace skdv
