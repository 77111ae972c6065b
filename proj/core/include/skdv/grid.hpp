#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace skdv {

using cplx = std::complex<double>;

// Periodic grid on [-L/2, L/2) with real-to-complex transforms.
// Copies are cheap and share the transform plans.
class Grid {
public:
    Grid() = default;
    Grid(double length, std::size_t points);

    bool valid() const noexcept { return static_cast<bool>(impl_); }
    double length() const;
    std::size_t size() const;
    double dx() const;
    // Number of half-spectrum modes, N/2 + 1.
    std::size_t modes() const;

    double node(std::size_t j) const;
    const std::vector<double>& nodes() const;
    // Full wavenumber array in transform order (0, 1, ..., N/2-1, -N/2, ..., -1) * 2pi/L.
    const std::vector<double>& wavenumbers() const;
    // Non-negative wavenumbers matching the half spectrum.
    const std::vector<double>& half_wavenumbers() const;
    // Largest wavenumber kept by the 2/3 rule.
    double dealias_cutoff() const;

    // Unnormalized forward transform, out has modes() entries.
    void forward(const double* in, cplx* out) const;
    // Inverse transform scaled by 1/N. The input is overwritten.
    void inverse(cplx* in, double* out) const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    struct Impl;
    const Impl& impl() const;
    std::shared_ptr<const Impl> impl_;
};

Grid make_grid(double length, std::size_t points);

class Field {
public:
    Field() = default;
    explicit Field(Grid grid, double value = 0.0);
    Field(Grid grid, std::vector<double> values);

    static Field sample(const Grid& grid, const std::function<double(double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    std::vector<double>& storage() noexcept { return values_; }
    const std::vector<double>& storage() const noexcept { return values_; }

    double& operator[](std::size_t j) { return values_[j]; }
    double operator[](std::size_t j) const { return values_[j]; }

    bool all_finite() const;
    double max_abs() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    // Pointwise product.
    Field& operator*=(const Field& o);
    Field& operator*=(double s);
    // this += s * o
    Field& axpy(double s, const Field& o);

private:
    Grid grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);
Field operator-(Field a);

// Throws std::invalid_argument when the grids differ.
void require_same_grid(const Field& a, const Field& b);

std::vector<cplx> spectrum(const Field& f);
Field from_spectrum(const Grid& grid, std::vector<cplx> coeffs);

Field derivative(const Field& f, int order);
// (T_y f)(x) = f(x + y)
Field translate(const Field& f, double y);
// Multiply the half spectrum by symbol(kappa).
Field apply_symbol(const Field& f, const std::function<cplx(double)>& symbol);
// Antiderivative vanishing at the left edge; not periodic when the mean is nonzero.
Field antiderivative(const Field& f);

double inner(const Field& f, const Field& g);
double integral(const Field& f);
double norm_l2(const Field& f);
double norm_h1(const Field& f);
// dx/N sum of |f_hat|^2 over the full spectrum, equal to inner(f, f).
double spectral_energy(const Field& f);

// Approximates the line convolution (f * g)(x) = int f(x - y) g(y) dy.
Field convolve(const Field& f, const Field& g);

}  // namespace skdv
