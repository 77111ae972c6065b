#include "skdv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skdv {

namespace {
constexpr double kEdgeTolerance = 1e-10;
}

Kernel Kernel::gaussian(double amplitude, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian kernel width must be positive");
    Kernel k;
    k.shape_ = Shape::gaussian;
    k.amplitude_ = amplitude;
    k.width_ = width;
    return k;
}

Kernel Kernel::sech(double amplitude, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("sech kernel width must be positive");
    Kernel k;
    k.shape_ = Shape::sech;
    k.amplitude_ = amplitude;
    k.width_ = width;
    return k;
}

Kernel Kernel::tabulated(Field values) {
    if (values.empty() || !values.all_finite()) throw std::invalid_argument("tabulated kernel must be finite");
    Kernel k;
    k.shape_ = Shape::tabulated;
    k.table_ = std::move(values);
    return k;
}

std::string Kernel::describe() const {
    std::ostringstream os;
    switch (shape_) {
        case Shape::gaussian: os << "gaussian(A=" << amplitude_ << ", l=" << width_ << ")"; break;
        case Shape::sech: os << "sech(A=" << amplitude_ << ", w=" << width_ << ")"; break;
        case Shape::tabulated: os << "tabulated(N=" << table_.size() << ")"; break;
    }
    return os.str();
}

Field Kernel::sample(const Grid& grid) const {
    switch (shape_) {
        case Shape::gaussian: {
            const double a = amplitude_, l = width_;
            return Field::sample(grid, [a, l](double x) { return a * std::exp(-x * x / (2.0 * l * l)); });
        }
        case Shape::sech: {
            const double a = amplitude_, w = width_;
            return Field::sample(grid, [a, w](double x) { return a / std::cosh(x / w); });
        }
        case Shape::tabulated:
            if (table_.grid() != grid) throw std::invalid_argument("tabulated kernel lives on a different grid");
            return table_;
    }
    throw std::logic_error("unknown kernel shape");
}

KernelNorms Kernel::norms(const Grid& grid) const {
    const Field k = sample(grid);
    const Field kx = derivative(k, 1);
    KernelNorms n;
    n.l2 = norm_l2(k);
    n.h1 = std::sqrt(inner(k, k) + inner(kx, kx));
    double l1 = 0.0;
    for (double v : k.values()) l1 += std::abs(v);
    n.l1 = l1 * grid.dx();
    n.edge = std::max(std::abs(k[0]), std::abs(k[k.size() - 1]));
    return n;
}

Field reflect(const Field& f) {
    const std::size_t n = f.size();
    Field out(f.grid());
    for (std::size_t j = 0; j < n; ++j) out[j] = f[(n - j) % n];
    return out;
}

double correlation(const Kernel& kernel, const Grid& grid, double z) {
    const Field k = kernel.sample(grid);
    return inner(translate(k, z), k);
}

Field correlation_field(const Kernel& kernel, const Grid& grid) {
    const Field k = kernel.sample(grid);
    return convolve(k, reflect(k));
}

Field smoother(const Kernel& kernel, const Field& f) { return convolve(kernel.sample(f.grid()), f); }

Field smoother_adjoint(const Kernel& kernel, const Field& f) {
    return convolve(reflect(kernel.sample(f.grid())), f);
}

Field parseval_density(const Kernel& kernel, const Grid& grid) {
    const Field k = kernel.sample(grid);
    const std::size_t n = grid.size();
    const double scale = 1.0 / std::sqrt(grid.dx());
    Field density(grid);
    Field e(grid);
    for (std::size_t l = 0; l < n; ++l) {
        e[l] = scale;
        const Field img = convolve(k, e);
        for (std::size_t j = 0; j < n; ++j) density[j] += img[j] * img[j];
        e[l] = 0.0;
    }
    return density;
}

NoiseState::NoiseState(Kernel kernel, Grid grid, std::uint64_t seed, std::uint64_t path)
    : kernel_(std::move(kernel)), grid_(std::move(grid)), rng_(seed, path) {
    const Field k = kernel_.sample(grid_);
    const double edge = std::max(std::abs(k[0]), std::abs(k[k.size() - 1]));
    if (edge > kEdgeTolerance)
        throw std::invalid_argument("kernel " + kernel_.describe() + " does not decay at the box edge (|k| = " +
                                    std::to_string(edge) + ")");
    khat_ = spectrum(k);
    const double dx = grid_.dx();
    for (std::size_t j = 0; j < khat_.size(); ++j) khat_[j] *= (j % 2 == 0 ? dx : -dx);
    c0_ = inner(k, k);
    const std::size_t n = grid_.size();
    xi_.resize(n);
    acc_.resize(n);
    spec_.resize(grid_.modes());
}

Field NoiseState::sample_increment(double dt, double shift, unsigned substeps) {
    Field out(grid_);
    sample_increment(dt, shift, substeps, out.data());
    return out;
}

void NoiseState::sample_increment(double dt, double shift, unsigned substeps, double* out) {
    if (!(dt > 0.0)) throw std::invalid_argument("noise increment needs dt > 0");
    if (substeps == 0) throw std::invalid_argument("substeps must be positive");
    const std::size_t n = grid_.size();
    // Each block is white noise over dt/substeps with nodal variance (dt/substeps)/dx.
    const double sd = std::sqrt(dt / static_cast<double>(substeps) / grid_.dx());
    std::fill(acc_.begin(), acc_.end(), 0.0);
    for (unsigned s = 0; s < substeps; ++s) {
        rng_.normals(block_++, xi_);
        for (std::size_t j = 0; j < n; ++j) acc_[j] += xi_[j];
    }
    for (double& v : acc_) v *= sd;
    grid_.forward(acc_.data(), spec_.data());
    const auto& k = grid_.half_wavenumbers();
    const std::size_t nyq = spec_.size() - 1;
    if (shift == 0.0) {
        for (std::size_t j = 0; j < spec_.size(); ++j) spec_[j] *= khat_[j];
    } else {
        for (std::size_t j = 0; j < nyq; ++j) spec_[j] *= khat_[j] * std::polar(1.0, k[j] * shift);
        spec_[nyq] *= khat_[nyq] * std::cos(k[nyq] * shift);
    }
    grid_.inverse(spec_.data(), out);
    t_ += dt;
}

void NoiseState::advance(double dt, unsigned substeps) {
    block_ += substeps;
    t_ += dt;
}

}  // namespace skdv
