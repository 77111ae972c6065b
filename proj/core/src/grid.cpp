#include "skdv/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace skdv {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct Grid::Impl {
    double length;
    std::size_t points;
    double dx;
    std::vector<double> nodes;
    std::vector<double> kappa;
    std::vector<double> half_kappa;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    Impl(double L, std::size_t N) : length(L), points(N), dx(L / static_cast<double>(N)) {
        nodes.resize(N);
        for (std::size_t j = 0; j < N; ++j) nodes[j] = -0.5 * L + static_cast<double>(j) * dx;
        const double base = 2.0 * std::numbers::pi / L;
        kappa.resize(N);
        for (std::size_t j = 0; j < N; ++j) {
            const auto m = static_cast<long>(j);
            const long shifted = j < N / 2 ? m : m - static_cast<long>(N);
            kappa[j] = base * static_cast<double>(shifted);
        }
        half_kappa.resize(N / 2 + 1);
        for (std::size_t j = 0; j <= N / 2; ++j) half_kappa[j] = base * static_cast<double>(j);

        std::vector<double> rbuf(N);
        auto* cbuf = fftw_alloc_complex(N / 2 + 1);
        std::lock_guard lock(planner_mutex());
        const int n = static_cast<int>(N);
        r2c = fftw_plan_dft_r2c_1d(n, rbuf.data(), cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
        c2r = fftw_plan_dft_c2r_1d(n, cbuf, rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(cbuf);
        if (!r2c || !c2r) throw std::runtime_error("fftw planning failed");
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
    }

    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;
};

Grid::Grid(double length, std::size_t points) {
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("grid length must be positive, got " + std::to_string(length));
    if (points < 8 || points % 2 != 0)
        throw std::invalid_argument("grid size must be even and at least 8, got " + std::to_string(points));
    impl_ = std::make_shared<const Impl>(length, points);
}

Grid make_grid(double length, std::size_t points) { return Grid(length, points); }

const Grid::Impl& Grid::impl() const {
    if (!impl_) throw std::logic_error("use of an empty grid");
    return *impl_;
}

double Grid::length() const { return impl().length; }
std::size_t Grid::size() const { return impl_ ? impl_->points : 0; }
double Grid::dx() const { return impl().dx; }
std::size_t Grid::modes() const { return impl().points / 2 + 1; }
double Grid::node(std::size_t j) const { return impl().nodes.at(j); }
const std::vector<double>& Grid::nodes() const { return impl().nodes; }
const std::vector<double>& Grid::wavenumbers() const { return impl().kappa; }
const std::vector<double>& Grid::half_wavenumbers() const { return impl().half_kappa; }
double Grid::dealias_cutoff() const { return (2.0 / 3.0) * impl().half_kappa.back(); }

void Grid::forward(const double* in, cplx* out) const {
    const auto& g = impl();
    fftw_execute_dft_r2c(g.r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void Grid::inverse(cplx* in, double* out) const {
    const auto& g = impl();
    fftw_execute_dft_c2r(g.c2r, reinterpret_cast<fftw_complex*>(in), out);
    const double s = 1.0 / static_cast<double>(g.points);
    for (std::size_t j = 0; j < g.points; ++j) out[j] *= s;
}

bool Grid::operator==(const Grid& other) const {
    if (impl_ == other.impl_) return true;
    if (!impl_ || !other.impl_) return false;
    return impl_->points == other.impl_->points && impl_->length == other.impl_->length;
}

// ---------------------------------------------------------------- Field

Field::Field(Grid grid, double value) : grid_(std::move(grid)), values_(grid_.size(), value) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field has " + std::to_string(values_.size()) + " values, grid has " +
                                    std::to_string(grid_.size()));
}

Field Field::sample(const Grid& grid, const std::function<double(double)>& f) {
    Field out(grid);
    const auto& x = grid.nodes();
    for (std::size_t j = 0; j < x.size(); ++j) out.values_[j] = f(x[j]);
    return out;
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void require_same_grid(const Field& a, const Field& b) {
    if (a.grid() != b.grid()) throw std::invalid_argument("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
    return *this;
}

Field& Field::operator*=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] *= o.values_[j];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Field& Field::axpy(double s, const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += s * o.values_[j];
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }
Field operator-(Field a) { return a *= -1.0; }

// ---------------------------------------------------------------- calculus

std::vector<cplx> spectrum(const Field& f) {
    std::vector<cplx> out(f.grid().modes());
    f.grid().forward(f.data(), out.data());
    return out;
}

Field from_spectrum(const Grid& grid, std::vector<cplx> coeffs) {
    if (coeffs.size() != grid.modes()) throw std::invalid_argument("spectrum size mismatch");
    Field out(grid);
    grid.inverse(coeffs.data(), out.data());
    return out;
}

Field apply_symbol(const Field& f, const std::function<cplx(double)>& symbol) {
    auto fh = spectrum(f);
    const auto& k = f.grid().half_wavenumbers();
    for (std::size_t j = 0; j < fh.size(); ++j) fh[j] *= symbol(k[j]);
    return from_spectrum(f.grid(), std::move(fh));
}

Field derivative(const Field& f, int order) {
    if (order < 0) throw std::invalid_argument("derivative order must be non-negative");
    if (order == 0) return f;
    auto fh = spectrum(f);
    const auto& k = f.grid().half_wavenumbers();
    const std::size_t nyq = fh.size() - 1;
    for (std::size_t j = 0; j < fh.size(); ++j) {
        cplx m = 1.0;
        for (int p = 0; p < order; ++p) m *= cplx(0.0, k[j]);
        fh[j] *= m;
    }
    if (order % 2 == 1) fh[nyq] = 0.0;
    return from_spectrum(f.grid(), std::move(fh));
}

Field translate(const Field& f, double y) {
    auto fh = spectrum(f);
    const auto& k = f.grid().half_wavenumbers();
    const std::size_t nyq = fh.size() - 1;
    for (std::size_t j = 0; j < nyq; ++j) fh[j] *= std::polar(1.0, k[j] * y);
    fh[nyq] *= std::cos(k[nyq] * y);
    return from_spectrum(f.grid(), std::move(fh));
}

Field antiderivative(const Field& f) {
    const Grid& g = f.grid();
    auto fh = spectrum(f);
    const auto& k = g.half_wavenumbers();
    const double mean = fh[0].real() / static_cast<double>(g.size());
    fh[0] = 0.0;
    fh.back() = 0.0;
    for (std::size_t j = 1; j + 1 < fh.size(); ++j) fh[j] /= cplx(0.0, k[j]);
    Field p = from_spectrum(g, std::move(fh));
    const double p0 = p[0];
    const double half = 0.5 * g.length();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = p[j] - p0 + mean * (g.node(j) + half);
    return p;
}

double inner(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    const double* a = f.data();
    const double* b = g.data();
    for (std::size_t j = 0; j < f.size(); ++j) s += a[j] * b[j];
    return s * f.grid().dx();
}

double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid().dx();
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

double norm_h1(const Field& f) {
    const Field fx = derivative(f, 1);
    return std::sqrt(inner(f, f) + inner(fx, fx));
}

double spectral_energy(const Field& f) {
    const auto fh = spectrum(f);
    const std::size_t n = f.size();
    double s = std::norm(fh[0]) + std::norm(fh.back());
    for (std::size_t j = 1; j + 1 < fh.size(); ++j) s += 2.0 * std::norm(fh[j]);
    return s * f.grid().dx() / static_cast<double>(n);
}

Field convolve(const Field& f, const Field& g) {
    require_same_grid(f, g);
    auto fh = spectrum(f);
    const auto gh = spectrum(g);
    const double dx = f.grid().dx();
    // The factor (-1)^j recentres the circular result on the node grid.
    for (std::size_t j = 0; j < fh.size(); ++j) fh[j] *= gh[j] * (j % 2 == 0 ? dx : -dx);
    return from_spectrum(f.grid(), std::move(fh));
}

}  // namespace skdv
