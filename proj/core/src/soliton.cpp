#include "skdv/soliton.hpp"
#include "skdv/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace skdv {

namespace {

void require_speed(double c) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("soliton speed must be positive, got " + std::to_string(c));
}

struct Shape {
    double s, sech2, tanh;
};

Shape shape(double c, double x) {
    const double s = 0.5 * std::sqrt(c) * x;
    const double ch = std::cosh(s);
    return {s, 1.0 / (ch * ch), std::tanh(s)};
}

Field sampled(double c, const Grid& grid, double (*f)(double, double)) {
    require_speed(c);
    Field out(grid);
    const auto& x = grid.nodes();
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = f(c, x[j]);
    return out;
}

}  // namespace

namespace profile {

double phi(double c, double x) { return 3.0 * c * shape(c, x).sech2; }

double phi_x(double c, double x) {
    const auto sh = shape(c, x);
    return -3.0 * c * std::sqrt(c) * sh.sech2 * sh.tanh;
}

double phi_xx(double c, double x) {
    const double S = shape(c, x).sech2;
    return c * c * (3.0 * S - 4.5 * S * S);
}

double phi_xxx(double c, double x) { return (c - phi(c, x)) * phi_x(c, x); }

// With S(s) = sech^2 s and s = sqrt(c) x / 2: d/dc = (s / 2c) d/ds.
double phi_c(double c, double x) {
    const auto sh = shape(c, x);
    return 3.0 * sh.sech2 - 3.0 * sh.s * sh.sech2 * sh.tanh;
}

double phi_cc(double c, double x) {
    const auto sh = shape(c, x);
    const double dS = -2.0 * sh.sech2 * sh.tanh;
    const double d2S = sh.sech2 * (6.0 * sh.tanh * sh.tanh - 2.0);
    return sh.s / (2.0 * c) * (4.5 * dS + 1.5 * sh.s * d2S);
}

}  // namespace profile

Field soliton(double c, const Grid& grid) { return sampled(c, grid, profile::phi); }
Field soliton_dx(double c, const Grid& grid) { return sampled(c, grid, profile::phi_x); }
Field soliton_dxx(double c, const Grid& grid) { return sampled(c, grid, profile::phi_xx); }
Field soliton_dxxx(double c, const Grid& grid) { return sampled(c, grid, profile::phi_xxx); }
Field soliton_dc(double c, const Grid& grid) { return sampled(c, grid, profile::phi_c); }
Field soliton_dcc(double c, const Grid& grid) { return sampled(c, grid, profile::phi_cc); }

Field soliton_at(const SolitonParams& p, const Grid& grid) {
    require_speed(p.c);
    const double L = grid.length();
    Field out(grid);
    const auto& x = grid.nodes();
    for (std::size_t j = 0; j < x.size(); ++j) {
        // nearest periodic image of x - x0
        double r = std::remainder(x[j] - p.x0, L);
        out[j] = profile::phi(p.c, r);
    }
    return out;
}

double soliton_residual(const Field& u, double c) {
    Field r = derivative(u, 2);
    r.axpy(-c, u);
    r.axpy(0.5, u * u);
    return norm_l2(r);
}

double soliton_residual(double c, const Grid& grid) { return soliton_residual(soliton(c, grid), c); }

double mass(const Field& u) { return 0.5 * inner(u, u); }

double energy(const Field& u) {
    const Field ux = derivative(u, 1);
    double cubic = 0.0;
    for (double v : u.values()) cubic += v * v * v;
    return 0.5 * inner(ux, ux) - cubic * u.grid().dx() / 6.0;
}

double lyapunov(const Field& u, double c0) { return energy(u) + c0 * mass(u); }

LinearizedOperator::LinearizedOperator(double c0, const Grid& grid)
    : c0_(c0), grid_(grid), phi_(soliton(c0, grid)) {}

Field LinearizedOperator::apply(const Field& v) const {
    require_same_grid(v, phi_);
    Field out = derivative(v, 2);
    out *= -1.0;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += (c0_ - phi_[j]) * v[j];
    return out;
}

Field apply_L(const LinearizedOperator& op, const Field& v) { return op.apply(v); }

Eigen::MatrixXd derivative_matrix(const Grid& grid, int order) {
    const std::size_t n = grid.size();
    Eigen::MatrixXd D(n, n);
    Field e(grid);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Field col = derivative(e, order);
        for (std::size_t i = 0; i < n; ++i) D(i, j) = col[i];
        e[j] = 0.0;
    }
    return D;
}

Eigen::MatrixXd second_derivative_matrix(const Grid& grid) {
    const Eigen::MatrixXd D = derivative_matrix(grid, 2);
    return 0.5 * (D + D.transpose());
}

Eigen::MatrixXd LinearizedOperator::matrix() const {
    Eigen::MatrixXd M = -second_derivative_matrix(grid_);
    for (std::size_t j = 0; j < phi_.size(); ++j) M(j, j) += c0_ - phi_[j];
    return M;
}

std::vector<double> linearized_spectrum(double c0, const Grid& grid) {
    const LinearizedOperator op(c0, grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix(), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double coercivity_nu(double c0, const Grid& grid) {
    const LinearizedOperator op(c0, grid);
    const std::size_t n = grid.size();
    const Eigen::MatrixXd D2 = second_derivative_matrix(grid);
    const Eigen::MatrixXd Lm = op.matrix();
    const Eigen::MatrixXd H1 = Eigen::MatrixXd::Identity(n, n) - D2;

    const Field phi = soliton(c0, grid);
    const Field phix = soliton_dx(c0, grid);
    Eigen::MatrixXd span(n, 2);
    for (std::size_t j = 0; j < n; ++j) {
        span(j, 0) = phi[j];
        span(j, 1) = phix[j];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
    const Eigen::MatrixXd Qfull = qr.householderQ();
    const Eigen::MatrixXd V = Qfull.rightCols(n - 2);

    const Eigen::MatrixXd A = V.transpose() * Lm * V;
    const Eigen::MatrixXd B = V.transpose() * H1 * V;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (A + A.transpose()),
                                                                  0.5 * (B + B.transpose()),
                                                                  Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw NumericalFailure("coercivity eigensolve failed");
    const double nu = ges.eigenvalues().minCoeff();
    if (!(nu > 0.0))
        throw NumericalFailure("projected linearized form is not positive definite (nu = " + std::to_string(nu) +
                               "); refine the grid");
    return nu;
}

}  // namespace skdv
