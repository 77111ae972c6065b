#pragma once

// Independent reference values by quadrature on the real line.
// Nothing here calls into skdv; the soliton speed derivative is a centred
// finite difference in c rather than the library's closed form.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>

namespace oracle {

inline double phi(double c, double x) {
    double s = 1.0 / std::cosh(std::sqrt(c) * x / 2.0);
    return 3.0 * c * s * s;
}

inline double phi_x(double c, double x, double h = 1e-4) {
    return (phi(c, x - 2 * h) - 8 * phi(c, x - h) + 8 * phi(c, x + h) - phi(c, x + 2 * h)) / (12 * h);
}

inline double phi_c(double c, double x, double h = 1e-4) {
    return (phi(c - 2 * h, x) - 8 * phi(c - h, x) + 8 * phi(c + h, x) - phi(c + 2 * h, x)) / (12 * h);
}

// int_{-R}^{R} f, split at the origin, adaptive Gauss-Kronrod.
inline double line(const std::function<double(double)>& f, double R = 60.0) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    return gauss_kronrod<double, 61>::integrate(f, -R, 0.0, 15, 1e-14, &err) +
           gauss_kronrod<double, 61>::integrate(f, 0.0, R, 15, 1e-14, &err);
}

inline double mass(double c) {
    return 0.5 * line([c](double x) { return phi(c, x) * phi(c, x); });
}

inline double energy(double c) {
    return line([c](double x) {
        double p = phi(c, x), px = phi_x(c, x);
        return 0.5 * px * px - p * p * p / 6.0;
    });
}

inline double dphi_sq(double c) {
    return line([c](double x) { return phi_x(c, x) * phi_x(c, x); });
}

inline double phi_dcphi(double c) {
    return line([c](double x) { return phi(c, x) * phi_c(c, x); });
}

inline double gauss_kernel(double A, double l, double x) { return A * std::exp(-x * x / (2 * l * l)); }

// c(z) = int k(z + u) k(u) du
inline double correlation(double A, double l, double z) {
    return line([=](double u) { return gauss_kernel(A, l, z + u) * gauss_kernel(A, l, u); }, 30.0 * l + std::abs(z));
}

// Composite 30-point Gauss-Legendre on [a, b].
inline double composite(const std::function<double(double)>& f, double a, double b, int panels) {
    using boost::math::quadrature::gauss;
    double h = (b - a) / panels, acc = 0.0;
    for (int p = 0; p < panels; ++p) acc += gauss<double, 30>::integrate(f, a + p * h, a + (p + 1) * h);
    return acc;
}

// (Phi* f)(x) = int k(y - x) f(y) dy for the gaussian kernel
inline double smooth(double A, double l, const std::function<double(double)>& f, double x) {
    auto g = [&](double y) { return gauss_kernel(A, l, y - x) * f(y); };
    return composite(g, x - 12.0 * l, x + 12.0 * l, 24);
}

// (Phi* f, Phi* g) by nested quadrature
inline double smoothed_inner(double A, double l, const std::function<double(double)>& f,
                             const std::function<double(double)>& g, double R = 40.0) {
    auto h = [&](double x) { return smooth(A, l, f, x) * smooth(A, l, g, x); };
    return composite(h, -R, R, 160);
}

// g~1 with theta1 = theta2 = theta; the primitive of d_c phi is the c-derivative
// (finite difference) of int_{-inf}^x phi_c = 6 sqrt(c) (1 + tanh(sqrt(c) x / 2))
inline double phi_primitive(double c, double x) { return 6.0 * std::sqrt(c) * (1.0 + std::tanh(std::sqrt(c) * x / 2.0)); }

inline double dual_g1(double c, double theta, double x, double h = 1e-4) {
    double prim = (phi_primitive(c - 2 * h, x) - 8 * phi_primitive(c - h, x) + 8 * phi_primitive(c + h, x) -
                   phi_primitive(c + 2 * h, x)) /
                  (12 * h);
    return -theta * prim + theta * phi(c, x);
}

// int_0^inf sqrt(u) exp(-u^2/2) du
inline double sqrt_gauss_constant() {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([](double u) { return std::sqrt(u) * std::exp(-u * u / 2.0); });
}

}  // namespace oracle
