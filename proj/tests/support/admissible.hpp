#pragma once

#include "skdv/modulation.hpp"
#include "skdv/soliton.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

struct Admissible {
    double c = 1.0;
    double x = 0.0;
    double eps = 0.0;
    skdv::Field eta;  // orthogonal to phi_{c0}, phi_{c0}'
    skdv::Field u;    // phi_c(. - x) + eps eta(. - x)
};

// Smooth localized eta with (eta, phi0) = (eta, phi0') = 0.
inline skdv::Field random_orthogonal(const skdv::Grid& g, double c0, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> nb(1, 5);
    skdv::Field eta(g);
    const int bumps = nb(rng);
    for (int i = 0; i < bumps; ++i) {
        const double amp = u(rng), x0 = 8.0 * u(rng), w = 1.0 + 1.5 * (u(rng) + 1.0), k = 2.0 * u(rng);
        eta += skdv::Field::sample(g, [=](double x) {
            const double s = (x - x0) / w;
            return amp * std::exp(-s * s) * std::cos(k * x);
        });
    }
    const skdv::Field p = skdv::soliton(c0, g), dp = skdv::soliton_dx(c0, g);
    Eigen::Matrix2d G;
    G << skdv::inner(p, p), skdv::inner(p, dp), skdv::inner(dp, p), skdv::inner(dp, dp);
    const Eigen::Vector2d r(skdv::inner(eta, p), skdv::inner(eta, dp));
    const Eigen::Vector2d a = G.ldlt().solve(r);
    eta.axpy(-a(0), p);
    eta.axpy(-a(1), dp);
    return eta;
}

// c within the tube, |eps eta|_{H1} a random fraction of alpha.
inline Admissible random_admissible(const skdv::Grid& g, double c0, double alpha, double eps, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Admissible a;
    a.eps = eps;
    a.c = c0 + alpha * 0.9 * (2.0 * u01(rng) - 1.0);
    a.x = 10.0 * (2.0 * u01(rng) - 1.0);
    a.eta = random_orthogonal(g, c0, rng);
    const double target = alpha * 0.9 * u01(rng);
    a.eta *= target / (eps * skdv::norm_h1(a.eta));
    a.u = skdv::translate(skdv::soliton(a.c, g) + eps * a.eta, -a.x);
    return a;
}

}  // namespace testsupport
