#pragma once

#include "skdv/grid.hpp"
#include "skdv/noise.hpp"
#include "skdv/weighted_frame.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace skdv {

// Rates of the order-one system dX = c0 dt + eps B1 dt + eps dB2, dC = eps dB1.
struct SigmaModel {
    double sigma11 = 0.0;
    double sigma12 = 0.0;
    double sigma22 = 0.0;
    double c0 = 1.0;
    // integrals the rates were built from
    double phi_dcphi = 0.0;     // (phi, d_c phi)
    double dphi_sq = 0.0;       // |phi'|^2
    double theta1 = 0.0;
    double theta2 = 0.0;
    double w1w2_rate = 0.0;     // cov rate of (W1, W2), zero analytically
    std::string kernel;
    std::string frame;

    double det() const { return sigma11 * sigma22 - sigma12 * sigma12; }
};

SigmaModel sigma_model(const Kernel& kernel, double c0, const WeightedFrame& frame);
// Same rates from a dual basis on a periodic grid.
SigmaModel sigma_model(const Kernel& kernel, double c0, const Grid& grid, const DualBasis& dual);

// Covariance of (C - c0, X - c0 t), ordered (c, y).
struct Cov2 {
    Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
    double t = 0.0;
    double eps = 0.0;
};

Cov2 covariance_of_t(const SigmaModel& model, double eps, double t);

struct OrderOneEnsemble {
    std::vector<double> t;
    Eigen::MatrixXd dc;  // C - c0, one row per path
    Eigen::MatrixXd dy;  // X - c0 t
};

// Exact Gaussian recursion: (dB1, dB2, int dB1) drawn jointly per step.
OrderOneEnsemble sample_order_one(const SigmaModel& model, double eps, double T, double dt, int n_paths,
                                  std::uint64_t seed = 1, int threads = 1);

enum class PeakMethod { quadrature, montecarlo };

struct PeakOptions {
    int hermite_order = 96;     // in c
    int legendre_nodes = 8;     // per panel in y
    int mc_samples = 200000;
    int mc_lattice = 801;
    std::uint64_t seed = 7;
};

struct PeakResult {
    double value = 0.0;
    double position = 0.0;       // argmax of x - c0 t
    double clipped_mass = 0.0;   // P(c + c0 <= 0)
    double std_error = 0.0;      // Monte Carlo only
    bool warning = false;        // clipped mass above 10%
};

// max_x E[phi_{C}(x - X)] under the Gaussian law of covariance_of_t.
PeakResult peak_expectation(const SigmaModel& model, double eps, double t, PeakMethod method = PeakMethod::quadrature,
                            const PeakOptions& opts = {});
// E[phi_{C}(s - (X - c0 t))] at a fixed offset s.
double expected_profile(const SigmaModel& model, double eps, double t, double s, const PeakOptions& opts = {});

struct ExponentFit {
    double slope = 0.0;        // d log peak / d log t
    double intercept = 0.0;
    double r2 = 0.0;
    double eps_scaling = 0.0;  // d log peak / d log eps at t_ref
    double t_ref = 0.0;
    double K0 = 0.0;           // max_t peak eps^{1/2} t^{5/4}
    bool normalized_nonincreasing = false;
    bool poor_fit = false;     // r2 < 0.95
    std::vector<double> t;
    std::vector<double> peak;
    std::vector<double> normalized;  // peak eps^{1/2} t^{5/4}
    std::vector<double> clipped;
};

ExponentFit exponent_fit(const SigmaModel& model, double eps, const std::vector<double>& t_grid,
                         const PeakOptions& opts = {});

// Checks exp(-q(c,y)/2) <= exp(-eps^2 (s11 t^3/12 + (s22 - s12^2/s11) t) c^2 / (2 det S))
// on an n x n lattice of +-span standard deviations; returns max(lhs - rhs), <= 0 when it holds.
double tail_bound_violation(const SigmaModel& model, double eps, double t, int n = 101, double span = 6.0);

// int_0^inf sqrt(c) exp(-c^2 / (2 alpha^2)) dc by quadrature.
double sqrt_gauss_integral(double alpha);

// Nodes and weights of n-point rules (Golub-Welsch).
struct QuadratureRule {
    std::vector<double> x, w;
};
// weight exp(-x^2/2)/sqrt(2 pi), i.e. expectations of a standard normal
QuadratureRule gauss_hermite(int n);
// on [-1, 1]
QuadratureRule gauss_legendre(int n);

std::vector<double> log_spaced(double a, double b, int n);

}  // namespace skdv
