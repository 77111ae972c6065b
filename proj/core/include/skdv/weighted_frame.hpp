#pragma once

#include "skdv/grid.hpp"
#include "skdv/limit.hpp"
#include "skdv/noise.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace skdv {

enum class FrameStencil {
    fourier,  // dense spectral differentiation on the box
    fd4,      // 4th-order differences, Dirichlet closure
    fd6,      // 6th-order differences, Dirichlet closure
};

// A_a = e^{ax} d_x L e^{-ax} = -(D - a)^3 + (D - a)(c0 - phi) as a dense matrix,
// with f_i = e^{ax}(phi', d_c phi), g_i = e^{-ax} g~_i and P = sum f_i (g_i, .).
struct WeightedFrame {
    double a = 0.0;
    double c0 = 1.0;
    FrameStencil stencil = FrameStencil::fourier;
    Grid grid;
    Field f1, f2, g1, g2;
    DualBasis dual;
    double theta1 = 0.0;
    double theta2 = 0.0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd P;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd D1;
    Eigen::VectorXd weight;  // e^{ax} at the nodes

    double biorthogonality_error() const;
    double h1_norm(const Eigen::VectorXd& w) const;
    double h1_norm_sq(const Eigen::VectorXd& w) const;
};

WeightedFrame build_weighted_frame(double c0, double a, const Grid& grid, FrameStencil stencil = FrameStencil::fourier);

Eigen::VectorXd to_vector(const Field& f);
Field to_field(const Grid& grid, const Eigen::VectorXd& v);

// Eigenvalues of A_a sorted by decreasing real part.
Eigen::VectorXcd frame_spectrum(const WeightedFrame& frame);

struct DecayReport {
    double rate = 0.0;  // smallest fitted rate over the samples
    std::vector<double> rates;
    double commutation_error = 0.0;  // max |Q e^{AT} w - e^{AT} Q w| / |w|
    std::vector<double> times;
    std::vector<std::vector<double>> norms;  // |e^{At} Q w|_{H1} per sample
};

// Least-squares slope of log |e^{At} v|_{H1} on [T/2, T], returned as a decay rate.
double fit_decay_rate(const WeightedFrame& frame, const Eigen::VectorXd& v, double T, int steps = 64);

// Random smooth localized w, fitted on Q w. Throws NumericalFailure if some sample does not decay.
DecayReport semigroup_decay(const WeightedFrame& frame, std::size_t samples, double T, std::uint64_t seed = 1);

struct OuOptions {
    double T = 80.0;
    double dt = 0.25;
    std::size_t n_paths = 64;
    std::uint64_t seed = 1;
    double noise_scale = 1.0;
    std::optional<Eigen::VectorXd> initial;  // w2(0), projected by Q; zero by default
};

struct OuResult {
    std::vector<double> t;
    std::vector<double> path_h1;          // |w2|_{H1} along path 0
    std::vector<double> empirical_trace;  // ensemble mean of |w2|_{H1}^2
    std::vector<double> max_p_component;  // max over paths of |P w2|
    std::vector<double> exact_t;          // dt 2^j up to about T/16, then multiples of that
    std::vector<double> exact_trace;      // H1 trace of the exact discrete covariance
    double bound_norm = 0.0;              // |k|_{H1}^2 |e^{ax} phi|_{H1}^2
};

// w2_{n+1} = e^{A dt} w2_n + Q e^{ax} phi dW~ on the frame grid.
OuResult ou_evolve(const WeightedFrame& frame, const Kernel& kernel, const OuOptions& opts);

}  // namespace skdv
