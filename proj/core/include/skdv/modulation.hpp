#pragma once

#include "skdv/grid.hpp"
#include "skdv/noise.hpp"
#include "skdv/soliton.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

namespace skdv {

// u(. + x) = phi_c + eps * eta, with (eta, phi_{c0}) = (eta, phi_{c0}') = 0.
struct ModulationState {
    double c = 1.0;
    double x = 0.0;
    Field eta;  // the raw difference when eps == 0
    bool exited = false;
    bool newton_failed = false;
    double t = 0.0;
    int iterations = 0;
    double ortho_phi = 0.0;   // (eta, phi_{c0})
    double ortho_dphi = 0.0;  // (eta, phi_{c0}')
    double remainder_h1 = 0.0;  // |eps eta|_{H1}
};

struct ModCoefficients {
    double y = 0.0;
    double a = 0.0;
    // Representers in the coordinates of u: (z_rep, dW) is the martingale part of dx / eps.
    Field z_rep;
    Field b_rep;
    // The same fields in the soliton frame, z_hat = T_x z_rep.
    Field z_hat;
    Field b_hat;
    double phi_star_z = 0.0;  // |Phi* z|
    double phi_star_b = 0.0;  // |Phi* b|
    Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();
};

struct ModulationOptions {
    double c0 = 1.0;
    double alpha = 0.3;
    double eps = 0.0;
    double tol = 1e-10;
    int max_iter = 50;
};

class ModulationTracker {
public:
    ModulationTracker(const Grid& grid, const Kernel& kernel, ModulationOptions opts);

    const ModulationOptions& options() const noexcept { return opts_; }
    const Grid& grid() const noexcept { return grid_; }

    // Newton on the orthogonality conditions starting from guess.
    ModulationState decompose(const Field& u, const SolitonParams& guess, double t = 0.0) const;

    Eigen::Matrix2d jacobian_A(const ModulationState& s) const;
    void solve_martingale(const ModulationState& s, ModCoefficients& out) const;
    void solve_drift(const ModulationState& s, ModCoefficients& out) const;
    ModCoefficients coefficients(const ModulationState& s) const;

    // Limit drift y = |phi'|^-2 (eta, L phi'') for a given remainder.
    double limit_y(const Field& eta) const;

    const Field& phi0() const noexcept { return phi0_; }
    const Field& dphi0() const noexcept { return dphi0_; }
    // Convolution by the noise correlation c.
    Field apply_correlation(const Field& f) const;
    Field phi_star(const Field& f) const;

private:
    bool exit_test(double c, double remainder_h1) const;

    Grid grid_;
    Kernel kernel_;
    ModulationOptions opts_;
    Field phi0_, dphi0_, d2phi0_, d3phi0_, Ld2phi0_;
    double dphi0_sq_ = 0.0;
    std::vector<cplx> corr_hat_;  // dx (-1)^j c_hat
    std::vector<cplx> kref_hat_;  // dx (-1)^j k~_hat
};

ModulationState decompose(const Field& u, const SolitonParams& guess, double c0, double alpha, double eps,
                          const Kernel& kernel = Kernel::gaussian(1.0, 2.0));

// Sequential tracking with warm starts; exit is absorbing.
class TrajectoryTracker {
public:
    TrajectoryTracker(const ModulationTracker& tracker, SolitonParams start, double frame_speed = 0.0);

    // Returns false once the trajectory has left the tube.
    bool observe(const Field& u, double t);

    const std::vector<ModulationState>& series() const noexcept { return series_; }
    bool exited() const noexcept { return exited_; }
    double exit_time() const noexcept { return tau_; }
    const ModulationState& last() const { return series_.back(); }

private:
    const ModulationTracker& tracker_;
    SolitonParams guess_;
    double frame_speed_;
    double last_t_ = 0.0;
    bool started_ = false;
    bool exited_ = false;
    double tau_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<ModulationState> series_;
};

struct TrackResult {
    std::vector<ModulationState> series;
    double tau = std::numeric_limits<double>::quiet_NaN();
};

struct TimedField {
    double t;
    Field u;
};

TrackResult track(const std::vector<TimedField>& trajectory, const ModulationTracker& tracker,
                  double frame_speed = 0.0);

struct RefinedState {
    double t = 0.0;
    double x = 0.0;
    double x_refined = 0.0;
    Field eta_tilde;
};

// x~ = x - eps lambda, eta~ = (phi_c(. - eps lambda) - phi_c) / eps + eta(. - eps lambda).
std::vector<RefinedState> refine_center(const std::vector<ModulationState>& series,
                                        const std::vector<double>& lambda, double eps);

}  // namespace skdv
