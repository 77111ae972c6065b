#pragma once

#include "skdv/grid.hpp"
#include "skdv/noise.hpp"

namespace skdv {

// g~1 = -theta1 int_{-inf}^x phi_c + theta2 phi, g~2 = theta1 phi, biorthogonal to (phi', phi_c).
struct DualBasis {
    double theta1 = 0.0;
    double theta2 = 0.0;
    Field g1;
    Field g2;
    Field primitive;  // int_{-L/2}^x d_c phi
    double residual = 0.0;  // max |(g_i, f_j) - delta_ij|
};

// theta1, theta2 from a least-squares fit of the biorthogonality conditions.
DualBasis build_dual_basis(double c0, const Grid& grid);

struct LimitCoefficients {
    Field z;  // lim Phi* z^eps = -|phi'|^-2 (T_{c0 t} Phi)* (phi phi')
    Field b;  // lim Phi* b^eps = (phi, d_c phi)^-1 (T_{c0 t} Phi)* (phi^2)
};

LimitCoefficients limit_coefficients(double t, double c0, const Kernel& kernel, const Grid& grid);

struct LimitState {
    Field eta;
    double lambda = 0.0;
    double t = 0.0;
    NoiseState noise;  // the co-moving process T_{c0 t} W
};

LimitState make_limit_state(NoiseState noise);

// d eta = Pi (d_x L eta dt + phi dW~), Pi the oblique projection onto
// {phi, phi'}^perp along span{phi', d_c phi}; this is the limit equation written
// with its drift and projection-correction noise terms combined.
class LimitSystem {
public:
    LimitSystem(const Grid& grid, double c0);

    const Grid& grid() const noexcept { return grid_; }
    double c0() const noexcept { return c0_; }
    const DualBasis& dual() const noexcept { return dual_; }
    const Field& phi() const noexcept { return phi_; }
    const Field& dphi() const noexcept { return dphi_; }
    const Field& dcphi() const noexcept { return dcphi_; }

    Field project(const Field& v) const;
    // y(eta) = |phi'|^-2 (eta, L phi'')
    double y(const Field& eta) const;
    // Approximates exp(dt d_x L): exact dispersion with RK4 half steps on -(phi eta)_x.
    void propagate(Field& eta, double dt);

    // Advances eta and lambda with a shared increment dW~ on the co-moving grid.
    void step(LimitState& s, double dt, const Field& dW);
    // Draws dW~ = T_{c0 t} dW from s.noise.
    void step(LimitState& s, double dt, unsigned substeps = 1);

    // lambda_{n+1} - lambda_n: trapezoidal drift plus the two noise pairings.
    double lambda_increment(const Field& eta_start, const Field& eta_propagated, const Field& dW, double dt) const;

private:
    void potential_rhs(const std::vector<cplx>& in, std::vector<cplx>& out);
    void potential_half(double h);

    Grid grid_;
    double c0_;
    Field phi_, dphi_, dcphi_, Ld2phi_, phi_dphi_, phi_g1_;
    DualBasis dual_;
    double dphi_sq_ = 0.0;
    double phi_dcphi_ = 0.0;
    std::vector<cplx> vh_, k1_, k2_, k3_, k4_, tmp_;
    std::vector<double> work_;
    Field dw_;
};

LimitState step_limit_eta(LimitSystem& sys, LimitState state, double dt);

}  // namespace skdv
