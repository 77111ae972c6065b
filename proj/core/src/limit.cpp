#include "skdv/limit.hpp"
#include "skdv/errors.hpp"
#include "skdv/soliton.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace skdv {

DualBasis build_dual_basis(double c0, const Grid& grid) {
    const Field phi = soliton(c0, grid);
    const Field dphi = soliton_dx(c0, grid);
    const Field dcphi = soliton_dc(c0, grid);
    DualBasis d;
    d.primitive = antiderivative(dcphi);
    const Field& G = d.primitive;
    Eigen::Matrix<double, 3, 2> M;
    M << -inner(G, dphi), inner(phi, dphi), -inner(G, dcphi), inner(phi, dcphi), inner(phi, dcphi), 0.0;
    const Eigen::Vector3d rhs(1.0, 0.0, 1.0);
    const Eigen::Vector2d th = M.colPivHouseholderQr().solve(rhs);
    if (!th.allFinite() || th.cwiseAbs().maxCoeff() == 0.0)
        throw NumericalFailure("biorthogonality system is singular");
    d.theta1 = th(0);
    d.theta2 = th(1);
    d.g1 = -d.theta1 * G + d.theta2 * phi;
    d.g2 = d.theta1 * phi;
    d.residual = std::max({std::abs(inner(d.g1, dphi) - 1.0), std::abs(inner(d.g1, dcphi)),
                           std::abs(inner(d.g2, dphi)), std::abs(inner(d.g2, dcphi) - 1.0)});
    return d;
}

LimitCoefficients limit_coefficients(double t, double c0, const Kernel& kernel, const Grid& grid) {
    const Field phi = soliton(c0, grid);
    const Field dphi = soliton_dx(c0, grid);
    const Field dcphi = soliton_dc(c0, grid);
    const double shift = -c0 * t;
    LimitCoefficients out;
    out.z = translate(smoother_adjoint(kernel, phi * dphi), shift) * (-1.0 / inner(dphi, dphi));
    out.b = translate(smoother_adjoint(kernel, phi * phi), shift) * (1.0 / inner(phi, dcphi));
    return out;
}

LimitState make_limit_state(NoiseState noise) {
    Field zero(noise.grid());
    const double t = noise.time();
    return LimitState{std::move(zero), 0.0, t, std::move(noise)};
}

LimitSystem::LimitSystem(const Grid& grid, double c0) : grid_(grid), c0_(c0), dw_(grid) {
    phi_ = soliton(c0, grid_);
    dphi_ = soliton_dx(c0, grid_);
    dcphi_ = soliton_dc(c0, grid_);
    Ld2phi_ = LinearizedOperator(c0, grid_).apply(soliton_dxx(c0, grid_));
    dual_ = build_dual_basis(c0, grid_);
    dphi_sq_ = inner(dphi_, dphi_);
    phi_dcphi_ = inner(phi_, dcphi_);
    phi_dphi_ = phi_ * dphi_;
    phi_g1_ = phi_ * dual_.g1;
    const std::size_t m = grid_.modes();
    vh_.resize(m);
    k1_.resize(m);
    k2_.resize(m);
    k3_.resize(m);
    k4_.resize(m);
    tmp_.resize(m);
    work_.resize(grid_.size());
}

Field LimitSystem::project(const Field& v) const {
    Field out = v;
    out.axpy(-inner(v, dphi_) / dphi_sq_, dphi_);
    out.axpy(-inner(v, phi_) / phi_dcphi_, dcphi_);
    return out;
}

double LimitSystem::y(const Field& eta) const { return inner(eta, Ld2phi_) / dphi_sq_; }

// out = -i k fft(phi * ifft(in))
void LimitSystem::potential_rhs(const std::vector<cplx>& in, std::vector<cplx>& out) {
    out = in;
    grid_.inverse(out.data(), work_.data());
    for (std::size_t j = 0; j < work_.size(); ++j) work_[j] *= phi_[j];
    grid_.forward(work_.data(), out.data());
    const auto& k = grid_.half_wavenumbers();
    for (std::size_t j = 0; j + 1 < out.size(); ++j) out[j] *= cplx(0.0, -k[j]);
    out.back() = 0.0;
}

void LimitSystem::potential_half(double h) {
    const std::size_t m = vh_.size();
    potential_rhs(vh_, k1_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = vh_[j] + 0.5 * h * k1_[j];
    potential_rhs(tmp_, k2_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = vh_[j] + 0.5 * h * k2_[j];
    potential_rhs(tmp_, k3_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = vh_[j] + h * k3_[j];
    potential_rhs(tmp_, k4_);
    for (std::size_t j = 0; j < m; ++j) vh_[j] += h / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
}

void LimitSystem::propagate(Field& eta, double dt) {
    require_same_grid(eta, phi_);
    grid_.forward(eta.data(), vh_.data());
    potential_half(0.5 * dt);
    const auto& k = grid_.half_wavenumbers();
    // -eta_xxx + c0 eta_x has symbol i (k^3 + c0 k)
    for (std::size_t j = 0; j < vh_.size(); ++j) vh_[j] *= std::polar(1.0, (k[j] * k[j] * k[j] + c0_ * k[j]) * dt);
    potential_half(0.5 * dt);
    grid_.inverse(vh_.data(), eta.data());
}

double LimitSystem::lambda_increment(const Field& eta_start, const Field& eta_propagated, const Field& dW,
                                     double dt) const {
    const double drift = 0.5 * (y(eta_start) + y(eta_propagated)) * dt;
    return drift + inner(phi_g1_, dW) - inner(phi_dphi_, dW) / dphi_sq_;
}

void LimitSystem::step(LimitState& s, double dt, const Field& dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    require_same_grid(dW, phi_);
    Field prop = s.eta;
    propagate(prop, dt);
    s.lambda += lambda_increment(s.eta, prop, dW, dt);
    prop += phi_ * dW;
    s.eta = project(prop);
    const double t_prev = s.t;
    s.t += dt;
    if (!s.eta.all_finite() || !std::isfinite(s.lambda))
        throw NumericalFailure("limit trajectory failed", t_prev);
}

void LimitSystem::step(LimitState& s, double dt, unsigned substeps) {
    s.noise.sample_increment(dt, c0_ * s.t, substeps, dw_.data());
    step(s, dt, dw_);
}

LimitState step_limit_eta(LimitSystem& sys, LimitState state, double dt) {
    sys.step(state, dt);
    return state;
}

}  // namespace skdv
