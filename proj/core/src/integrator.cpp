#include "skdv/integrator.hpp"
#include "skdv/errors.hpp"
#include "skdv/soliton.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skdv {

SkdvState make_state(Field u0, double eps, double frame_speed, NoiseState noise) {
    if (eps < 0.0) throw std::invalid_argument("noise amplitude must be non-negative");
    require_same_grid(u0, Field(noise.grid()));
    return SkdvState{std::move(u0), noise.time(), frame_speed, eps, std::move(noise)};
}

SkdvSolver::SkdvSolver(Grid grid, NonlinearScheme scheme, double blowup)
    : grid_(std::move(grid)), scheme_(scheme), blowup_(blowup), dw_(grid_) {
    const std::size_t m = grid_.modes();
    const auto& k = grid_.half_wavenumbers();
    const double cut = grid_.dealias_cutoff();
    mask_.resize(m);
    for (std::size_t j = 0; j < m; ++j) mask_[j] = k[j] <= cut ? 1.0 : 0.0;
    uh_.resize(m);
    k1_.resize(m);
    k2_.resize(m);
    k3_.resize(m);
    k4_.resize(m);
    tmp_.resize(m);
    work_.resize(grid_.size());
}

// out = -(1/2) i k D fft((ifft(D in))^2)
void SkdvSolver::nonlinear(const std::vector<cplx>& in, std::vector<cplx>& out) {
    const std::size_t m = in.size();
    for (std::size_t j = 0; j < m; ++j) out[j] = in[j] * mask_[j];
    grid_.inverse(out.data(), work_.data());
    for (double& v : work_) v *= v;
    grid_.forward(work_.data(), out.data());
    const auto& k = grid_.half_wavenumbers();
    for (std::size_t j = 0; j < m; ++j) out[j] *= cplx(0.0, -0.5 * k[j] * mask_[j]);
}

void SkdvSolver::nonlinear_half(double h) {
    const std::size_t m = uh_.size();
    if (scheme_ == NonlinearScheme::midpoint) {
        nonlinear(uh_, k1_);
        for (std::size_t j = 0; j < m; ++j) tmp_[j] = uh_[j] + 0.5 * h * k1_[j];
        nonlinear(tmp_, k2_);
        for (std::size_t j = 0; j < m; ++j) uh_[j] += h * k2_[j];
        return;
    }
    nonlinear(uh_, k1_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = uh_[j] + 0.5 * h * k1_[j];
    nonlinear(tmp_, k2_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = uh_[j] + 0.5 * h * k2_[j];
    nonlinear(tmp_, k3_);
    for (std::size_t j = 0; j < m; ++j) tmp_[j] = uh_[j] + h * k3_[j];
    nonlinear(tmp_, k4_);
    for (std::size_t j = 0; j < m; ++j) uh_[j] += h / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
}

void SkdvSolver::linear(double dt, double frame_speed) {
    const auto& k = grid_.half_wavenumbers();
    for (std::size_t j = 0; j < uh_.size(); ++j) {
        const double kk = k[j];
        uh_[j] *= std::polar(1.0, (kk * kk * kk + frame_speed * kk) * dt);
    }
}

void SkdvSolver::deterministic_step(Field& u, double dt, double frame_speed) {
    grid_.forward(u.data(), uh_.data());
    nonlinear_half(0.5 * dt);
    linear(dt, frame_speed);
    nonlinear_half(0.5 * dt);
    grid_.inverse(uh_.data(), u.data());
}

void SkdvSolver::noise_kick(SkdvState& s, double dt, const double* dW) {
    if (hook_) {
        Field w(grid_, std::vector<double>(dW, dW + grid_.size()));
        hook_(s.u, w, dt);
    }
    const double e = s.eps;
    const double q = s.noise.variance_rate() * dt;
    double* u = s.u.data();
    for (std::size_t j = 0; j < grid_.size(); ++j) {
        const double w = dW[j];
        u[j] *= 1.0 + e * w + 0.5 * e * e * (w * w - q);
    }
}

void SkdvSolver::check(const SkdvState& s, double t_prev) const {
    const double* u = s.u.data();
    for (std::size_t j = 0; j < s.u.size(); ++j) {
        if (!std::isfinite(u[j]) || std::abs(u[j]) > blowup_) {
            std::ostringstream os;
            os << "trajectory failed at t = " << s.t << " (last valid t = " << t_prev << ")";
            throw NumericalFailure(os.str(), t_prev);
        }
    }
}

void SkdvSolver::step(SkdvState& s, double dt, unsigned substeps) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    require_same_grid(s.u, dw_);
    const double t_prev = s.t;
    const double shift = s.frame_speed * s.t;
    deterministic_step(s.u, dt, s.frame_speed);
    if (s.eps > 0.0) {
        s.noise.sample_increment(dt, shift, substeps, dw_.data());
        noise_kick(s, dt, dw_.data());
    } else {
        s.noise.advance(dt, substeps);
    }
    s.t += dt;
    check(s, t_prev);
}

void SkdvSolver::step(SkdvState& s, double dt, const Field& dW) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    require_same_grid(s.u, dW);
    const double t_prev = s.t;
    deterministic_step(s.u, dt, s.frame_speed);
    if (s.eps > 0.0) noise_kick(s, dt, dW.data());
    s.t += dt;
    check(s, t_prev);
}

void SkdvSolver::run(SkdvState& s, double T, double dt, const Observer& observer, std::size_t stride,
                     unsigned substeps) {
    if (!(T > s.t)) throw std::invalid_argument("run needs T > current time");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const double span = T - s.t;
    auto n = static_cast<std::size_t>(std::llround(span / dt));
    if (n == 0) n = 1;
    const double h = span / static_cast<double>(n);
    if (observer && stride > 0 && !observer(s, 0)) return;
    for (std::size_t i = 1; i <= n; ++i) {
        step(s, h, substeps);
        if (i == n) s.t = T;
        if (!observer) continue;
        const bool due = (stride > 0 && i % stride == 0) || i == n;
        if (due && !observer(s, i)) return;
    }
}

SkdvState step(SkdvState state, double dt) {
    SkdvSolver solver(state.u.grid());
    solver.step(state, dt);
    return state;
}

SkdvState run(SkdvState state, double T, double dt, const SkdvSolver::Observer& observer, std::size_t stride) {
    SkdvSolver solver(state.u.grid());
    solver.run(state, T, dt, observer, stride);
    return state;
}

// ---------------------------------------------------------------- Ito balances

ItoBalance::ItoBalance(const Field& u0, double eps, const Kernel& kernel) : eps_(eps) {
    const Field k = kernel.sample(u0.grid());
    const Field kx = derivative(k, 1);
    k2_ = inner(k, k);
    kx2_ = inner(kx, kx);
    m0_ = mass(u0);
    h0_ = energy(u0);
}

void ItoBalance::record(const Field& v, const Field& dW, double dt) {
    if (eps_ == 0.0) return;
    const Field vx = derivative(v, 1);
    const Field vdw_x = derivative(v * dW, 1);
    const double dx = v.grid().dx();
    double v2w = 0.0, v3w = 0.0, v3 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double a = v[j];
        v2w += a * a * dW[j];
        v3w += a * a * a * dW[j];
        v3 += a * a * a;
    }
    v2w *= dx;
    v3w *= dx;
    v3 *= dx;
    const double m = mass(v);
    const double vx2 = inner(vx, vx);
    const double qv = eps_ * eps_ * k2_ * m * dt;
    qv_mass_ += qv;
    dm_ += eps_ * v2w + qv;
    dh_ += eps_ * inner(vx, vdw_x) - 0.5 * eps_ * v3w +
           0.5 * eps_ * eps_ * dt * (k2_ * vx2 + kx2_ * inner(v, v) - k2_ * v3);
}

BalanceResidual ItoBalance::residual(const Field& u_final) const {
    return {std::abs(mass(u_final) - m0_ - dm_), std::abs(energy(u_final) - h0_ - dh_)};
}

BalanceResidual ito_balance_residual(const TrajectoryRecord& record, const Kernel& kernel) {
    if (record.pre_noise.size() != record.increments.size() || record.dt.size() != record.increments.size())
        throw std::invalid_argument("trajectory record is inconsistent");
    ItoBalance bal(record.initial, record.eps, kernel);
    for (std::size_t i = 0; i < record.increments.size(); ++i)
        bal.record(record.pre_noise[i], record.increments[i], record.dt[i]);
    return bal.residual(record.final);
}

}  // namespace skdv
