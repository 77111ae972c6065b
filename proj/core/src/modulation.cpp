#include "skdv/modulation.hpp"
#include "skdv/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace skdv {

namespace {

std::vector<cplx> conv_symbol(const Field& kernel_values) {
    auto h = spectrum(kernel_values);
    const double dx = kernel_values.grid().dx();
    for (std::size_t j = 0; j < h.size(); ++j) h[j] *= (j % 2 == 0 ? dx : -dx);
    return h;
}

Field apply_conv(const std::vector<cplx>& symbol, const Field& f) {
    auto fh = spectrum(f);
    for (std::size_t j = 0; j < fh.size(); ++j) fh[j] *= symbol[j];
    return from_spectrum(f.grid(), std::move(fh));
}

// Translate given spectrum uh by y, optionally differentiating once.
Field shifted(const Grid& g, const std::vector<cplx>& uh, double y, bool differentiate) {
    const auto& k = g.half_wavenumbers();
    std::vector<cplx> h(uh.size());
    const std::size_t nyq = h.size() - 1;
    for (std::size_t j = 0; j < nyq; ++j) {
        cplx m = std::polar(1.0, k[j] * y);
        if (differentiate) m *= cplx(0.0, k[j]);
        h[j] = uh[j] * m;
    }
    h[nyq] = differentiate ? 0.0 : uh[nyq] * std::cos(k[nyq] * y);
    return from_spectrum(g, std::move(h));
}

}  // namespace

ModulationTracker::ModulationTracker(const Grid& grid, const Kernel& kernel, ModulationOptions opts)
    : grid_(grid), kernel_(kernel), opts_(opts) {
    if (!(opts_.c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    if (!(opts_.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (opts_.eps < 0.0) throw std::invalid_argument("eps must be non-negative");
    phi0_ = soliton(opts_.c0, grid_);
    dphi0_ = soliton_dx(opts_.c0, grid_);
    d2phi0_ = soliton_dxx(opts_.c0, grid_);
    d3phi0_ = soliton_dxxx(opts_.c0, grid_);
    Ld2phi0_ = LinearizedOperator(opts_.c0, grid_).apply(d2phi0_);
    dphi0_sq_ = inner(dphi0_, dphi0_);
    corr_hat_ = conv_symbol(correlation_field(kernel_, grid_));
    kref_hat_ = conv_symbol(reflect(kernel_.sample(grid_)));
}

Field ModulationTracker::apply_correlation(const Field& f) const { return apply_conv(corr_hat_, f); }
Field ModulationTracker::phi_star(const Field& f) const { return apply_conv(kref_hat_, f); }

bool ModulationTracker::exit_test(double c, double remainder_h1) const {
    return std::abs(c - opts_.c0) > opts_.alpha || remainder_h1 > opts_.alpha;
}

ModulationState ModulationTracker::decompose(const Field& u, const SolitonParams& guess, double t) const {
    require_same_grid(u, phi0_);
    const auto uh = spectrum(u);
    double c = guess.c;
    double x = guess.x0;
    ModulationState s;
    s.t = t;
    bool converged = false;
    int polish = 0;
    int it = 0;
    Field d;
    for (; it <= opts_.max_iter; ++it) {
        if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(x)) break;
        const Field v = shifted(grid_, uh, x, false);
        const Field phic = soliton(c, grid_);
        d = v - phic;
        const double F1 = inner(d, phi0_);
        const double F2 = inner(d, dphi0_);
        if (std::max(std::abs(F1), std::abs(F2)) <= opts_.tol) {
            converged = true;
            // One extra Newton step pushes the residual down to rounding level.
            if (polish++ >= 1) break;
        }
        const Field vx = shifted(grid_, uh, x, true);
        const Field dc = soliton_dc(c, grid_);
        Eigen::Matrix2d J;
        J << -inner(dc, phi0_), inner(vx, phi0_), -inner(dc, dphi0_), inner(vx, dphi0_);
        const double det = J.determinant();
        if (!std::isfinite(det) || std::abs(det) < 1e-14 * J.cwiseAbs().maxCoeff() * J.cwiseAbs().maxCoeff()) break;
        const Eigen::Vector2d delta = J.partialPivLu().solve(Eigen::Vector2d(-F1, -F2));
        c += delta(0);
        x += delta(1);
    }
    s.iterations = it;
    s.c = c;
    s.x = x;
    if (!converged || d.empty()) {
        s.newton_failed = true;
        s.exited = true;
        s.eta = Field(grid_);
        return s;
    }
    s.remainder_h1 = norm_h1(d);
    s.exited = exit_test(c, s.remainder_h1);
    if (opts_.eps > 0.0) d *= 1.0 / opts_.eps;
    s.ortho_phi = inner(d, phi0_);
    s.ortho_dphi = inner(d, dphi0_);
    s.eta = std::move(d);
    return s;
}

Eigen::Matrix2d ModulationTracker::jacobian_A(const ModulationState& s) const {
    const Field dxphi = soliton_dx(s.c, grid_);
    const Field dcphi = soliton_dc(s.c, grid_);
    const double e = opts_.eps;
    Eigen::Matrix2d A;
    // (eps eta_x, phi0') = -eps (eta, phi0'')
    A(0, 0) = inner(dxphi, dphi0_) - (e > 0.0 ? e * inner(s.eta, d2phi0_) : 0.0);
    A(0, 1) = -inner(dcphi, dphi0_);
    A(1, 0) = -inner(dxphi, phi0_);
    A(1, 1) = inner(dcphi, phi0_);
    const double scale = std::abs(A(0, 0) * A(1, 1));
    if (!std::isfinite(A.determinant()) || std::abs(A.determinant()) < 1e-12 * scale)
        throw SingularSystem("modulation matrix A is singular", s.t);
    return A;
}

void ModulationTracker::solve_martingale(const ModulationState& s, ModCoefficients& out) const {
    out.jacobian = jacobian_A(s);
    const Eigen::Matrix2d Ai = out.jacobian.inverse();
    Field w = soliton(s.c, grid_);
    if (opts_.eps > 0.0) w.axpy(opts_.eps, s.eta);
    const Field f1 = -(w * dphi0_);
    const Field f2 = w * phi0_;
    out.z_hat = Ai(0, 0) * f1 + Ai(0, 1) * f2;
    out.b_hat = Ai(1, 0) * f1 + Ai(1, 1) * f2;
    out.z_rep = translate(out.z_hat, -s.x);
    out.b_rep = translate(out.b_hat, -s.x);
    out.phi_star_z = norm_l2(phi_star(out.z_hat));
    out.phi_star_b = norm_l2(phi_star(out.b_hat));
}

void ModulationTracker::solve_drift(const ModulationState& s, ModCoefficients& out) const {
    if (out.z_hat.empty()) throw std::logic_error("solve_drift needs the martingale representers first");
    const double e = opts_.eps;
    const Field& eta = s.eta;
    const Field phic = soliton(s.c, grid_);
    const Field d2phic = soliton_dxx(s.c, grid_);
    const Field dccphi = soliton_dcc(s.c, grid_);
    const Field shift_eta = (phic - phi0_) * eta;
    const Field eta2 = eta * eta;
    Field w = phic;
    if (e > 0.0) w.axpy(e, eta);

    const Field Cz = apply_correlation(out.z_hat);
    const Field Cb = apply_correlation(out.b_hat);
    const double z2 = inner(out.z_hat, Cz);
    const double b2 = inner(out.b_hat, Cb);
    out.phi_star_z = std::sqrt(std::max(z2, 0.0));
    out.phi_star_b = std::sqrt(std::max(b2, 0.0));

    // Integration by parts: (f_x, psi) = -(f, psi_x).
    double G1 = inner(eta, Ld2phi0_) + (s.c - opts_.c0) * inner(eta, d2phi0_) - inner(shift_eta, d2phi0_);
    double G2 = inner(shift_eta, dphi0_);
    if (e > 0.0) {
        G1 += -0.5 * e * inner(eta2, d2phi0_) - 0.5 * e * inner(d2phic, dphi0_) * z2 +
              0.5 * e * inner(dccphi, dphi0_) * b2 + e * inner(Cz, w * d2phi0_) -
              0.5 * e * e * inner(eta, d3phi0_) * z2;
        G2 += 0.5 * e * inner(eta2, dphi0_) + 0.5 * e * inner(d2phic, phi0_) * z2 -
              0.5 * e * inner(dccphi, phi0_) * b2 - e * inner(Cz, w * dphi0_) +
              0.5 * e * e * inner(eta, d2phi0_) * z2;
    }
    const Eigen::Vector2d Y = out.jacobian.partialPivLu().solve(Eigen::Vector2d(G1, G2));
    out.y = Y(0);
    out.a = Y(1);
}

ModCoefficients ModulationTracker::coefficients(const ModulationState& s) const {
    ModCoefficients out;
    solve_martingale(s, out);
    solve_drift(s, out);
    return out;
}

double ModulationTracker::limit_y(const Field& eta) const { return inner(eta, Ld2phi0_) / dphi0_sq_; }

ModulationState decompose(const Field& u, const SolitonParams& guess, double c0, double alpha, double eps,
                          const Kernel& kernel) {
    ModulationOptions o;
    o.c0 = c0;
    o.alpha = alpha;
    o.eps = eps;
    return ModulationTracker(u.grid(), kernel, o).decompose(u, guess);
}

// ---------------------------------------------------------------- tracking

TrajectoryTracker::TrajectoryTracker(const ModulationTracker& tracker, SolitonParams start, double frame_speed)
    : tracker_(tracker), guess_(start), frame_speed_(frame_speed) {}

bool TrajectoryTracker::observe(const Field& u, double t) {
    if (exited_) return false;
    if (started_) guess_.x0 += (guess_.c - frame_speed_) * (t - last_t_);
    started_ = true;
    last_t_ = t;
    ModulationState s = tracker_.decompose(u, guess_, t);
    if (!s.newton_failed) guess_ = {s.c, s.x};
    if (s.exited) {
        exited_ = true;
        tau_ = t;
    }
    series_.push_back(std::move(s));
    return !exited_;
}

TrackResult track(const std::vector<TimedField>& trajectory, const ModulationTracker& tracker, double frame_speed) {
    TrajectoryTracker tt(tracker, {tracker.options().c0, 0.0}, frame_speed);
    for (const auto& snap : trajectory)
        if (!tt.observe(snap.u, snap.t)) break;
    return {tt.series(), tt.exit_time()};
}

std::vector<RefinedState> refine_center(const std::vector<ModulationState>& series, const std::vector<double>& lambda,
                                        double eps) {
    if (series.size() != lambda.size()) throw std::invalid_argument("series and lambda lengths differ");
    std::vector<RefinedState> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        RefinedState r;
        r.t = s.t;
        r.x = s.x;
        const double shift = eps * lambda[i];
        r.x_refined = s.x - shift;
        if (shift == 0.0 || eps == 0.0) {
            r.eta_tilde = s.eta;
        } else {
            const Grid& g = s.eta.grid();
            const double c = s.c;
            Field dphi = Field::sample(g, [c, shift](double x) {
                return profile::phi(c, x - shift) - profile::phi(c, x);
            });
            r.eta_tilde = dphi * (1.0 / eps) + translate(s.eta, -shift);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace skdv
