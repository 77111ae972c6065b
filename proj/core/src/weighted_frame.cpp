#include "skdv/weighted_frame.hpp"
#include "skdv/errors.hpp"
#include "skdv/soliton.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skdv {

namespace {

// Centred difference matrices with zero values outside the interval.
Eigen::MatrixXd difference_matrix(std::size_t n, double dx, const std::map<int, double>& coeffs, bool odd,
                                  int order) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    const double scale = std::pow(dx, -order);
    const auto N = static_cast<long>(n);
    for (long i = 0; i < N; ++i) {
        for (const auto& [m, v] : coeffs) {
            if (m == 0) {
                D(i, i) += v * scale;
                continue;
            }
            if (i + m < N) D(i, i + m) += v * scale;
            if (i - m >= 0) D(i, i - m) += (odd ? -v : v) * scale;
        }
    }
    return D;
}

void difference_set(FrameStencil s, std::size_t n, double dx, Eigen::MatrixXd& D1, Eigen::MatrixXd& D2,
                    Eigen::MatrixXd& D3) {
    if (s == FrameStencil::fd4) {
        D1 = difference_matrix(n, dx, {{1, 8.0 / 12}, {2, -1.0 / 12}}, true, 1);
        D2 = difference_matrix(n, dx, {{0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}}, false, 2);
        D3 = difference_matrix(n, dx, {{1, -13.0 / 8}, {2, 1.0}, {3, -1.0 / 8}}, true, 3);
    } else {
        D1 = difference_matrix(n, dx, {{1, 45.0 / 60}, {2, -9.0 / 60}, {3, 1.0 / 60}}, true, 1);
        D2 = difference_matrix(n, dx, {{0, -490.0 / 180}, {1, 270.0 / 180}, {2, -27.0 / 180}, {3, 2.0 / 180}},
                               false, 2);
        D3 = difference_matrix(n, dx, {{1, -488.0 / 240}, {2, 338.0 / 240}, {3, -72.0 / 240}, {4, 7.0 / 240}},
                               true, 3);
    }
}

}  // namespace

Eigen::VectorXd to_vector(const Field& f) { return Eigen::Map<const Eigen::VectorXd>(f.data(), f.size()); }

Field to_field(const Grid& grid, const Eigen::VectorXd& v) {
    return Field(grid, std::vector<double>(v.data(), v.data() + v.size()));
}

double WeightedFrame::biorthogonality_error() const {
    return std::max({std::abs(inner(f1, g1) - 1.0), std::abs(inner(f1, g2)), std::abs(inner(f2, g1)),
                     std::abs(inner(f2, g2) - 1.0)});
}

double WeightedFrame::h1_norm_sq(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd wx = D1 * w;
    return grid.dx() * (w.squaredNorm() + wx.squaredNorm());
}

double WeightedFrame::h1_norm(const Eigen::VectorXd& w) const { return std::sqrt(h1_norm_sq(w)); }

WeightedFrame build_weighted_frame(double c0, double a, const Grid& grid, FrameStencil stencil) {
    if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
    if (!(a > 0.0) || !(a < std::sqrt(c0 / 3.0)))
        throw std::invalid_argument("weight exponent must satisfy 0 < a < sqrt(c0/3), got " + std::to_string(a));
    WeightedFrame fr;
    fr.a = a;
    fr.c0 = c0;
    fr.stencil = stencil;
    fr.grid = grid;
    const std::size_t n = grid.size();
    const auto& x = grid.nodes();
    fr.weight.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) fr.weight(static_cast<Eigen::Index>(j)) = std::exp(a * x[j]);
    const Field w = to_field(grid, fr.weight);
    const Field winv = Field::sample(grid, [a](double s) { return std::exp(-a * s); });

    fr.dual = build_dual_basis(c0, grid);
    fr.theta1 = fr.dual.theta1;
    fr.theta2 = fr.dual.theta2;
    fr.f1 = w * soliton_dx(c0, grid);
    fr.f2 = w * soliton_dc(c0, grid);
    fr.g1 = winv * fr.dual.g1;
    fr.g2 = winv * fr.dual.g2;

    Eigen::MatrixXd D1, D2, D3;
    if (stencil == FrameStencil::fourier) {
        D1 = derivative_matrix(grid, 1);
        D2 = derivative_matrix(grid, 2);
        D3 = derivative_matrix(grid, 3);
    } else {
        difference_set(stencil, n, grid.dx(), D1, D2, D3);
    }
    const auto I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Field phi = soliton(c0, grid);
    Eigen::VectorXd pot(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) pot(static_cast<Eigen::Index>(j)) = c0 - phi[j];
    const Eigen::MatrixXd Dm = D1 - a * I;
    fr.A = -D3 + 3.0 * a * D2 - 3.0 * a * a * D1 + a * a * a * I;
    fr.A += Dm * pot.asDiagonal();
    fr.D1 = std::move(D1);

    const Eigen::VectorXd F1 = to_vector(fr.f1), F2 = to_vector(fr.f2);
    const Eigen::VectorXd G1 = to_vector(fr.g1), G2 = to_vector(fr.g2);
    fr.P = grid.dx() * (F1 * G1.transpose() + F2 * G2.transpose());
    fr.Q = I - fr.P;
    return fr;
}

Eigen::VectorXcd frame_spectrum(const WeightedFrame& frame) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(frame.A, false);
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const cplx& p, const cplx& q) { return p.real() > q.real(); });
    return ev;
}

double fit_decay_rate(const WeightedFrame& frame, const Eigen::VectorXd& v, double T, int steps) {
    const double h = T / steps;
    const Eigen::MatrixXd M = (frame.A * h).exp();
    Eigen::VectorXd cur = v;
    std::vector<double> ts, ls;
    for (int s = 0; s <= steps; ++s) {
        if (s > 0) cur = M * cur;
        const double t = s * h;
        if (t >= 0.5 * T - 1e-12) {
            ts.push_back(t);
            ls.push_back(std::log(frame.h1_norm(cur)));
        }
    }
    const double n = static_cast<double>(ts.size());
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    return -slope;
}

DecayReport semigroup_decay(const WeightedFrame& frame, std::size_t samples, double T, std::uint64_t seed) {
    if (samples == 0 || !(T > 0.0)) throw std::invalid_argument("semigroup_decay needs samples > 0 and T > 0");
    constexpr int steps = 64;
    const double h = T / steps;
    const Eigen::MatrixXd M = (frame.A * h).exp();
    const auto& x = frame.grid.nodes();
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> centre(-8.0, 8.0), width(0.7, 3.0);

    DecayReport rep;
    for (int s = 0; s <= steps; ++s) rep.times.push_back(s * h);
    rep.rate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.size()));
        for (int m = 0; m < 6; ++m) {
            const double amp = nd(gen), x0 = centre(gen), sd = width(gen);
            for (std::size_t j = 0; j < x.size(); ++j)
                w(static_cast<Eigen::Index>(j)) += amp * std::exp(-(x[j] - x0) * (x[j] - x0) / (2.0 * sd * sd));
        }
        const Eigen::VectorXd qw = frame.Q * w;
        Eigen::VectorXd cur = qw, full = w;
        std::vector<double> norms;
        std::vector<double> ts, ls;
        for (int s = 0; s <= steps; ++s) {
            if (s > 0) {
                cur = M * cur;
                full = M * full;
            }
            const double nrm = frame.h1_norm(cur);
            norms.push_back(nrm);
            if (rep.times[s] >= 0.5 * T - 1e-12) {
                ts.push_back(rep.times[s]);
                ls.push_back(std::log(nrm));
            }
        }
        const double err = frame.h1_norm(frame.Q * full - cur) / frame.h1_norm(w);
        rep.commutation_error = std::max(rep.commutation_error, err);
        const double n = static_cast<double>(ts.size());
        double st = 0, sl = 0, stt = 0, stl = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            st += ts[i];
            sl += ls[i];
            stt += ts[i] * ts[i];
            stl += ts[i] * ls[i];
        }
        const double rate = -(n * stl - st * sl) / (n * stt - st * st);
        rep.rates.push_back(rate);
        rep.rate = std::min(rep.rate, rate);
        rep.norms.push_back(std::move(norms));
    }
    if (!(rep.rate > 0.0)) {
        const Eigen::VectorXcd ev = frame_spectrum(frame);
        std::ostringstream os;
        os << "semigroup does not decay (fitted rate " << rep.rate << "); leading eigenvalues:";
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(6, ev.size()); ++i) os << ' ' << ev(i);
        throw NumericalFailure(os.str());
    }
    return rep;
}

OuResult ou_evolve(const WeightedFrame& frame, const Kernel& kernel, const OuOptions& opts) {
    if (!(opts.dt > 0.0) || !(opts.T > opts.dt)) throw std::invalid_argument("ou_evolve needs 0 < dt < T");
    const Grid& g = frame.grid;
    const auto n = static_cast<Eigen::Index>(g.size());
    const double dx = g.dx();
    const Eigen::MatrixXd M = (frame.A * opts.dt).exp();

    // Noise term Q diag(e^{ax} phi) dW with Cov(dW_i, dW_j) = dt c(x_i - x_j).
    const Field phi = soliton(frame.c0, g);
    Eigen::VectorXd ephi = frame.weight.cwiseProduct(to_vector(phi)) * opts.noise_scale;
    const Eigen::MatrixXd B = frame.Q * ephi.asDiagonal();
    const Field corr = correlation_field(kernel, g);
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) C(i, j) = corr[static_cast<std::size_t>(((i - j) % n + n + n / 2) % n)];
    Eigen::MatrixXd S = opts.dt * B * C * B.transpose();
    S = 0.5 * (S + S.transpose());

    OuResult out;
    {
        const KernelNorms kn = kernel.norms(g);
        Field ew = to_field(g, ephi / (opts.noise_scale == 0.0 ? 1.0 : opts.noise_scale));
        out.bound_norm = kn.h1 * kn.h1 * norm_h1(ew) * norm_h1(ew);
    }

    auto h1_trace = [&](const Eigen::MatrixXd& Sig) {
        return dx * (Sig.trace() + (frame.D1 * Sig * frame.D1.transpose()).trace());
    };
    // Sigma(2m) = Sigma(m) + M^m Sigma(m) M^m^T up to a stride h of about T/16,
    // then Sigma(t + h) = M^h Sigma(t) M^h^T + Sigma(h).
    Eigen::MatrixXd Sig = S, Mp = M;
    double tt = opts.dt;
    const double stride = std::max(opts.dt, opts.T / 16.0);
    while (2.0 * tt <= stride * (1.0 + 1e-12)) {
        out.exact_t.push_back(tt);
        out.exact_trace.push_back(h1_trace(Sig));
        Sig = Sig + Mp * Sig * Mp.transpose();
        Mp = Mp * Mp;
        tt *= 2.0;
    }
    const Eigen::MatrixXd Sh = Sig;
    const double h = tt;
    while (tt <= opts.T * (1.0 + 1e-12)) {
        out.exact_t.push_back(tt);
        out.exact_trace.push_back(h1_trace(Sig));
        Sig = Mp * Sig * Mp.transpose() + Sh;
        tt += h;
    }

    const auto steps = static_cast<std::size_t>(std::llround(opts.T / opts.dt));
    out.t.resize(steps + 1);
    out.empirical_trace.assign(steps + 1, 0.0);
    out.max_p_component.assign(steps + 1, 0.0);
    out.path_h1.assign(steps + 1, 0.0);
    for (std::size_t s = 0; s <= steps; ++s) out.t[s] = s * opts.dt;

    // P is rank two; apply it through the bases.
    const Eigen::VectorXd F1 = to_vector(frame.f1), F2 = to_vector(frame.f2);
    const Eigen::VectorXd G1 = dx * to_vector(frame.g1), G2 = dx * to_vector(frame.g2);
    Field dW(g);
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(n);
    if (opts.initial) w0 = frame.Q * *opts.initial;
    for (std::size_t p = 0; p < opts.n_paths; ++p) {
        NoiseState noise(kernel, g, opts.seed, p);
        Eigen::VectorXd w = w0;
        for (std::size_t s = 0; s <= steps; ++s) {
            if (s > 0) {
                w = M * w;
                if (opts.noise_scale != 0.0) {
                    noise.sample_increment(opts.dt, 0.0, 1, dW.data());
                    w += B * Eigen::Map<const Eigen::VectorXd>(dW.data(), n);
                }
            }
            const double h1 = frame.h1_norm_sq(w);
            out.empirical_trace[s] += h1 / static_cast<double>(opts.n_paths);
            const Eigen::VectorXd pw = G1.dot(w) * F1 + G2.dot(w) * F2;
            out.max_p_component[s] = std::max(out.max_p_component[s], std::sqrt(dx) * pw.norm());
            if (p == 0) out.path_h1[s] = std::sqrt(h1);
        }
    }
    return out;
}

}  // namespace skdv
