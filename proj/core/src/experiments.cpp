#include "skdv/experiments.hpp"

#include "skdv/ensemble.hpp"
#include "skdv/errors.hpp"
#include "skdv/integrator.hpp"
#include "skdv/limit.hpp"
#include "skdv/soliton.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace skdv {

using nlohmann::json;

namespace {

int thread_count(const ExperimentConfig& cfg) {
    if (cfg.ensemble.threads > 0) return cfg.ensemble.threads;
    if (const char* env = std::getenv("SKDV_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return resolve_threads(0);
}

std::size_t step_count(const ExperimentConfig& cfg) {
    return static_cast<std::size_t>(std::max<long long>(1, std::llround(cfg.integration.T / cfg.integration.dt)));
}

void say(const Progress& p, const std::string& msg) {
    if (p) p(msg);
}

class Csv {
public:
    Csv(const std::filesystem::path& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << std::setprecision(17) << header << '\n';
    }
    template <class... T>
    void row(const T&... v) {
        bool first = true;
        ((out_ << (first ? "" : ",") << v, first = false), ...);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

double safe(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    double p = static_cast<double>(k) / n;
    double z2 = z * z / n;
    double centre = (p + z2 / 2.0) / (1.0 + z2);
    double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / (1.0 + z2);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    LinearFit f;
    f.points = x.size();
    if (x.size() < 2) return f;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

// ---- exit time ----------------------------------------------------------

PathOutcome exit_time_path(const ExperimentConfig& cfg, double eps, std::uint64_t path) {
    const Grid grid(cfg.grid.L, cfg.grid.N);
    const Kernel kernel = make_kernel(cfg.kernel);
    const double c0 = cfg.physics.c0;
    ModulationTracker tracker(grid, kernel, {c0, cfg.physics.alpha, eps});
    TrajectoryTracker tt(tracker, {c0, 0.0}, c0);
    SkdvSolver solver(grid);
    SkdvState s = make_state(soliton(c0, grid), eps, c0, NoiseState(kernel, grid, cfg.ensemble.seed, path));

    PathOutcome out;
    try {
        solver.run(
            s, cfg.integration.T, cfg.integration.dt,
            [&](const SkdvState& st, std::size_t) { return tt.observe(st.u, st.t); }, cfg.integration.stride,
            cfg.integration.substeps);
    } catch (const NumericalFailure& e) {
        out.failed = true;
        out.reason = e.what();
        return out;
    }
    if (tt.exited()) {
        out.exited = true;
        out.tau = tt.exit_time();
        out.newton_failed = tt.last().newton_failed;
        if (out.newton_failed) out.reason = "newton";
    }
    return out;
}

ExitTimeReport run_exit_time(const ExperimentConfig& cfg, const Progress& progress) {
    validate(cfg);
    ExitTimeReport rep;
    const std::size_t n = cfg.ensemble.n_paths;
    for (double eps : cfg.physics.eps) {
        std::vector<PathOutcome> outcomes(n);
        parallel_for(n, thread_count(cfg), [&](std::size_t p) { outcomes[p] = exit_time_path(cfg, eps, p); });

        ExitTimeRow row;
        row.eps = eps;
        double tau_sum = 0.0;
        for (const auto& o : outcomes) {
            if (o.failed) {
                ++row.failed;
                continue;
            }
            ++row.paths;
            if (o.exited) {
                ++row.exits;
                tau_sum += o.tau;
            }
            if (o.newton_failed) ++row.newton_failures;
        }
        if (row.failed * 100 > n)
            throw NumericalFailure("exit-time: more than 1% of paths failed at eps = " + std::to_string(eps));
        row.p_hat = row.paths ? static_cast<double>(row.exits) / row.paths : 0.0;
        row.ci = wilson_interval(row.exits, row.paths);
        if (row.exits) row.mean_tau = tau_sum / row.exits;
        std::ostringstream os;
        os << "exit-time eps=" << eps << " exits " << row.exits << "/" << row.paths << " (newton " << row.newton_failures
           << ", failed " << row.failed << ")";
        say(progress, os.str());
        rep.rows.push_back(row);
    }

    std::vector<double> x, y;
    for (const auto& r : rep.rows)
        if (r.exits > 0 && r.eps > 0.0) {
            x.push_back(1.0 / (r.eps * r.eps));
            y.push_back(std::log(r.p_hat));
        }
    rep.fit = linear_fit(x, y);
    rep.informative = x.size() >= 2;
    if (x.empty())
        rep.message = "no exits at any eps; raise eps or T";
    else if (x.size() < 2)
        rep.message = "exits at a single eps only; regression not informative";
    else if (rep.fit.slope >= 0.0)
        rep.message = "non-negative slope of log P against eps^-2";
    return rep;
}

// ---- central limit theorem ---------------------------------------------

CltPath clt_path(const ExperimentConfig& cfg, double eps, std::uint64_t path) {
    const Grid grid(cfg.grid.L, cfg.grid.N);
    const Kernel kernel = make_kernel(cfg.kernel);
    const double c0 = cfg.physics.c0;
    const double dt = cfg.integration.dt;
    const std::size_t steps = step_count(cfg);
    const std::size_t stride = cfg.integration.stride;

    ModulationTracker tracker(grid, kernel, {c0, cfg.physics.alpha, eps});
    TrajectoryTracker tt(tracker, {c0, 0.0}, c0);
    SkdvSolver solver(grid);
    LimitSystem sys(grid, c0);
    const LimitCoefficients lim = limit_coefficients(0.0, c0, kernel, grid);
    const Field dphi = sys.dphi();

    // one stream drives both systems; the increment is drawn in the co-moving frame
    NoiseState noise(kernel, grid, cfg.ensemble.seed, path);
    SkdvState s = make_state(soliton(c0, grid), eps, c0, noise);
    LimitState ls = make_limit_state(noise);

    CltPath out;
    auto observe = [&](double t) {
        if (!tt.observe(s.u, t)) return false;
        const ModulationState& st = tt.last();
        out.eta_err = std::max(out.eta_err, norm_l2(st.eta - ls.eta));
        auto refined = refine_center({st}, {ls.lambda}, eps);
        Field target = ls.eta - ls.lambda * dphi;
        out.eta_tilde_err = std::max(out.eta_tilde_err, norm_l2(refined[0].eta_tilde - target));
        ModCoefficients co = tracker.coefficients(st);
        out.z_err = std::max(out.z_err, norm_l2(tracker.phi_star(co.z_rep) - lim.z));
        out.b_err = std::max(out.b_err, norm_l2(tracker.phi_star(co.b_rep) - lim.b));
        out.y_err = std::max(out.y_err, std::abs(co.y - sys.y(ls.eta)));
        out.a_sup = std::max(out.a_sup, std::abs(co.a));
        out.c_sq = std::max(out.c_sq, (st.c - c0) * (st.c - c0));
        double e2 = inner(st.eta, st.eta);
        out.eta_l2_4 = std::max(out.eta_l2_4, e2 * e2);
        return true;
    };

    try {
        observe(0.0);
        for (std::size_t n = 1; n <= steps; ++n) {
            Field dW = noise.sample_increment(dt, c0 * s.t, cfg.integration.substeps);
            solver.step(s, dt, dW);
            sys.step(ls, dt, dW);
            if (n % stride == 0 || n == steps) {
                if (!observe(s.t)) {
                    out.exited = true;
                    break;
                }
            }
        }
    } catch (const SingularSystem&) {
        out.exited = true;
    } catch (const NumericalFailure&) {
        out.failed = true;
    }
    return out;
}

CltReport run_clt(const ExperimentConfig& cfg, const Progress& progress) {
    validate(cfg);
    CltReport rep;
    const std::size_t n = cfg.ensemble.n_paths;
    for (double eps : cfg.physics.eps) {
        if (!(eps > 0.0)) throw ConfigError("clt needs positive eps values");
        std::vector<CltPath> paths(n);
        parallel_for(n, thread_count(cfg), [&](std::size_t p) { paths[p] = clt_path(cfg, eps, p); });
        CltRow row;
        row.eps = eps;
        for (const auto& p : paths) {
            if (p.failed) {
                ++row.failed;
                continue;
            }
            ++row.paths;
            if (p.exited) ++row.exits;
            row.eta_err += p.eta_err;
            row.eta_tilde_err += p.eta_tilde_err;
            row.z_err += p.z_err;
            row.b_err += p.b_err;
            row.y_err += p.y_err;
            row.a_sup += p.a_sup;
            row.c_sq += p.c_sq;
            row.eta_l2_4 += p.eta_l2_4;
        }
        if (row.failed * 100 > n) throw NumericalFailure("clt: more than 1% of paths failed at eps = " + std::to_string(eps));
        if (row.paths) {
            double k = static_cast<double>(row.paths);
            row.eta_err /= k;
            row.eta_tilde_err /= k;
            row.z_err /= k;
            row.b_err /= k;
            row.y_err /= k;
            row.a_sup /= k;
            row.c_sq /= k;
            row.eta_l2_4 /= k;
        }
        std::ostringstream os;
        os << "clt eps=" << eps << " E sup|eta^eps - eta| = " << row.eta_err << " (exits " << row.exits << ")";
        say(progress, os.str());
        rep.rows.push_back(row);
    }

    rep.eta_decreasing = true;
    rep.coefficients_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1];
        const auto& b = rep.rows[i];
        if (!(b.eta_err < a.eta_err)) rep.eta_decreasing = false;
        if (!(b.z_err < a.z_err && b.b_err < a.b_err && b.a_sup < a.a_sup)) rep.coefficients_decreasing = false;
        rep.eta_ratios.push_back(b.eta_err > 0.0 ? a.eta_err / b.eta_err : 0.0);
    }
    std::vector<double> x, y;
    for (const auto& r : rep.rows) {
        x.push_back(r.eps * r.eps);
        y.push_back(r.c_sq);
    }
    rep.c_fit = linear_fit(x, y);
    return rep;
}

// ---- diffusion ----------------------------------------------------------

FrameStencil parse_stencil(const std::string& s) {
    if (s == "fourier") return FrameStencil::fourier;
    if (s == "fd4") return FrameStencil::fd4;
    if (s == "fd6") return FrameStencil::fd6;
    throw ConfigError("unknown stencil '" + s + "'");
}

WeightedFrame frame_from_config(const ExperimentConfig& cfg) {
    const double c0 = cfg.physics.c0;
    const double a = cfg.frame.a_fraction * std::sqrt(c0 / 3.0);
    return build_weighted_frame(c0, a, Grid(cfg.frame.L, cfg.frame.N), parse_stencil(cfg.frame.stencil));
}

DiffusionReport run_diffusion(const ExperimentConfig& cfg, const Progress& progress) {
    validate(cfg);
    DiffusionReport rep;
    const Kernel kernel = make_kernel(cfg.kernel);
    rep.model = sigma_model(kernel, cfg.physics.c0, frame_from_config(cfg));
    rep.w1w2_rate = rep.model.w1w2_rate;
    PeakOptions opts;
    opts.hermite_order = cfg.diffusion.hermite_order;
    opts.mc_samples = cfg.diffusion.mc_samples;
    opts.seed = cfg.ensemble.seed;
    const double eps = cfg.diffusion.eps;
    rep.fit = exponent_fit(rep.model, eps, log_spaced(cfg.diffusion.t_min, cfg.diffusion.t_max, cfg.diffusion.n_t), opts);
    rep.slope_in_band = rep.fit.slope >= -1.35 && rep.fit.slope <= -1.15;
    rep.eps_scaling_in_band = rep.fit.eps_scaling >= -0.55 && rep.fit.eps_scaling <= -0.45;
    if (cfg.diffusion.montecarlo_check) {
        rep.mc_checked = true;
        rep.quad_at_mc_t = peak_expectation(rep.model, eps, cfg.diffusion.mc_t, PeakMethod::quadrature, opts);
        rep.mc_at_mc_t = peak_expectation(rep.model, eps, cfg.diffusion.mc_t, PeakMethod::montecarlo, opts);
    }
    rep.tail_violation_10 = tail_bound_violation(rep.model, eps, 10.0);
    rep.tail_violation_100 = tail_bound_violation(rep.model, eps, 100.0);
    std::ostringstream os;
    os << "diffusion slope " << rep.fit.slope << " eps scaling " << rep.fit.eps_scaling << " K0 " << rep.fit.K0;
    say(progress, os.str());
    return rep;
}

// ---- single-path drivers -----------------------------------------------

SimulateResult run_simulate(const ExperimentConfig& cfg, std::uint64_t path) {
    const Grid grid(cfg.grid.L, cfg.grid.N);
    const Kernel kernel = make_kernel(cfg.kernel);
    const double eps = cfg.physics.eps.front();
    SkdvSolver solver(grid);
    SkdvState s = make_state(soliton(cfg.physics.c0, grid), eps, 0.0,
                             NoiseState(kernel, grid, cfg.ensemble.seed, path));
    SimulateResult out;
    solver.run(
        s, cfg.integration.T, cfg.integration.dt,
        [&](const SkdvState& st, std::size_t) {
            out.snapshots.push_back({st.t, st.eps, st.u});
            out.t.push_back(st.t);
            out.mass.push_back(mass(st.u));
            out.energy.push_back(energy(st.u));
            out.max_abs.push_back(st.u.max_abs());
            return true;
        },
        cfg.integration.stride, cfg.integration.substeps);
    return out;
}

std::vector<TrackRow> run_track(const ExperimentConfig& cfg, std::uint64_t path) {
    const Grid grid(cfg.grid.L, cfg.grid.N);
    const Kernel kernel = make_kernel(cfg.kernel);
    const double c0 = cfg.physics.c0;
    const double eps = cfg.physics.eps.front();
    const double dt = cfg.integration.dt;
    const std::size_t steps = step_count(cfg);

    ModulationTracker tracker(grid, kernel, {c0, cfg.physics.alpha, eps});
    TrajectoryTracker tt(tracker, {c0, 0.0}, 0.0);
    SkdvSolver solver(grid);
    LimitSystem sys(grid, c0);
    NoiseState noise(kernel, grid, cfg.ensemble.seed, path);
    SkdvState s = make_state(soliton(c0, grid), eps, 0.0, noise);
    LimitState ls = make_limit_state(noise);
    std::vector<double> lambda;

    tt.observe(s.u, 0.0);
    lambda.push_back(0.0);
    for (std::size_t n = 1; n <= steps && !tt.exited(); ++n) {
        // lab frame for u; the limit system sees the same noise moved with the soliton
        Field dW = noise.sample_increment(dt, 0.0, cfg.integration.substeps);
        solver.step(s, dt, dW);
        sys.step(ls, dt, translate(dW, c0 * (s.t - dt)));
        if (n % cfg.integration.stride == 0 || n == steps) {
            tt.observe(s.u, s.t);
            lambda.push_back(ls.lambda);
        }
    }
    auto refined = refine_center(tt.series(), lambda, eps);
    std::vector<TrackRow> rows;
    for (std::size_t i = 0; i < tt.series().size(); ++i) {
        const auto& st = tt.series()[i];
        double scale = eps > 0.0 ? eps : 1.0;
        rows.push_back({st.t, st.c, st.x, refined[i].x_refined, scale * norm_l2(st.eta), st.remainder_h1, st.exited});
    }
    return rows;
}

std::vector<LimitRow> run_limit(const ExperimentConfig& cfg, std::uint64_t path) {
    const Grid grid(cfg.grid.L, cfg.grid.N);
    const Kernel kernel = make_kernel(cfg.kernel);
    const double c0 = cfg.physics.c0;
    LimitSystem sys(grid, c0);
    LimitState ls = make_limit_state(NoiseState(kernel, grid, cfg.ensemble.seed, path));
    const std::size_t steps = step_count(cfg);
    std::vector<LimitRow> rows;
    auto record = [&] {
        rows.push_back({ls.t, ls.lambda, norm_l2(ls.eta), inner(ls.eta, sys.phi()), inner(ls.eta, sys.dphi())});
    };
    record();
    for (std::size_t n = 1; n <= steps; ++n) {
        sys.step(ls, cfg.integration.dt, cfg.integration.substeps);
        if (!ls.eta.all_finite()) throw NumericalFailure("limit system produced non-finite values", ls.t);
        if (n % cfg.integration.stride == 0 || n == steps) record();
    }
    return rows;
}

SemigroupResult run_semigroup(const ExperimentConfig& cfg) {
    SemigroupResult r;
    WeightedFrame frame = frame_from_config(cfg);
    r.a = frame.a;
    r.biorthogonality = frame.biorthogonality_error();
    r.projection_error = (frame.P * frame.P - frame.P).cwiseAbs().maxCoeff();
    r.spectrum = frame_spectrum(frame);
    r.decay = semigroup_decay(frame, cfg.frame.decay_samples, cfg.frame.decay_T, cfg.ensemble.seed);
    OuOptions o;
    o.T = cfg.frame.ou_T;
    o.dt = cfg.frame.ou_dt;
    o.n_paths = cfg.frame.ou_paths;
    o.seed = cfg.ensemble.seed;
    r.ou = ou_evolve(frame, make_kernel(cfg.kernel), o);
    return r;
}

// ---- dispatcher -----------------------------------------------------------

std::vector<std::string> run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                        const Progress& progress) {
    validate(cfg);
    namespace fs = std::filesystem;
    fs::path dir(out_dir);
    fs::create_directories(dir);
    std::vector<std::string> files;
    auto add = [&](const std::string& name) {
        files.push_back(name);
        return dir / name;
    };

    if (cfg.kind == "simulate") {
        SimulateResult r = run_simulate(cfg);
        write_snapshots_binary((dir / "snapshots.bin").string(), r.snapshots);
        files.push_back("snapshots.bin");
        Csv csv(add("invariants.csv"), "t,mass,energy,max_abs");
        for (std::size_t i = 0; i < r.t.size(); ++i) csv.row(r.t[i], r.mass[i], r.energy[i], r.max_abs[i]);
    } else if (cfg.kind == "track") {
        auto rows = run_track(cfg);
        Csv csv(add("track.csv"), "t,c,x,x_refined,eta_l2,eta_h1,exited");
        for (const auto& r : rows) csv.row(r.t, r.c, r.x, r.x_refined, r.eta_l2, r.eta_h1, r.exited ? 1 : 0);
    } else if (cfg.kind == "limit") {
        auto rows = run_limit(cfg);
        Csv csv(add("limit.csv"), "t,lambda,eta_l2,ortho_phi,ortho_dphi");
        for (const auto& r : rows) csv.row(r.t, r.lambda, r.eta_l2, r.ortho_phi, r.ortho_dphi);
    } else if (cfg.kind == "semigroup") {
        SemigroupResult r = run_semigroup(cfg);
        {
            Csv csv(add("spectrum.csv"), "re,im");
            for (Eigen::Index i = 0; i < r.spectrum.size(); ++i) csv.row(r.spectrum(i).real(), r.spectrum(i).imag());
        }
        {
            Csv csv(add("decay.csv"), "sample,t,h1_norm");
            for (std::size_t s = 0; s < r.decay.norms.size(); ++s)
                for (std::size_t i = 0; i < r.decay.times.size(); ++i) csv.row(s, r.decay.times[i], r.decay.norms[s][i]);
        }
        {
            Csv csv(add("ou.csv"), "t,path_h1,empirical_trace,max_p_component");
            for (std::size_t i = 0; i < r.ou.t.size(); ++i)
                csv.row(r.ou.t[i], r.ou.path_h1[i], r.ou.empirical_trace[i], r.ou.max_p_component[i]);
        }
        {
            Csv csv(add("ou_exact.csv"), "t,trace");
            for (std::size_t i = 0; i < r.ou.exact_t.size(); ++i) csv.row(r.ou.exact_t[i], r.ou.exact_trace[i]);
        }
        json j{{"a", r.a},
               {"biorthogonality_error", r.biorthogonality},
               {"projection_error", r.projection_error},
               {"decay_rate", r.decay.rate},
               {"decay_rates", r.decay.rates},
               {"commutation_error", r.decay.commutation_error},
               {"bound_norm", r.ou.bound_norm},
               {"stationary_trace", r.ou.exact_trace.empty() ? 0.0 : r.ou.exact_trace.back()}};
        write_json(add("summary.json"), j);
    } else if (cfg.kind == "exit-time") {
        ExitTimeReport r = run_exit_time(cfg, progress);
        Csv csv(add("exit_time.csv"), "eps,paths,exits,newton_failures,failed,p_hat,ci_lo,ci_hi,mean_tau");
        for (const auto& row : r.rows)
            csv.row(row.eps, row.paths, row.exits, row.newton_failures, row.failed, row.p_hat, row.ci.lo, row.ci.hi,
                    safe(row.mean_tau));
        json j{{"slope", r.fit.slope},
               {"intercept", r.fit.intercept},
               {"r2", r.fit.r2},
               {"points", r.fit.points},
               {"informative", r.informative},
               {"message", r.message}};
        write_json(add("summary.json"), j);
    } else if (cfg.kind == "clt") {
        CltReport r = run_clt(cfg, progress);
        Csv csv(add("clt.csv"), "eps,paths,exits,failed,eta_err,eta_tilde_err,z_err,b_err,y_err,a_sup,c_sq,eta_l2_4");
        for (const auto& row : r.rows)
            csv.row(row.eps, row.paths, row.exits, row.failed, row.eta_err, row.eta_tilde_err, row.z_err, row.b_err,
                    row.y_err, row.a_sup, row.c_sq, row.eta_l2_4);
        json j{{"eta_decreasing", r.eta_decreasing},
               {"coefficients_decreasing", r.coefficients_decreasing},
               {"eta_ratios", r.eta_ratios},
               {"c_slope", r.c_fit.slope},
               {"c_r2", r.c_fit.r2}};
        write_json(add("summary.json"), j);
    } else if (cfg.kind == "diffusion") {
        DiffusionReport r = run_diffusion(cfg, progress);
        Csv csv(add("peak.csv"), "t,peak,bound,clipped_mass");
        for (std::size_t i = 0; i < r.fit.t.size(); ++i) {
            double t = r.fit.t[i];
            csv.row(t, r.fit.peak[i], r.fit.K0 / std::sqrt(cfg.diffusion.eps) * std::pow(t, -1.25), r.fit.clipped[i]);
        }
        json j{{"sigma11", r.model.sigma11},
               {"sigma12", r.model.sigma12},
               {"sigma22", r.model.sigma22},
               {"phi_dcphi", r.model.phi_dcphi},
               {"theta1", r.model.theta1},
               {"theta2", r.model.theta2},
               {"kernel", r.model.kernel},
               {"frame", r.model.frame},
               {"w1w2_rate", r.w1w2_rate},
               {"slope", r.fit.slope},
               {"r2", r.fit.r2},
               {"eps_scaling", r.fit.eps_scaling},
               {"K0", r.fit.K0},
               {"normalized_nonincreasing", r.fit.normalized_nonincreasing},
               {"slope_in_band", r.slope_in_band},
               {"eps_scaling_in_band", r.eps_scaling_in_band},
               {"tail_violation_t10", r.tail_violation_10},
               {"tail_violation_t100", r.tail_violation_100}};
        if (r.mc_checked) {
            j["mc_t"] = cfg.diffusion.mc_t;
            j["quadrature_peak"] = r.quad_at_mc_t.value;
            j["montecarlo_peak"] = r.mc_at_mc_t.value;
            j["montecarlo_std_error"] = r.mc_at_mc_t.std_error;
        }
        write_json(add("summary.json"), j);
    } else {
        throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
    }
    return files;
}

}  // namespace skdv
