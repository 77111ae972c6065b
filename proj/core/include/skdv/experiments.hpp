#pragma once

#include "skdv/config.hpp"
#include "skdv/diffusion.hpp"
#include "skdv/modulation.hpp"
#include "skdv/snapshot_io.hpp"
#include "skdv/weighted_frame.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace skdv {

using Progress = std::function<void(const std::string&)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for k successes out of n.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---- exit time ----------------------------------------------------------

struct PathOutcome {
    bool exited = false;
    bool newton_failed = false;  // counted as an exit
    bool failed = false;         // non-finite trajectory, excluded
    double tau = std::numeric_limits<double>::quiet_NaN();
    std::string reason;
};

struct ExitTimeRow {
    double eps = 0.0;
    std::size_t paths = 0;   // valid paths
    std::size_t exits = 0;   // including Newton losses
    std::size_t newton_failures = 0;
    std::size_t failed = 0;  // excluded
    double p_hat = 0.0;
    Interval ci;
    double mean_tau = std::numeric_limits<double>::quiet_NaN();
};

struct ExitTimeReport {
    std::vector<ExitTimeRow> rows;
    LinearFit fit;  // log p_hat against eps^-2 over rows with exits
    bool informative = false;
    std::string message;
};

// One trajectory from phi_{c0}, tracked in the frame moving at c0.
PathOutcome exit_time_path(const ExperimentConfig& cfg, double eps, std::uint64_t path);
ExitTimeReport run_exit_time(const ExperimentConfig& cfg, const Progress& progress = {});

// ---- central limit theorem -----------------------------------------------

// Sup over t <= T ^ tau of the coupled differences along one path.
struct CltPath {
    double eta_err = 0.0;        // |eta^eps - eta|_{L2}
    double eta_tilde_err = 0.0;  // |eta~^eps - (eta - lambda phi')|_{L2}
    double z_err = 0.0;          // |Phi* z^eps - z|_{L2}
    double b_err = 0.0;          // |Phi* b^eps - b|_{L2}
    double y_err = 0.0;          // |y^eps - y(eta)|
    double a_sup = 0.0;          // |a^eps|
    double c_sq = 0.0;           // |c^eps - c0|^2
    double eta_l2_4 = 0.0;       // |eta^eps|_{L2}^4
    bool exited = false;
    bool failed = false;
};

struct CltRow {
    double eps = 0.0;
    std::size_t paths = 0;
    std::size_t exits = 0;
    std::size_t failed = 0;
    double eta_err = 0.0;
    double eta_tilde_err = 0.0;
    double z_err = 0.0;
    double b_err = 0.0;
    double y_err = 0.0;
    double a_sup = 0.0;
    double c_sq = 0.0;
    double eta_l2_4 = 0.0;
};

struct CltReport {
    std::vector<CltRow> rows;  // eps descending
    bool eta_decreasing = false;
    bool coefficients_decreasing = false;  // z, b and a together
    std::vector<double> eta_ratios;        // err(eps_i) / err(eps_{i+1})
    LinearFit c_fit;                       // E sup |c - c0|^2 against eps^2
};

CltPath clt_path(const ExperimentConfig& cfg, double eps, std::uint64_t path);
CltReport run_clt(const ExperimentConfig& cfg, const Progress& progress = {});

// ---- diffusion -----------------------------------------------------------

struct DiffusionReport {
    SigmaModel model;
    ExponentFit fit;
    double w1w2_rate = 0.0;
    bool mc_checked = false;
    PeakResult quad_at_mc_t;
    PeakResult mc_at_mc_t;
    double tail_violation_10 = 0.0;
    double tail_violation_100 = 0.0;
    bool slope_in_band = false;        // [-1.35, -1.15]
    bool eps_scaling_in_band = false;  // [-0.55, -0.45]
};

DiffusionReport run_diffusion(const ExperimentConfig& cfg, const Progress& progress = {});

// ---- single-path drivers -----------------------------------------------

struct SimulateResult {
    std::vector<Snapshot> snapshots;
    std::vector<double> t, mass, energy, max_abs;
};

SimulateResult run_simulate(const ExperimentConfig& cfg, std::uint64_t path = 0);

struct TrackRow {
    double t = 0.0, c = 0.0, x = 0.0, x_refined = 0.0, eta_l2 = 0.0, eta_h1 = 0.0;
    bool exited = false;
};

std::vector<TrackRow> run_track(const ExperimentConfig& cfg, std::uint64_t path = 0);

struct LimitRow {
    double t = 0.0, lambda = 0.0, eta_l2 = 0.0, ortho_phi = 0.0, ortho_dphi = 0.0;
};

std::vector<LimitRow> run_limit(const ExperimentConfig& cfg, std::uint64_t path = 0);

struct SemigroupResult {
    double a = 0.0;
    double biorthogonality = 0.0;
    double projection_error = 0.0;  // |P^2 - P|
    Eigen::VectorXcd spectrum;
    DecayReport decay;
    OuResult ou;
};

SemigroupResult run_semigroup(const ExperimentConfig& cfg);

FrameStencil parse_stencil(const std::string& s);
WeightedFrame frame_from_config(const ExperimentConfig& cfg);

// Runs cfg.kind, writes CSV/JSON into out_dir and returns the file names written (relative to out_dir).
std::vector<std::string> run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                        const Progress& progress = {});

}  // namespace skdv
