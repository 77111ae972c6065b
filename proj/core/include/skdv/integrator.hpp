#pragma once

#include "skdv/grid.hpp"
#include "skdv/noise.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace skdv {

// du + (u_xxx + (u^2/2)_x) dt = eps u dW, optionally in a frame moving at frame_speed.
struct SkdvState {
    Field u;
    double t = 0.0;
    double frame_speed = 0.0;
    double eps = 0.0;
    NoiseState noise;
};

SkdvState make_state(Field u0, double eps, double frame_speed, NoiseState noise);

enum class NonlinearScheme { midpoint, rk4 };

class SkdvSolver {
public:
    explicit SkdvSolver(Grid grid, NonlinearScheme scheme = NonlinearScheme::midpoint, double blowup = 1e6);

    const Grid& grid() const noexcept { return grid_; }
    NonlinearScheme scheme() const noexcept { return scheme_; }

    // Called with the state just before the noise kick and the increment used.
    using StepHook = std::function<void(const Field& pre_noise, const Field& dW, double dt)>;
    void set_step_hook(StepHook hook) { hook_ = std::move(hook); }

    // Strang step with the increment drawn from state.noise (translated with the frame).
    void step(SkdvState& s, double dt, unsigned substeps = 1);
    // Strang step with an externally supplied increment already expressed in the state's frame.
    void step(SkdvState& s, double dt, const Field& dW);
    // The deterministic half of a step: nonlinear / linear / nonlinear.
    void deterministic_step(Field& u, double dt, double frame_speed);

    // Observer gets (state, step count); returning false stops the run.
    using Observer = std::function<bool(const SkdvState&, std::size_t)>;
    // Steps to time T. With stride > 0 the observer sees step 0, every stride-th
    // step and the final state; with stride 0 only the final state.
    void run(SkdvState& s, double T, double dt, const Observer& observer = {}, std::size_t stride = 0,
             unsigned substeps = 1);

private:
    void nonlinear(const std::vector<cplx>& in, std::vector<cplx>& out);
    void nonlinear_half(double h);
    void linear(double dt, double frame_speed);
    void noise_kick(SkdvState& s, double dt, const double* dW);
    void check(const SkdvState& s, double t_prev) const;

    Grid grid_;
    NonlinearScheme scheme_;
    double blowup_;
    StepHook hook_;
    std::vector<double> mask_;
    std::vector<cplx> uh_, k1_, k2_, k3_, k4_, tmp_;
    std::vector<double> work_;
    Field dw_;
};

// One step with a throwaway solver; prefer SkdvSolver in loops.
SkdvState step(SkdvState state, double dt);
SkdvState run(SkdvState state, double T, double dt, const SkdvSolver::Observer& observer = {},
              std::size_t stride = 0);

struct BalanceResidual {
    double mass = 0.0;
    double energy = 0.0;
};

// Accumulates the discrete Ito mass and energy balances along a path:
//   dm = eps (u^2, dW) + eps^2 |k|^2 m dt
//   dH = eps (u_x, (u dW)_x) - eps/2 (u^3, dW)
//        + eps^2/2 dt (|k|^2 |u_x|^2 + |k'|^2 |u|^2 - |k|^2 int u^3)
class ItoBalance {
public:
    ItoBalance(const Field& u0, double eps, const Kernel& kernel);

    void record(const Field& pre_noise, const Field& dW, double dt);
    BalanceResidual residual(const Field& u_final) const;

    double predicted_mass_change() const noexcept { return dm_; }
    double predicted_energy_change() const noexcept { return dh_; }
    double quadratic_variation_term() const noexcept { return qv_mass_; }

private:
    double eps_;
    double k2_ = 0.0;
    double kx2_ = 0.0;
    double m0_ = 0.0;
    double h0_ = 0.0;
    double dm_ = 0.0;
    double dh_ = 0.0;
    double qv_mass_ = 0.0;
};

struct TrajectoryRecord {
    Field initial;
    Field final;
    double eps = 0.0;
    std::vector<double> dt;
    std::vector<Field> pre_noise;
    std::vector<Field> increments;
};

BalanceResidual ito_balance_residual(const TrajectoryRecord& record, const Kernel& kernel);

}  // namespace skdv
