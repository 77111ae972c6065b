#include "skdv/ensemble.hpp"
#include "skdv/experiments.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace skdv;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small(const std::string& kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.grid.N = 256;
    c.integration.T = 0.2;
    c.integration.dt = 2e-3;
    c.integration.stride = 10;
    c.ensemble.n_paths = 4;
    c.ensemble.threads = 2;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("skdv_unit_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Stats, WilsonInterval) {
    auto ci = wilson_interval(0, 10);
    EXPECT_NEAR(ci.lo, 0.0, 1e-12);
    EXPECT_NEAR(ci.hi, 0.2775, 1e-4);
    auto mid = wilson_interval(50, 100);
    EXPECT_NEAR(mid.lo + mid.hi, 1.0, 1e-12);
    EXPECT_NEAR(mid.lo, 0.4038, 1e-4);
}

TEST(Stats, LinearFitExact) {
    auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-12);
    EXPECT_NEAR(f.intercept, 1.0, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.points, 4u);
    EXPECT_EQ(linear_fit({1}, {1}).points, 1u);
    EXPECT_EQ(linear_fit({1}, {1}).slope, 0.0);
    EXPECT_THROW(linear_fit({1, 2}, {1}), std::invalid_argument);
}

TEST(Ensemble, ParallelForCoversAllIndices) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Ensemble, ParallelForRethrows) {
    std::atomic<int> ran{0};
    EXPECT_THROW(parallel_for(64, 3, [&](std::size_t i) {
        ++ran;
        if (i == 7) throw std::runtime_error("boom");
    }), std::runtime_error);
    EXPECT_GE(resolve_threads(0), 1);
}

TEST(ExitTime, NoNoiseNeverExits) {
    auto c = small("exit-time");
    auto p = exit_time_path(c, 0.0, 0);
    EXPECT_FALSE(p.exited);
    EXPECT_FALSE(p.failed);
}

TEST(ExitTime, StrongNoiseExits) {
    auto c = small("exit-time");
    c.physics.alpha = 0.05;
    auto p = exit_time_path(c, 0.5, 0);
    EXPECT_TRUE(p.exited);
    EXPECT_GT(p.tau, 0.0);
    EXPECT_LE(p.tau, c.integration.T + 1e-12);
}

TEST(ExitTime, ThreadCountDoesNotChangeResult) {
    auto c = small("exit-time");
    c.physics.eps = {0.3, 0.2};
    c.physics.alpha = 0.1;
    c.ensemble.threads = 1;
    auto a = run_exit_time(c);
    c.ensemble.threads = 3;
    auto b = run_exit_time(c);
    ASSERT_EQ(a.rows.size(), 2u);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].exits, b.rows[i].exits);
        EXPECT_EQ(a.rows[i].paths, b.rows[i].paths);
        if (a.rows[i].exits > 0) EXPECT_DOUBLE_EQ(a.rows[i].mean_tau, b.rows[i].mean_tau);
        EXPECT_LE(a.rows[i].ci.lo, a.rows[i].p_hat);
        EXPECT_GE(a.rows[i].ci.hi, a.rows[i].p_hat);
    }
}

TEST(Clt, SmallRunIsConsistent) {
    auto c = small("clt");
    c.physics.eps = {0.02, 0.01};
    c.ensemble.n_paths = 2;
    auto r = run_clt(c);
    ASSERT_EQ(r.rows.size(), 2u);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.paths + row.failed, 2u);
        EXPECT_TRUE(std::isfinite(row.eta_err));
        EXPECT_GE(row.eta_err, 0.0);
    }
    EXPECT_EQ(r.eta_ratios.size(), 1u);
}

TEST(Clt, CouplingGapShrinksWithStep) {
    // with eps -> 0 the two systems differ only by their time discretizations
    auto c = small("clt");
    c.grid.N = 512;
    c.integration.T = 0.1;
    double err[2];
    for (int i = 0; i < 2; ++i) {
        c.integration.dt = i == 0 ? 2e-3 : 1e-3;
        c.integration.stride = i == 0 ? 5 : 10;
        auto p = clt_path(c, 1e-4, 0);
        EXPECT_FALSE(p.exited);
        EXPECT_LT(p.c_sq, 1e-8);
        err[i] = p.eta_err;
    }
    EXPECT_LT(err[1], 1e-2);
    EXPECT_GT(err[0] / err[1], 2.5);
}

TEST(Runner, SimulateIsDeterministic) {
    auto c = small("simulate");
    c.physics.eps = {0.1};
    auto d1 = scratch("sim1"), d2 = scratch("sim2");
    auto files = run_experiment(c, d1.string());
    run_experiment(c, d2.string());
    ASSERT_FALSE(files.empty());
    for (const auto& f : files) {
        ASSERT_TRUE(fs::exists(d1 / f)) << f;
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
    }
    auto snaps = read_snapshots_binary((d1 / "snapshots.bin").string());
    EXPECT_EQ(snaps.size(), 11u);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Runner, TrackAndLimitProduceRows) {
    auto c = small("track");
    auto rows = run_track(c);
    ASSERT_FALSE(rows.empty());
    EXPECT_NEAR(rows.front().c, 1.0, 1e-6);
    auto lim = run_limit(c);
    ASSERT_FALSE(lim.empty());
    for (const auto& r : lim) {
        EXPECT_LT(std::abs(r.ortho_phi), 1e-9);
        EXPECT_LT(std::abs(r.ortho_dphi), 1e-9);
    }
}

TEST(Runner, DiffusionWritesSummary) {
    auto c = small("diffusion");
    c.diffusion.n_t = 3;
    c.diffusion.t_max = 1000.0;
    c.diffusion.montecarlo_check = false;
    auto d = scratch("diff");
    auto files = run_experiment(c, d.string());
    EXPECT_TRUE(fs::exists(d / "peak.csv"));
    EXPECT_TRUE(fs::exists(d / "summary.json"));
    EXPECT_NE(std::find(files.begin(), files.end(), "summary.json"), files.end());
    fs::remove_all(d);
}
