#pragma once

#include "skdv/noise.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace skdv {

struct GridConfig {
    double L = 100.0;
    std::size_t N = 512;
};

struct PhysicsConfig {
    double c0 = 1.0;
    std::vector<double> eps{0.1};  // sorted descending
    double alpha = 0.3;
};

struct KernelConfig {
    std::string shape = "gaussian";  // gaussian | sech
    double amplitude = 1.0;
    double width = 2.0;
};

struct IntegrationConfig {
    double dt = 1e-3;
    double T = 5.0;
    std::size_t stride = 10;  // integrator steps between snapshots / tracking
    unsigned substeps = 1;    // white-noise blocks per step
};

struct EnsembleConfig {
    std::size_t n_paths = 100;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: SKDV_THREADS or hardware concurrency
};

struct FrameConfig {
    double a_fraction = 0.5;  // a = a_fraction * sqrt(c0 / 3)
    double L = 80.0;
    std::size_t N = 512;
    std::string stencil = "fourier";  // fourier | fd4 | fd6
    double decay_T = 40.0;
    std::size_t decay_samples = 8;
    double ou_T = 80.0;
    double ou_dt = 0.25;
    std::size_t ou_paths = 64;
};

struct DiffusionConfig {
    double eps = 0.01;
    double t_min = 100.0;
    double t_max = 1e4;
    int n_t = 9;
    int hermite_order = 96;
    bool montecarlo_check = true;
    double mc_t = 100.0;
    int mc_samples = 200000;
};

struct ExperimentConfig {
    std::string kind = "simulate";  // simulate | track | limit | semigroup | exit-time | clt | diffusion
    GridConfig grid;
    PhysicsConfig physics;
    KernelConfig kernel;
    IntegrationConfig integration;
    EnsembleConfig ensemble;
    FrameConfig frame;
    DiffusionConfig diffusion;
    std::string output_dir = "out";
};

const std::vector<std::string>& experiment_kinds();

// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg, int indent = 2);
void validate(const ExperimentConfig& cfg);

// FNV-1a 64 of the compact canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

Kernel make_kernel(const KernelConfig& k);

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::string started;
    std::string finished;
    std::string kind;
    std::vector<std::uint64_t> seeds;  // per-path stream ids under the master seed
    std::uint64_t master_seed = 0;
    std::vector<std::string> files;
    std::string status = "ok";
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);
std::string timestamp_utc();
std::string version_string();

}  // namespace skdv
