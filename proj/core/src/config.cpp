#include "skdv/config.hpp"

#include "skdv/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#ifndef SKDV_VERSION
#define SKDV_VERSION "unknown"
#endif

namespace skdv {

using nlohmann::json;

namespace {

// Reads obj[key] into out if present, rejecting keys outside `allowed`.
class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

json to_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
    j["physics"] = {{"c0", c.physics.c0}, {"eps", c.physics.eps}, {"alpha", c.physics.alpha}};
    j["kernel"] = {{"shape", c.kernel.shape}, {"amplitude", c.kernel.amplitude}, {"width", c.kernel.width}};
    j["integration"] = {{"dt", c.integration.dt},
                        {"T", c.integration.T},
                        {"stride", c.integration.stride},
                        {"substeps", c.integration.substeps}};
    j["ensemble"] = {{"n_paths", c.ensemble.n_paths}, {"seed", c.ensemble.seed}, {"threads", c.ensemble.threads}};
    j["frame"] = {{"a_fraction", c.frame.a_fraction}, {"L", c.frame.L},
                  {"N", c.frame.N},                   {"stencil", c.frame.stencil},
                  {"decay_T", c.frame.decay_T},       {"decay_samples", c.frame.decay_samples},
                  {"ou_T", c.frame.ou_T},             {"ou_dt", c.frame.ou_dt},
                  {"ou_paths", c.frame.ou_paths}};
    j["diffusion"] = {{"eps", c.diffusion.eps},
                      {"t_min", c.diffusion.t_min},
                      {"t_max", c.diffusion.t_max},
                      {"n_t", c.diffusion.n_t},
                      {"hermite_order", c.diffusion.hermite_order},
                      {"montecarlo_check", c.diffusion.montecarlo_check},
                      {"mc_t", c.diffusion.mc_t},
                      {"mc_samples", c.diffusion.mc_samples}};
    j["output_dir"] = c.output_dir;
    return j;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"simulate", "track", "limit", "semigroup",
                                                "exit-time", "clt", "diffusion"};
    return kinds;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    Reader top(j, "config");
    top.get("kind", c.kind);
    top.get("output_dir", c.output_dir);
    if (auto* g = top.child("grid")) {
        Reader r(*g, "grid");
        r.get("L", c.grid.L);
        r.get("N", c.grid.N);
        r.finish();
    }
    if (auto* p = top.child("physics")) {
        Reader r(*p, "physics");
        r.get("c0", c.physics.c0);
        r.get("eps", c.physics.eps);
        r.get("alpha", c.physics.alpha);
        r.finish();
    }
    if (auto* k = top.child("kernel")) {
        Reader r(*k, "kernel");
        r.get("shape", c.kernel.shape);
        r.get("amplitude", c.kernel.amplitude);
        r.get("width", c.kernel.width);
        r.finish();
    }
    if (auto* in = top.child("integration")) {
        Reader r(*in, "integration");
        r.get("dt", c.integration.dt);
        r.get("T", c.integration.T);
        r.get("stride", c.integration.stride);
        r.get("substeps", c.integration.substeps);
        r.finish();
    }
    if (auto* e = top.child("ensemble")) {
        Reader r(*e, "ensemble");
        r.get("n_paths", c.ensemble.n_paths);
        r.get("seed", c.ensemble.seed);
        r.get("threads", c.ensemble.threads);
        r.finish();
    }
    if (auto* f = top.child("frame")) {
        Reader r(*f, "frame");
        r.get("a_fraction", c.frame.a_fraction);
        r.get("L", c.frame.L);
        r.get("N", c.frame.N);
        r.get("stencil", c.frame.stencil);
        r.get("decay_T", c.frame.decay_T);
        r.get("decay_samples", c.frame.decay_samples);
        r.get("ou_T", c.frame.ou_T);
        r.get("ou_dt", c.frame.ou_dt);
        r.get("ou_paths", c.frame.ou_paths);
        r.finish();
    }
    if (auto* d = top.child("diffusion")) {
        Reader r(*d, "diffusion");
        r.get("eps", c.diffusion.eps);
        r.get("t_min", c.diffusion.t_min);
        r.get("t_max", c.diffusion.t_max);
        r.get("n_t", c.diffusion.n_t);
        r.get("hermite_order", c.diffusion.hermite_order);
        r.get("montecarlo_check", c.diffusion.montecarlo_check);
        r.get("mc_t", c.diffusion.mc_t);
        r.get("mc_samples", c.diffusion.mc_samples);
        r.finish();
    }
    top.finish();
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string dump_config(const ExperimentConfig& cfg, int indent) { return to_json(cfg).dump(indent); }

void validate(const ExperimentConfig& c) {
    const auto& kinds = experiment_kinds();
    require(std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end(), "unknown experiment kind '" + c.kind + "'");
    require(positive(c.grid.L), "grid.L must be positive");
    require(c.grid.N >= 16 && c.grid.N % 2 == 0, "grid.N must be even and at least 16");
    require(positive(c.physics.c0), "physics.c0 must be positive");
    require(positive(c.physics.alpha), "physics.alpha must be positive");
    require(!c.physics.eps.empty(), "physics.eps must not be empty");
    for (double e : c.physics.eps) require(std::isfinite(e) && e >= 0.0, "physics.eps entries must be non-negative");
    require(std::is_sorted(c.physics.eps.rbegin(), c.physics.eps.rend()), "physics.eps must be sorted descending");
    require(c.kernel.shape == "gaussian" || c.kernel.shape == "sech", "kernel.shape must be gaussian or sech");
    require(positive(c.kernel.amplitude), "kernel.amplitude must be positive");
    require(positive(c.kernel.width), "kernel.width must be positive");
    require(positive(c.integration.dt), "integration.dt must be positive");
    require(positive(c.integration.T), "integration.T must be positive");
    require(c.integration.dt <= c.integration.T, "integration.dt must not exceed integration.T");
    require(c.integration.stride >= 1, "integration.stride must be at least 1");
    require(c.integration.substeps >= 1, "integration.substeps must be at least 1");
    require(c.ensemble.n_paths >= 1, "ensemble.n_paths must be at least 1");
    require(c.ensemble.threads >= 0, "ensemble.threads must be non-negative");
    require(c.frame.a_fraction > 0.0 && c.frame.a_fraction < 1.0, "frame.a_fraction must lie in (0, 1)");
    require(positive(c.frame.L), "frame.L must be positive");
    require(c.frame.N >= 16 && c.frame.N % 2 == 0, "frame.N must be even and at least 16");
    require(c.frame.stencil == "fourier" || c.frame.stencil == "fd4" || c.frame.stencil == "fd6",
            "frame.stencil must be fourier, fd4 or fd6");
    require(positive(c.frame.decay_T) && positive(c.frame.ou_T) && positive(c.frame.ou_dt),
            "frame times must be positive");
    require(c.frame.decay_samples >= 1 && c.frame.ou_paths >= 1, "frame sample counts must be positive");
    require(positive(c.diffusion.eps), "diffusion.eps must be positive");
    require(positive(c.diffusion.t_min) && c.diffusion.t_max > c.diffusion.t_min,
            "diffusion needs 0 < t_min < t_max");
    require(c.diffusion.n_t >= 2, "diffusion.n_t must be at least 2");
    require(c.diffusion.hermite_order >= 8, "diffusion.hermite_order must be at least 8");
    require(positive(c.diffusion.mc_t) && c.diffusion.mc_samples >= 100, "diffusion Monte Carlo settings invalid");
    require(!c.output_dir.empty(), "output_dir must not be empty");
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::string s = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Kernel make_kernel(const KernelConfig& k) {
    if (k.shape == "gaussian") return Kernel::gaussian(k.amplitude, k.width);
    if (k.shape == "sech") return Kernel::sech(k.amplitude, k.width);
    throw ConfigError("unknown kernel shape '" + k.shape + "'");
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["kind"] = m.kind;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["master_seed"] = m.master_seed;
    j["path_seeds"] = m.seeds;
    j["files"] = m.files;
    j["status"] = m.status;
    return j.dump(2);
}

void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << manifest_json(m) << '\n';
}

std::string timestamp_utc() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string version_string() { return SKDV_VERSION; }

}  // namespace skdv
