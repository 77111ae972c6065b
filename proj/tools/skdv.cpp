// skdv: run one experiment from a JSON config.
// Exit codes: 0 ok, 2 bad usage or config, 3 numerical failure, 1 anything else.

#include "skdv/config.hpp"
#include "skdv/errors.hpp"
#include "skdv/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out;
    bool quiet = false;
};

skdv::ExperimentConfig load(const Overrides& o, const std::string& kind) {
    skdv::ExperimentConfig cfg = o.config.empty() ? skdv::ExperimentConfig{} : skdv::load_config(o.config);
    if (!kind.empty()) {
        if (!o.config.empty() && cfg.kind != kind)
            std::cerr << "note: config kind '" << cfg.kind << "' overridden by subcommand '" << kind << "'\n";
        cfg.kind = kind;
    }
    if (o.seed) cfg.ensemble.seed = *o.seed;
    if (o.threads) cfg.ensemble.threads = *o.threads;
    if (!o.out.empty()) cfg.output_dir = o.out;
    skdv::validate(cfg);
    return cfg;
}

int run(const Overrides& o, const std::string& kind) {
    const skdv::ExperimentConfig cfg = load(o, kind);
    skdv::RunManifest m;
    m.config_hash = skdv::config_hash(cfg);
    m.version = skdv::version_string();
    m.kind = cfg.kind;
    m.master_seed = cfg.ensemble.seed;
    const std::size_t n = (cfg.kind == "exit-time" || cfg.kind == "clt") ? cfg.ensemble.n_paths : 1;
    for (std::size_t p = 0; p < n; ++p) m.seeds.push_back(p);
    m.started = skdv::timestamp_utc();

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const std::string manifest = (fs::path(cfg.output_dir) / "manifest.json").string();
    skdv::Progress progress;
    if (!o.quiet) progress = [](const std::string& s) { std::cerr << s << '\n'; };
    {
        std::ofstream cfg_out(fs::path(cfg.output_dir) / "config.json");
        cfg_out << skdv::dump_config(cfg) << '\n';
    }
    try {
        m.files = skdv::run_experiment(cfg, cfg.output_dir, progress);
        m.files.push_back("config.json");
    } catch (const skdv::NumericalFailure& e) {
        m.status = std::string("numerical failure: ") + e.what();
        m.finished = skdv::timestamp_utc();
        skdv::write_manifest(manifest, m);
        throw;
    }
    m.finished = skdv::timestamp_utc();
    skdv::write_manifest(manifest, m);
    if (!o.quiet) std::cerr << "wrote " << m.files.size() << " files to " << cfg.output_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic KdV soliton experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", skdv::version_string());

    Overrides o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "JSON config file");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--threads", o.threads, "worker threads, 0 = all")->check(CLI::NonNegativeNumber);
        sub->add_option("-o,--out", o.out, "output directory");
        sub->add_flag("-q,--quiet", o.quiet, "no progress output");
    };

    std::string chosen;
    for (const auto& kind : skdv::experiment_kinds()) {
        auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
        add_common(sub);
        sub->callback([&chosen, kind] { chosen = kind; });
    }
    std::string to_validate;
    auto* val = app.add_subcommand("validate-config", "parse and check a config, print it with its hash");
    val->add_option("config", to_validate, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (val->parsed()) {
            const auto cfg = skdv::load_config(to_validate);
            std::cout << skdv::dump_config(cfg) << "\nhash " << skdv::config_hash(cfg) << '\n';
            return 0;
        }
        return run(o, chosen);
    } catch (const skdv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const skdv::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
