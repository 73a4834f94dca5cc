#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ashjb/cli.hpp"
#include "ashjb/errors.hpp"

namespace {

const std::map<std::string, std::set<std::string>> kStageEmits{
    {"band", {"band", "summary"}},
    {"boundary", {"boundary", "summary"}},
    {"solve", {"field", "summary"}},
    {"values", {"values", "summary"}},
    {"screen", {"screening", "summary"}},
    {"simulate", {"simulate", "trajectories", "summary"}},
    {"compare", {"compare", "summary"}},
};

void set_threads(int flag_threads) {
    int n = flag_threads;
    if (n <= 0) {
        if (const char* env = std::getenv("ASHJB_THREADS")) n = std::atoi(env);
    }
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gap-belief HJB solver for contracting with adverse selection and moral hazard"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, preset = "dominated", output_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    int threads = 0;
    bool check = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "bundled configuration when --config is absent")
        ->check(CLI::IsMember({"dominated", "nondominated"}));
    app.add_option("--set", overrides, "override a config leaf, e.g. grid.n_time=200")->take_all();
    auto* seed_opt = app.add_option("--seed", seed, "simulation seed");
    app.add_option("--output-dir", output_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (default: ASHJB_THREADS or all cores)");
    app.add_flag("--check-only", check, "re-run the invariant checks on existing outputs without solving");

    std::vector<std::string> names{"band", "boundary", "solve", "values", "screen", "simulate", "compare", "run"};
    for (const auto& n : names) app.add_subcommand(n, n == "run" ? "full pipeline, outputs per config.emit" : "run the " + n + " stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ashjb::kExitConfig;
    }
    set_threads(threads);

    const std::string stage = app.get_subcommands().front()->get_name();
    ashjb::RunConfig rc;
    try {
        rc = config_path.empty() ? ashjb::parse_config(ashjb::preset_config(preset), overrides)
                                 : ashjb::load_config(config_path, overrides);
    } catch (const ashjb::ConfigError& e) {
        std::cerr << "config error at " << e.what() << "\n";
        return ashjb::kExitConfig;
    }
    if (!output_dir.empty()) rc.output_dir = output_dir;
    if (*seed_opt) rc.sim.seed = seed;
    if (stage != "run") rc.emit = kStageEmits.at(stage);

    const ashjb::RunResult r = check ? ashjb::check_only(rc, std::cerr) : ashjb::run(rc, std::cerr);
    for (const auto& path : r.outputs) std::cout << path << "\n";
    return r.exit_code;
}
