#include <iostream>
#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "jmgt/experiments.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
    // field temporaries are large; reuse heap pages instead of fresh mmaps
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    CLI::App app{"JMGT simulator and verification lab"};
    app.require_subcommand(1);
    std::string config, out;
    std::uint64_t seed = 0;
    int stride = 0;
    for (const char* name : {"simulate", "symbol", "verify-energy", "scan-smallness", "convergence"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides [output] directory)");
        sub->add_option("--seed", seed, "random seed (overrides [experiment] seed)");
        sub->add_option("--stride", stride, "report every K steps (overrides [output] stride)")
            ->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : jmgt::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();

    jmgt::RunSpec spec;
    try {
        spec = jmgt::load_config(config);
    } catch (const jmgt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return jmgt::kExitConfig;
    }
    if (sub->count("--out")) spec.output.directory = out;
    if (sub->count("--seed")) spec.experiment.seed = seed;
    if (sub->count("--stride")) spec.output.stride = stride;

    jmgt::CommandResult r;
    try {
        r = jmgt::run_command(command, spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    (r.exit_code == 0 ? std::cout : std::cerr) << command << ": " << r.message << "\n";
    for (const auto& o : r.outputs) std::cout << "  wrote " << o << "\n";
    return r.exit_code;
}
