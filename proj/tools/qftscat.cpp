#include "qftscat/cli.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("qftscat");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("QFTSCAT_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

    CLI::App app{"Finite-time scattering pairings, transfer-function fits and Gram diagnostics"};
    app.set_version_flag("--version", std::string(qftscat::kVersion));
    app.require_subcommand(1);

    qftscat::RunOptions opts;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"amplitude", "S-matrix amplitude of in/out packets, with a refinement check"},
        {"converge", "finite-time pairing versus t, window averages and extrapolated limit"},
        {"fit", "sample the bounded-energy region and fit a symmetric transfer polynomial"},
        {"gram", "Gram matrix, inertia, metric operator and seminorm constant of a packet family"},
        {"truncate-demo", "round-trip errors of truncation and untruncation on random kernels"},
        {"pvdemo", "principal-value limit of e^{i xi t}/xi against a Gaussian"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->callback([&opts, &seed, &threads, sub, name = name] {
            opts.command = name;
            if (sub->count("--seed")) opts.seed = seed;
            if (sub->count("--threads")) opts.threads = threads;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qftscat::kExitUsage;
    }
    return qftscat::run_command(opts);
}
