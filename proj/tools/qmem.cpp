#include "qmem/parallel.hpp"
#include "qmem/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Memory-loss criteria for open quantum systems"};
    app.require_subcommand(1);

    qmem::Overrides ov;
    std::string config;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string output, format;
    double epsilon = 0, delta = 0;
    long long samples = 0;

    for (const char* sub : {"criteria-scan", "depol-threshold", "decoupling", "converse", "lightcone", "recurrence",
                            "absence", "run"}) {
        auto* cmd = app.add_subcommand(sub, std::string(sub) == "run" ? "Run the experiment named in a config file"
                                                                      : "Run the " + std::string(sub) + " experiment");
        auto* cfg = cmd->add_option("config", config, "JSON config (\"schema\": 1)")->check(CLI::ExistingFile);
        if (std::string(sub) == "run") cfg->required();
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--output,-o", output, "Output file (.csv or .json)");
        cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--epsilon", epsilon, "Smoothing parameter");
        cmd->add_option("--delta", delta, "Distance threshold");
        cmd->add_option("--samples", samples, "Monte Carlo sample count");
        cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qmem::exit_validation;
    }

    CLI::App* cmd = app.get_subcommands().front();
    if (cmd->count("--seed")) ov.seed = seed;
    if (cmd->count("--output")) ov.output = output;
    if (cmd->count("--format")) ov.format = format;
    if (cmd->count("--epsilon")) ov.epsilon = epsilon;
    if (cmd->count("--delta")) ov.delta = delta;
    if (cmd->count("--samples")) ov.samples = samples;
    qmem::set_thread_count(threads);

    const std::string name = cmd->get_name();
    if (name == "run") return qmem::run(std::filesystem::path(config), ov, std::cout, std::cerr);
    std::optional<std::filesystem::path> path;
    if (!config.empty()) path = config;
    return qmem::run(qmem::experiment_for_subcommand(name), path, ov, std::cout, std::cerr);
}
