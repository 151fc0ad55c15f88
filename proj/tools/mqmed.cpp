// mqmed: command-line front end: `mqmed run <config>`, `mqmed describe <config>`

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mqmed/cli/run.hpp"
#include "mqmed/cli/table_io.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Per-mode energy dissipation from Markovian rate equations"};
    app.set_version_flag("--version", std::string("mqmed ") + mqmed::cli::kToolVersion);
    app.require_subcommand(1);

    std::string run_path, describe_path;
    auto* run = app.add_subcommand("run", "Run the task named in a config file");
    run->add_option("config", run_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
    auto* describe = app.add_subcommand("describe", "Summarize the model in a config file");
    describe->add_option("config", describe_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mqmed::cli::kExitError;
    }

    if (*run) return mqmed::cli::run_file(run_path, std::cout, std::cerr);
    return mqmed::cli::describe_file(describe_path, std::cout, std::cerr);
}
