#include <CLI11.hpp>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "rcdlab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral-gap stability experiments on one-dimensional log-concave measures"};
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool resolution_check = false;

    app.add_option("command", command, "spectrum, keylemma, hermite, stein, obsdiam, converse, needles or full-report")
        ->required();
    app.add_option("--config", config_path, "INI experiment configuration")->required();
    app.add_option("--out", out_dir, "directory for <run-id>.report and <run-id>.csv");
    app.add_option("--seed", seed, "seed for the randomized guiding-function competitors");
    app.add_flag("--resolution-check", resolution_check, "rerun the spectrum on the doubled grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rcdlab::cli::kExitUsage;
    }
    if (!rcdlab::cli::is_known_command(command)) {
        std::cerr << "unknown command '" << command << "'\n" << app.help();
        return rcdlab::cli::kExitUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    const auto outcome = rcdlab::cli::execute(config_path, command, out_dir, seed, resolution_check);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    for (const auto& path : outcome.written) std::cout << "wrote " << path << "\n";
    if (!outcome.message.empty()) std::cerr << outcome.message << "\n";
    // Wall time stays out of the report so reruns are byte-identical.
    std::cerr << "elapsed " << elapsed.count() << " s\n";
    return outcome.status;
}
