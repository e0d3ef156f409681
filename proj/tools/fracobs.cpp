#include "fracobs/config.hpp"
#include "fracobs/runner.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("fracobs"));
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("FRACOBS_LOG")) {
        spdlog::cfg::helpers::load_levels(level);
    }

    CLI::App app{"Fractional obstacle problems in one dimension"};
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    bool dump = false;
    std::vector<std::string> commands;
    for (const auto& c : fracobs::known_commands()) {
        commands.push_back(c);
    }
    app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(commands));
    app.add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads for assembly")->check(CLI::Range(1, 256));
    app.add_flag("--dump", dump, "Also write stiffness.csv and load.csv");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fracobs::kExitValidation;
    }

    std::ifstream in(config_path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    fracobs::ExperimentConfig config;
    try {
        config = fracobs::parse_config(text.str());
    } catch (const fracobs::ConfigError& e) {
        for (const auto& msg : e.errors()) {
            std::cerr << config_path << ": " << msg << '\n';
        }
        return fracobs::kExitValidation;
    }
    if (config.command != command) {
        std::cerr << config_path << ": config is for '" << config.command << "', not '" << command << "'\n";
        return fracobs::kExitValidation;
    }

    fracobs::RunOptions options;
    options.out_dir = out_dir;
    options.threads = threads;
    options.dump = dump;
    options.console = &std::cout;
    const int code = fracobs::run_experiment(config, options);
    const auto meta = std::filesystem::path(out_dir) / "metadata.json";
    if (code != fracobs::kExitOk && std::filesystem::exists(meta)) {
        std::cerr << "fracobs: exit " << code << " (see " << meta.string() << ")\n";
    }
    return code;
}
