// noonsim command line tool.
//
//   noonsim run --config <file> [--out <dir>] [--quiet]
//   noonsim patterns <circuit>
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <noonsim/runner.hpp>

namespace {

int run_command(const std::string& config_path, const std::string& out_override, bool quiet) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << config_path << ": cannot open config file\n";
        return 2;
    }
    try {
        noonsim::RunConfig cfg = noonsim::parse_config(is);
        const std::string out = out_override.empty() ? cfg.out_dir : out_override;
        noonsim::run(cfg, out, quiet, std::cout);
        return 0;
    } catch (const noonsim::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int patterns_command(const std::string& circuit_name) {
    try {
        const noonsim::Circuit circuit = noonsim::preset(circuit_name);
        const auto catalog = noonsim::list_patterns(circuit);
        std::cout << std::left << std::setw(10) << "pattern" << std::setw(9) << "photons"
                  << std::setw(7) << "class" << "ideal_visibility\n";
        char vis[32];
        for (const auto& info : catalog) {
            std::snprintf(vis, sizeof vis, "%.9g", info.predicted_visibility);
            std::cout << std::left << std::setw(10) << info.pattern << std::setw(9)
                      << info.photons << std::setw(7) << info.class_id << vis << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"noonsim: multimode bosonic interference simulator"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    bool quiet = false;
    CLI::App* run = app.add_subcommand("run", "run a configuration file");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--out", out_override, "output directory (overrides the config)");
    run->add_flag("--quiet", quiet, "suppress progress output");

    std::string circuit_name;
    CLI::App* patterns = app.add_subcommand("patterns", "list coincidence patterns of a preset circuit");
    patterns->add_option("circuit", circuit_name, "hom | noon4 | noon6")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // bad arguments are configuration errors
    }

    if (run->parsed())
        return run_command(config_path, out_override, quiet);
    return patterns_command(circuit_name);
}
